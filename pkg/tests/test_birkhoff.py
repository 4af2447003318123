import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from birkhoff_attn import (
    DYKSTRA,
    SPLITTING_QP,
    ProjectionError,
    ProjectionSettings,
    affine_project,
    as_dsm,
    birkhoff_distance,
    frobenius_distance,
    project,
)

import oracles

QP = ProjectionSettings(method=SPLITTING_QP, tolerance=1e-11)


class TestAffineProject:
    def test_dsm_is_fixed(self):
        m = np.full((3, 3), 1 / 3)
        assert_allclose(affine_project(m), m, atol=1e-15)

    def test_half_mass_example(self):
        # both marginals short by the same amount: the correction spreads
        # uniformly, landing on the polytope center
        out = affine_project(np.array([[1.0, 1.0], [0.0, 0.0]]))
        assert_allclose(out, np.full((2, 2), 0.5), atol=1e-15)

    def test_marginals_exact_even_with_negative_entries(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((5, 5)) * 3.0
        out = affine_project(m)
        assert_allclose(out.sum(axis=1), np.ones(5), atol=1e-12)
        assert_allclose(out.sum(axis=0), np.ones(5), atol=1e-12)

    def test_matches_kkt_oracle(self):
        rng = np.random.default_rng(2)
        for n in (2, 3, 6):
            m = rng.standard_normal((n, n))
            assert_allclose(affine_project(m), oracles.affine_projection_oracle(m),
                            atol=1e-12)

    def test_is_idempotent(self):
        m = np.random.default_rng(3).standard_normal((4, 4))
        once = affine_project(m)
        assert_allclose(affine_project(once), once, atol=1e-13)


class TestProject:
    def test_identity_is_fixed(self):
        for s in (None, QP):
            d = project(np.eye(3), s)
            assert_allclose(d.matrix, np.eye(3), atol=1e-9)

    def test_center_plus_checkerboard(self):
        # J/4 + 0.3 * checkerboard already has exact marginals, so projection
        # only undoes the sign pattern where it breaks feasibility; both
        # solver routes must land on the same point as the slow oracle
        n = 4
        checker = np.fromfunction(lambda i, j: (-1.0) ** (i + j), (n, n))
        m = np.full((n, n), 0.25) + 0.3 * checker
        want = oracles.birkhoff_projection_oracle(m)
        for s in (None, QP):
            assert_allclose(project(m, s).matrix, want, atol=1e-7)

    def test_routes_agree_on_random_inputs(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            m = rng.standard_normal((5, 5)) * 2.0
            a = project(m).matrix
            b = project(m, QP).matrix
            assert frobenius_distance(a, b) < 1e-7

    def test_matches_independent_dykstra_oracle(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((4, 4))
        want = oracles.birkhoff_projection_oracle(m)
        assert_allclose(project(m).matrix, want, atol=1e-8)

    def test_output_is_validated_dsm(self):
        d = project(np.random.default_rng(6).standard_normal((6, 6)))
        assert d.tolerance == 1e-8
        assert d.report.max_row_deviation <= 1e-8

    def test_idempotence(self):
        m = np.random.default_rng(7).standard_normal((4, 4))
        once = project(m).matrix
        twice = project(once).matrix
        assert frobenius_distance(once, twice) < 1e-8

    def test_non_expansiveness(self):
        # projections onto convex sets cannot increase distances
        rng = np.random.default_rng(8)
        for _ in range(5):
            a, b = rng.standard_normal((2, 4, 4))
            d_before = frobenius_distance(a, b)
            d_after = frobenius_distance(project(a).matrix, project(b).matrix)
            assert d_after <= d_before + 1e-9

    def test_raises_with_last_iterate_on_budget_exhaustion(self):
        m = np.random.default_rng(9).standard_normal((5, 5)) * 5.0
        tight = ProjectionSettings(tolerance=1e-14, max_iterations=3)
        with pytest.raises(ProjectionError, match="no convergence") as exc_info:
            project(m, tight)
        err = exc_info.value
        assert err.last_iterate.shape == (5, 5)
        assert err.report.max_row_deviation >= 0.0

    def test_settings_validation(self):
        with pytest.raises(ValueError, match="method"):
            ProjectionSettings(method="newton")
        with pytest.raises(ValueError, match="tolerance"):
            ProjectionSettings(tolerance=0.0)
        with pytest.raises(ValueError, match="max_iterations"):
            ProjectionSettings(max_iterations=0)


class TestBirkhoffDistance:
    def test_zero_on_the_polytope(self):
        assert birkhoff_distance(np.eye(4)) == pytest.approx(0.0, abs=1e-8)

    def test_known_distance_of_scaled_identity(self):
        m = 2.0 * np.eye(3)
        want = frobenius_distance(m, oracles.birkhoff_projection_oracle(m))
        assert birkhoff_distance(m) == pytest.approx(want, abs=1e-7)

    def test_positive_off_polytope(self):
        assert birkhoff_distance(np.zeros((3, 3))) > 0.5


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
@hyp_settings(max_examples=20, deadline=None)
def test_projection_lands_on_the_polytope(seed, n):
    m = np.random.default_rng(seed).standard_normal((n, n)) * 2.0
    d = project(m)
    as_dsm(d.matrix, tolerance=1e-7)  # revalidation at a looser gate must pass
    assert np.all(d.matrix >= -1e-8)


@given(st.integers(0, 2**32 - 1))
@hyp_settings(max_examples=15, deadline=None)
def test_projection_beats_any_other_feasible_point(seed):
    # the projection is the closest feasible point; compare against a few
    # random doubly stochastic competitors built by heavy sinkhorn runs
    from birkhoff_attn import sinkhorn_naive

    rng = np.random.default_rng(seed)
    m = rng.standard_normal((4, 4))
    best = frobenius_distance(m, project(m).matrix)
    for _ in range(3):
        competitor = sinkhorn_naive(rng.uniform(0.5, 2.0, (4, 4)), 41)
        assert best <= frobenius_distance(m, competitor) + 1e-6
