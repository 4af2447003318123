import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from birkhoff_attn import exp_scale, sinkhorn_naive, sinkhorn_ot

import oracles

TINY = np.finfo(np.float64).tiny


class TestExpScale:
    def test_max_entry_maps_to_one(self):
        out = exp_scale(np.array([[3.0, 1.0], [0.0, -2.0]]))
        assert out.max() == 1.0
        assert np.all(out > 0.0)
        assert np.all(out <= 1.0)

    def test_known_values(self):
        out = exp_scale(np.array([[1.0, 0.0], [0.0, 1.0]]), tau=1.0)
        assert_allclose(out, [[1.0, np.e ** -1], [np.e ** -1, 1.0]], rtol=1e-15)

    def test_underflow_clamps_to_tiny(self):
        out = exp_scale(np.array([[0.0, -1e6], [-1e6, 0.0]]))
        assert out.min() == TINY  # exp(-1e6) underflows; clamp keeps it positive

    def test_small_tau_sharpens(self):
        m = np.array([[1.0, 0.0], [0.0, 1.0]])
        sharp = exp_scale(m, tau=0.1)
        soft = exp_scale(m, tau=10.0)
        assert sharp[0, 1] < soft[0, 1]

    def test_rejects_non_positive_tau(self):
        with pytest.raises(ValueError, match="tau"):
            exp_scale(np.eye(2), tau=0.0)


class TestSinkhornNaive:
    def test_cross_ratio_limit(self):
        # [[2,1],[1,2]] converges to [[2/3,1/3],[1/3,2/3]]: by symmetry the
        # limit is a symmetric DSM whose entries keep a pair of equal ratios;
        # the mpmath re-run of the same alternation pins the frozen values
        out = sinkhorn_naive(np.array([[2.0, 1.0], [1.0, 2.0]]), 201)
        assert_allclose(out, np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0, atol=1e-15)
        assert_allclose(out, oracles.mp_sinkhorn(np.array([[2.0, 1.0], [1.0, 2.0]]), 201),
                        atol=1e-15)

    def test_column_stochastic_after_odd_count(self):
        # passes are 0-indexed and start on columns, so odd k ends on a
        # column pass: columns are the exact marginal, rows the approximate one
        rng = np.random.default_rng(0)
        m = rng.uniform(0.5, 2.0, (6, 6))
        for k in (1, 3, 21):
            out = sinkhorn_naive(m, k)
            assert_allclose(out.sum(axis=0), np.ones(6), atol=1e-14)

    def test_single_pass_is_one_column_normalize(self):
        m = np.array([[1.0, 3.0], [1.0, 1.0]])
        assert_allclose(sinkhorn_naive(m, 1), m / m.sum(axis=0, keepdims=True))

    def test_constant_column_input_hits_uniform_in_one_pass(self):
        m = np.array([[1.0, 5.0, 2.0]] * 3)  # identical rows = constant columns
        assert_allclose(sinkhorn_naive(m, 1), np.full((3, 3), 1 / 3), atol=1e-15)

    def test_constant_row_input_hits_uniform_from_k3(self):
        m = np.exp(np.outer([0.0, 1.0, 0.0, 0.0], np.ones(4)))  # constant rows
        assert np.abs(sinkhorn_naive(m, 1) - 0.25).max() > 0.1  # one pass keeps rows apart
        assert_allclose(sinkhorn_naive(m, 3), np.full((4, 4), 0.25), atol=1e-15)

    def test_row_deviation_decreases_with_k(self):
        rng = np.random.default_rng(5)
        m = rng.uniform(0.1, 5.0, (8, 8))
        devs = []
        for k in range(1, 43, 2):
            out = sinkhorn_naive(m, k)
            devs.append(np.abs(out.sum(axis=1) - 1.0).max())
        # contraction until float round-off flattens the tail
        assert all(b <= a * (1 + 1e-6) + 1e-14 for a, b in zip(devs, devs[1:]))
        assert devs[-1] < 1e-10 < devs[0]

    def test_doubly_stochastic_fixed_point(self):
        m = np.full((4, 4), 0.25)
        assert_allclose(sinkhorn_naive(m, 21), m, atol=1e-15)

    def test_matches_mpmath_on_random_input(self):
        rng = np.random.default_rng(9)
        m = rng.uniform(0.2, 3.0, (5, 5))
        assert_allclose(sinkhorn_naive(m, 21), oracles.mp_sinkhorn(m, 21), atol=1e-13)

    def test_rejects_even_or_non_positive_k(self):
        with pytest.raises(ValueError, match="odd"):
            sinkhorn_naive(np.ones((2, 2)), 2)
        with pytest.raises(ValueError, match="odd"):
            sinkhorn_naive(np.ones((2, 2)), 0)

    def test_rejects_zero_entry(self):
        with pytest.raises(ValueError, match="strictly positive"):
            sinkhorn_naive(np.array([[1.0, 0.0], [1.0, 1.0]]), 3)

    def test_input_not_mutated(self):
        m = np.ones((3, 3))
        sinkhorn_naive(m, 3)
        assert_allclose(m, np.ones((3, 3)))


class TestSinkhornOT:
    def test_iteration_for_iteration_match(self):
        rng = np.random.default_rng(2)
        m = rng.uniform(0.1, 4.0, (7, 7))
        for k in (1, 3, 5, 21):
            assert_allclose(sinkhorn_ot(m, k), sinkhorn_naive(m, k), atol=1e-8)

    def test_extreme_dynamic_range_matches_mpmath(self):
        # tau = 0.01 spreads exp(m/tau) over ~170 orders of magnitude; the
        # log-domain route has to agree with the 60-digit reference
        rng = np.random.default_rng(7)
        scores = rng.uniform(-2.0, 2.0, (5, 5))
        kernel = exp_scale(scores, tau=0.01)
        got = sinkhorn_ot(kernel, 21)
        want = oracles.mp_sinkhorn(oracles.mp_exp_scale(scores, 0.01), 21)
        assert_allclose(got, want, atol=1e-9)

    def test_column_stochastic_after_odd_count(self):
        rng = np.random.default_rng(4)
        out = sinkhorn_ot(rng.uniform(0.5, 2.0, (5, 5)), 7)
        assert_allclose(out.sum(axis=0), np.ones(5), atol=1e-12)

    def test_shares_input_validation(self):
        with pytest.raises(ValueError, match="strictly positive"):
            sinkhorn_ot(np.array([[1.0, -1.0], [1.0, 1.0]]), 3)
        with pytest.raises(ValueError, match="odd"):
            sinkhorn_ot(np.ones((2, 2)), 4)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.sampled_from([1, 3, 9, 21]))
@settings(max_examples=30, deadline=None)
def test_output_positive_and_column_stochastic(seed, n, k):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.05, 10.0, (n, n))
    out = sinkhorn_naive(m, k)
    assert np.all(out > 0.0)
    assert_allclose(out.sum(axis=0), np.ones(n), atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(-3, 8))
@settings(max_examples=25, deadline=None)
def test_power_of_two_scaling_cancels_exactly(seed, exponent):
    # lam * m has the same column sums scaled by lam; power-of-two lam makes
    # the cancellation bit-exact, not just approximate
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.1, 2.0, (4, 4))
    lam = 2.0 ** exponent
    assert np.array_equal(sinkhorn_naive(m, 5), sinkhorn_naive(lam * m, 5))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_exp_scale_shift_cancels_in_sinkhorn(seed):
    # adding a constant to the scores multiplies the kernel by a constant,
    # which the first normalization removes
    rng = np.random.default_rng(seed)
    scores = rng.standard_normal((4, 4))
    a = sinkhorn_naive(exp_scale(scores), 5)
    b = sinkhorn_naive(exp_scale(scores - 3.7), 5)
    assert_allclose(a, b, atol=1e-13)
