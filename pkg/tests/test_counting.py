import itertools
from math import factorial

import numpy as np
import pytest

from birkhoff_attn import c2_brute, c2_closed, count_brute, decomposition_check, f3_analytic


def census_by_completion(n: int, p: int) -> int:
    """Independent re-count: build each full matrix and check it outright.

    Enumerates the free interior, completes the last row and column from the
    marginal sums, and accepts only completions that are entrywise
    non-negative with every marginal exactly p-1 (integerized grid).  Shares
    no logic with the bound-condition counting in the package.
    """
    side = n - 1
    cap = p - 1
    count = 0
    for digits in itertools.product(range(p), repeat=side * side):
        g = np.array(digits, dtype=np.int64).reshape(side, side)
        full = np.zeros((n, n), dtype=np.int64)
        full[:side, :side] = g
        full[:side, side] = cap - g.sum(axis=1)
        full[side, :side] = cap - g.sum(axis=0)
        full[side, side] = cap - full[side, :side].sum()
        ok = (
            (full >= 0).all()
            and (full.sum(axis=0) == cap).all()
            and (full.sum(axis=1) == cap).all()
        )
        count += int(ok)
    return count


class TestCountBrute:
    def test_two_by_two_is_p(self):
        # one free cell in {0..p-1}; every value completes to a valid matrix
        for p in (2, 3, 7, 50):
            assert count_brute(2, p) == p

    def test_binary_grid_counts_permutations(self):
        for n in range(2, 7):
            assert count_brute(n, 2) == factorial(n)

    @pytest.mark.parametrize("n,p,want", [(3, 3, 21), (3, 4, 55), (4, 3, 282)])
    def test_frozen_values(self, n, p, want):
        assert count_brute(n, p) == want

    @pytest.mark.parametrize("n,p", [(3, 2), (3, 3), (3, 4), (3, 5), (4, 2), (4, 3)])
    def test_matches_completion_census(self, n, p):
        assert count_brute(n, p) == census_by_completion(n, p)

    def test_monotone_in_grid_resolution(self):
        values = [count_brute(3, p) for p in range(2, 9)]
        assert values == sorted(values)
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_argument_validation(self):
        with pytest.raises(ValueError, match="n must be"):
            count_brute(1, 3)
        with pytest.raises(ValueError, match="p must be"):
            count_brute(3, 1)

    def test_enumeration_budget_guard(self):
        with pytest.raises(ValueError, match="budget"):
            count_brute(8, 10)  # 10^49 candidates is far beyond 2^48


class TestF3Analytic:
    def test_matches_brute_small(self):
        for p in range(2, 13):
            assert f3_analytic(p) == count_brute(3, p)

    def test_frozen_sequence(self):
        assert [f3_analytic(p) for p in range(2, 9)] == [6, 21, 55, 120, 231, 406, 666]

    def test_frozen_large_value(self):
        assert f3_analytic(43) == 447931

    def test_validation(self):
        with pytest.raises(ValueError, match="p must be"):
            f3_analytic(1)


class TestC2:
    @pytest.mark.parametrize("n,p,want", [(3, 2, 1), (3, 3, 5), (4, 2, 10), (4, 3, 211)])
    def test_frozen_values_both_routes(self, n, p, want):
        assert c2_brute(n, p) == want
        assert c2_closed(n, p) == want

    def test_closed_form_matches_enumeration(self):
        # n=4 stops at p=6 here (10M candidates); the acceptance suite
        # extends the same comparison to p=8
        for p in range(2, 9):
            assert c2_closed(3, p) == c2_brute(3, p)
        for p in range(2, 7):
            assert c2_closed(4, p) == c2_brute(4, p)

    def test_only_all_zero_interior_violates_for_three_by_binary(self):
        # n=3, p=2: bound is 1, so the single candidate with total 0 is the
        # all-zero interior
        assert c2_brute(3, 2) == 1


class TestDecomposition:
    @pytest.mark.parametrize(
        "n,p,want",
        [
            (3, 2, {"total": 16, "c1": 9, "c2": 1, "c12": 0, "f": 6}),
            (3, 3, {"total": 81, "c1": 55, "c2": 5, "c12": 0, "f": 21}),
            (3, 4, {"total": 256, "c1": 186, "c2": 15, "c12": 0, "f": 55}),
            (4, 2, {"total": 512, "c1": 478, "c2": 10, "c12": 0, "f": 24}),
        ],
    )
    def test_frozen_census(self, n, p, want):
        assert decomposition_check(n, p) == want

    def test_identity_holds(self):
        for n, p in ((3, 5), (4, 3)):
            c = decomposition_check(n, p)
            assert c["f"] == c["total"] - c["c1"] - c["c2"] + c["c12"]
            assert c["c2"] == c2_brute(n, p)

    def test_f_agrees_with_completion_census(self):
        assert decomposition_check(4, 3)["f"] == census_by_completion(4, 3)
