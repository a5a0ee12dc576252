import math

import numpy as np
import pytest

from naeopt import hardness as H
from naeopt.errors import DomainError
from naeopt.moments import f2

from conftest import random_step_function

SQRT21 = math.sqrt(21.0)


class TestMixtureValue:
    def test_pure_three_clauses_at_max_f2(self):
        assert H.mixture_value(0.0, 1 / 3, 0.0) == 1.0

    def test_pure_five_clauses_random(self):
        assert H.mixture_value(1.0, 0.0, 0.0) == 15 / 16

    def test_worst_case_point(self):
        v = H.mixture_value(H.P_STAR, H.F2_STAR, H.F2_STAR**2)
        assert abs(v - H.BOUND) < 1e-12

    def test_affine_in_p(self, rng):
        for _ in range(20):
            f2v, f4v = rng.uniform(0, 1 / 3), rng.uniform(0, 1)
            p = np.sort(rng.uniform(0, 1, 3))
            vals = [H.mixture_value(x, f2v, f4v) for x in p]
            interp = vals[0] + (vals[2] - vals[0]) * (p[1] - p[0]) / (p[2] - p[0])
            assert abs(vals[1] - interp) < 1e-12

    def test_concave_in_f2_after_substitution(self):
        grid = np.linspace(0, 1 / 3, 41)
        for p in (0.2, H.P_STAR, 0.9):
            vals = np.array([H.mixture_value(p, x, x * x) for x in grid])
            assert np.all(np.diff(vals, 2) <= 1e-12)


class TestInnerMax:
    def test_at_p_star(self):
        f2v, val = H.inner_max(H.P_STAR)
        assert abs(val - H.BOUND) < 1e-12
        assert abs(f2v - H.F2_STAR) < 1e-12

    def test_at_one(self):
        f2v, val = H.inner_max(1.0)
        assert f2v == 0.0 and val == 15 / 16

    def test_at_zero(self):
        f2v, val = H.inner_max(0.0)
        assert f2v == 1 / 3 and val == 1.0

    @pytest.mark.parametrize("p", [0.1, 0.35, 0.5, 0.64, 0.8, 0.99])
    def test_matches_grid_oracle(self, p):
        grid = np.linspace(0, 1 / 3, 201)
        oracle = max(H.mixture_value(p, x, x * x) for x in grid)
        _, val = H.inner_max(p)
        assert val >= oracle - 1e-15
        assert val - oracle < 1e-4  # 201-point grid resolution
        fine = np.linspace(0, 1 / 3, 20001)
        oracle_fine = max(H.mixture_value(p, x, x * x) for x in fine)
        assert abs(val - oracle_fine) < 1e-9

    def test_dominates_every_feasible_point(self, rng):
        for _ in range(100):
            p = rng.uniform(0.01, 1)
            x = rng.uniform(0, 1 / 3)
            assert H.inner_max(p)[1] >= H.mixture_value(p, x, x * x) - 1e-14

    def test_domain(self):
        with pytest.raises(DomainError):
            H.inner_max(1.5)


class TestNae35Bound:
    def test_closed_forms(self):
        b = H.nae35_bound()
        assert abs(b.bound - 3 * (SQRT21 - 4) / 2) < 1e-15
        assert abs(b.bound - 0.873863542433) < 1e-9
        assert abs(b.p_star - 3 / SQRT21) < 1e-15
        assert abs(b.p_star - 0.654653670708) < 1e-9
        assert abs(b.f2_star - (2 * SQRT21 - 9)) < 1e-15
        assert b.bound < 7 / 8

    def test_numeric_minimax_residual(self):
        assert H.nae35_bound().residual < 1e-9


class TestF2Range:
    def test_f2_at_third_within_bounds(self, rng):
        # the constraint source: 0 <= F2(1/3) <= 1/3 for odd rounding functions
        for _ in range(40):
            f = random_step_function(rng, monotone=True)
            v = f2(f, 1 / 3)
            assert -1e-9 <= v <= 1 / 3 + 1e-9
