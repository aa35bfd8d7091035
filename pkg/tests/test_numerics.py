import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varsmile.errors import AccuracyError, BracketError
from varsmile.numerics import (
    Bracket,
    QuadTolerance,
    bracket_root,
    find_root,
    integrate_sqrt_singular,
    minimize_scalar,
)

# Pinned by the 1e6-panel trapezoid oracle below and cross-checked against
# a 30-digit evaluation; regression-locked.
INT_EXP_SINGULAR = 1.3162182368007262


def trapezoid_oracle_exp_singular():
    u = np.linspace(0.0, 1.0, 1_000_001)
    vals = np.empty_like(u)
    vals[0] = 2.0 / math.sqrt(math.e)  # limit of 2u/sqrt(e - e^(1-u^2))
    vals[1:] = 2.0 * u[1:] / np.sqrt(math.e - np.exp(1.0 - u[1:] ** 2))
    return float(np.trapezoid(vals, u))


class TestIntegrateSqrtSingular:
    def test_inverse_sqrt_exact(self):
        val = integrate_sqrt_singular(lambda y: 1.0 / math.sqrt(1.0 - y), 0.0, 1.0, "b")
        assert abs(val - 2.0) < 1e-10

    def test_polynomial(self):
        assert abs(integrate_sqrt_singular(lambda y: y, 0.0, 1.0, "none") - 0.5) < 1e-13

    def test_exp_singular_frozen(self):
        val = integrate_sqrt_singular(
            lambda y: 1.0 / math.sqrt(math.e - math.exp(y)), 0.0, 1.0, "b"
        )
        assert abs(val - INT_EXP_SINGULAR) < 1e-9

    def test_exp_singular_oracle_regen(self):
        assert abs(trapezoid_oracle_exp_singular() - INT_EXP_SINGULAR) < 2e-7

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=7))
    @settings(max_examples=50, deadline=None)
    def test_polynomials_exact(self, coeffs):
        poly = np.polynomial.Polynomial(coeffs)
        exact = float(poly.integ()(2.0) - poly.integ()(0.5))
        val = integrate_sqrt_singular(lambda y: float(poly(y)), 0.5, 2.0, "none")
        assert abs(val - exact) < 1e-12

    @given(st.floats(0.1, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_scaled_inverse_sqrt_exact(self, c):
        val = integrate_sqrt_singular(lambda y: c / math.sqrt(3.0 - y), 1.0, 3.0, "b")
        assert abs(val - c * 2.0 * math.sqrt(2.0)) < 1e-12

    def test_singular_at_a(self):
        val = integrate_sqrt_singular(lambda y: 1.0 / math.sqrt(y), 0.0, 1.0, "a")
        assert abs(val - 2.0) < 1e-12

    def test_pass_distance(self):
        val = integrate_sqrt_singular(
            lambda y, d: 1.0 / math.sqrt(d), 0.0, 1.0, "b", pass_distance=True
        )
        assert abs(val - 2.0) < 1e-12

    def test_budget_exhausted(self):
        tol = QuadTolerance(rel_tol=1e-13, abs_tol=1e-15, max_subdivisions=2)
        with pytest.raises(AccuracyError) as exc:
            integrate_sqrt_singular(
                lambda y: math.sin(200.0 / (y + 0.01)), 0.0, 1.0, "none", tol=tol
            )
        assert math.isfinite(exc.value.estimate)
        assert exc.value.error_bound >= 0

    def test_bad_args(self):
        with pytest.raises(ValueError):
            integrate_sqrt_singular(lambda y: y, 1.0, 0.0, "none")
        with pytest.raises(ValueError):
            integrate_sqrt_singular(lambda y: y, 0.0, 1.0, "middle")
        assert integrate_sqrt_singular(lambda y: y, 1.0, 1.0, "none") == 0.0


class TestFindRoot:
    def test_sqrt2(self):
        root = find_root(lambda x: x * x - 2.0, Bracket(1.0, 2.0))
        assert abs(root - math.sqrt(2.0)) < 1e-10

    def test_sinh_ratio(self):
        # bisection oracle to 1e-10: 1.064868548091
        root = find_root(lambda x: math.sinh(x) / x - 1.2, Bracket(0.5, 2.0))
        assert abs(root - 1.064868548091) < 1e-9

    def test_linear(self):
        assert abs(find_root(lambda x: x, Bracket(-1.0, 1.0))) < 1e-12

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))

    @given(st.floats(-3.0, 3.0))
    @settings(max_examples=50, deadline=None)
    def test_residual_small(self, shift):
        f = lambda x: math.tanh(x - shift) + 0.1 * (x - shift)
        root = find_root(f, Bracket(shift - 4.0, shift + 5.0), tol=1e-12)
        assert abs(f(root)) <= 10 * 1e-12 + 1e-12

    def test_bracket_expansion(self):
        br = bracket_root(lambda x: x - 100.0, 0.0, 1.0)
        assert br.lo < 100.0 < br.hi
        with pytest.raises(BracketError):
            bracket_root(lambda x: x * x + 1.0, 0.0, 1.0, max_expansions=5)


class TestMinimizeScalar:
    def test_quadratic(self):
        res = minimize_scalar(lambda x: (x - 3.0) ** 2, Bracket(0.0, 10.0), tol=1e-10)
        assert abs(res.x - 3.0) < 1e-8
        assert res.fx < 1e-15
        assert not res.boundary

    def test_quartic(self):
        res = minimize_scalar(lambda x: x**4, Bracket(-1.0, 2.0), tol=1e-10)
        assert abs(res.x) < 1e-7

    def test_cosh_minus_x(self):
        res = minimize_scalar(lambda x: math.cosh(x) - x, Bracket(-2.0, 2.0), tol=1e-10)
        assert abs(res.x - math.asinh(1.0)) < 1e-8

    def test_expansion_finds_exterior_minimum(self):
        res = minimize_scalar(lambda x: (x - 25.0) ** 2, Bracket(0.0, 1.0), tol=1e-9)
        assert abs(res.x - 25.0) < 1e-6
        assert res.expansions > 0
        assert not res.boundary

    def test_boundary_flagged_without_expansion(self):
        res = minimize_scalar(lambda x: x, Bracket(0.0, 1.0), tol=1e-9, expand=False)
        assert res.boundary
        assert res.x < 1e-6

    def test_hard_bounds_respected(self):
        res = minimize_scalar(
            lambda x: (x - 25.0) ** 2, Bracket(0.0, 1.0), tol=1e-9, hard_bounds=(0.0, 2.0)
        )
        assert res.boundary
        assert res.x <= 2.0

    @given(st.floats(-5.0, 5.0), st.floats(0.1, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_convex_argmin(self, center, curv):
        res = minimize_scalar(
            lambda x: curv * (x - center) ** 2 + math.exp(0.1 * (x - center)),
            Bracket(center - 6.0, center + 6.0),
            tol=1e-9,
        )
        # analytic argmin solves 2 curv (x-c) + 0.1 exp(0.1 (x-c)) = 0
        from scipy.optimize import brentq

        root = brentq(lambda x: 2 * curv * (x - center) + 0.1 * math.exp(0.1 * (x - center)),
                      center - 6.0, center + 6.0)
        assert abs(res.x - root) < 1e-6
