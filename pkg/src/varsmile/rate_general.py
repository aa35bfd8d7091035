"""Correlated-case rate machinery.

The action being minimized weighs the asset and variance path energies with
a rho cross term.  It has no closed form off rho = 0, so this module offers:
analytic sandwich bounds, the exact perfect-correlation reduction to a
one-dimensional problem, an h-only upper bound for intermediate rho, and a
direct-transcription numerical minimizer with an augmented-Lagrangian outer
loop cross-checked against the discrete stationarity conditions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize

from . import atm as atm_mod
from .errors import ConvergenceError, NumericsError
from .model import (
    LsvModel,
    eta_log_coeffs,
    eta_log_eval,
    forward_variance_limit,
    sigma_log_eval,
)
from .numerics import QuadTolerance
from .paths import PathPair
from .rate_zero import (
    CONST_ETA_REL_TOL,
    RateResult,
    asian_rate_general,
    asian_rate_j,
    optimal_paths_zero_rho,
    rate_zero_rho,
)

__all__ = [
    "BoundsResult",
    "LambdaValue",
    "NumericOptions",
    "lambda_functional",
    "constraint_integral",
    "rate_bounds_rho",
    "f_map_rho",
    "rate_perfect_corr",
    "rate_upper_corr_path",
    "rate_numeric",
]


class LambdaValue(NamedTuple):
    total: float
    g_cost: float  # cross-weighted asset-leg integral
    h_cost: float  # pure variance-leg integral


@dataclass(frozen=True)
class BoundsResult:
    lower: float
    upper_candidates: tuple[tuple[str, float], ...]
    best_upper: float

    def __post_init__(self):
        # discretized upper candidates can undershoot by quadrature error
        if self.lower > self.best_upper + 1e-6:
            raise ValueError("lower bound exceeds best upper bound")


# ---------------------------------------------------------------------------
# Discretized action
# ---------------------------------------------------------------------------


def _midpoint_pieces(model: LsvModel, paths: PathPair):
    dt = paths.dt
    dg = np.diff(paths.g) / dt
    dh = np.diff(paths.h) / dt
    gm = 0.5 * (paths.g[1:] + paths.g[:-1]) - math.log(model.s0)
    hm = 0.5 * (paths.h[1:] + paths.h[:-1]) - math.log(model.v0)
    eta_m = np.asarray(eta_log_eval(model, gm), dtype=float)
    sig_m = np.asarray(sigma_log_eval(model, hm), dtype=float)
    v_m = model.v0 * np.exp(hm)
    return dt, dg, dh, gm, hm, eta_m, sig_m, v_m


def lambda_functional(model: LsvModel, paths: PathPair) -> LambdaValue:
    """Midpoint-rule evaluation of the path action for |rho| < 1.

    Slopes live at interval midpoints; coefficient functions are evaluated at
    midpoint path values.  The same discretization is used by the numerical
    minimizer, so its reported value is reproducible from its paths.
    """
    rho = model.rho
    if abs(rho) >= 1.0:
        raise ValueError("|rho| must be < 1; use rate_perfect_corr at |rho| = 1")
    dt, dg, dh, _, _, eta_m, sig_m, v_m = _midpoint_pieces(model, paths)
    a = dg / (eta_m * np.sqrt(v_m))
    b = dh / sig_m
    g_cost = float(np.sum((a - rho * b) ** 2) * dt / (2.0 * (1.0 - rho * rho)))
    h_cost = float(np.sum(b * b) * dt / 2.0)
    return LambdaValue(g_cost + h_cost, g_cost, h_cost)


def constraint_integral(model: LsvModel, paths: PathPair) -> float:
    """Midpoint-rule value of int_0^1 e^h eta^2(e^g) dt."""
    dt, _, _, _, _, eta_m, _, v_m = _midpoint_pieces(model, paths)
    return float(np.sum(v_m * eta_m * eta_m) * dt)


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


def rate_bounds_rho(model: LsvModel, k: float, tol: QuadTolerance | None = None) -> BoundsResult:
    """Sandwich bounds on the rate for |rho| < 1.

    Lower: I0/(1+|rho|).  Uppers: I0/(1-|rho|); the action evaluated on the
    rho = 0 optimal paths; J(V0, K/eta(S0)^2)/(1-rho^2); and the h-only
    correlated-path bound.
    """
    rho = model.rho
    if abs(rho) >= 1.0:
        raise ValueError("bounds require |rho| < 1")
    tol = tol or QuadTolerance()
    model0 = model.with_rho(0.0)
    i0 = rate_zero_rho(model0, k, tol=tol).value

    lower = i0 / (1.0 + abs(rho))
    uppers: list[tuple[str, float]] = [("scaled_zero_corr", i0 / (1.0 - abs(rho)))]

    eta0, eta1, _ = eta_log_coeffs(model)
    if abs(eta1) < CONST_ETA_REL_TOL * abs(eta0):
        n = 401
        t = np.linspace(0.0, 1.0, n)
        z_pivot = k / float(eta_log_eval(model, 0.0)) ** 2
        h = _asian_h_path(model, z_pivot, t, tol)
        paths0 = PathPair(t, np.full(n, math.log(model.s0)), h)
    else:
        paths0 = optimal_paths_zero_rho(model0, k, tol=tol)
    uppers.append(("zero_corr_paths", lambda_functional(model, paths0).total))

    z_pivot = k / float(eta_log_eval(model, 0.0)) ** 2
    j = asian_rate_j(model.sigma, model.v0, z_pivot, tol=tol).value
    uppers.append(("scaled_asian", j / (1.0 - rho * rho)))

    uppers.append(("corr_path", rate_upper_corr_path(model, k, tol=tol)))

    best = min(v for _, v in uppers)
    return BoundsResult(lower=lower, upper_candidates=tuple(uppers), best_upper=best)


def _asian_h_path(model: LsvModel, z: float, t: np.ndarray, tol: QuadTolerance) -> np.ndarray:
    """Optimal h path of the plain Asian problem, used when eta is constant."""
    from .rate_zero import _cumulative_map  # local: shares the inversion helper

    log_v0 = math.log(model.v0)
    sol = asian_rate_j(model.sigma, model.v0, z, tol=tol)
    if sol.branch == "atm":
        return np.full(t.size, log_v0)
    alpha = sol.alpha
    sig = model.sigma
    if sol.branch == "above":

        def kern(y, d=None):
            if d is None:
                d = alpha - y
            return math.exp(-0.5 * y) / (float(sig.value_log(y)) * math.sqrt(math.expm1(d)))

    else:

        def kern(y, d=None):
            if d is None:
                d = alpha - y
            return 1.0 / (float(sig.value_log(-y)) * math.sqrt(math.expm1(d)))

    from scipy.interpolate import PchipInterpolator

    w_nodes, p_cum = _cumulative_map(kern, alpha, singular_last=True, tol=tol)
    f0 = PchipInterpolator(p_cum, w_nodes)(np.clip(t * p_cum[-1], 0.0, p_cum[-1]))
    if sol.branch == "below":
        f0 = -f0
    return log_v0 + f0


# ---------------------------------------------------------------------------
# Path-coupling map and perfect correlation
# ---------------------------------------------------------------------------


def f_map_rho(model: LsvModel, v: float, rho_eff: float, tol: QuadTolerance | None = None) -> float:
    """Asset level F(v) locked to variance level v along the coupled path.

    Solves int_{S0}^{F} dy/(y eta(y)) = rho_eff * int_{V0}^{v} dy/(sqrt(y) sigma(y)).
    """
    if v <= 0:
        raise ValueError("v must be positive")
    if rho_eff == 0.0 or v == model.v0:
        return model.s0
    tol = tol or QuadTolerance()
    mapper = _CoupledMap(model, rho_eff)
    return float(mapper.f_of_x(np.asarray([v]))[0])


class _CoupledMap:
    """Precomputed primitives for the coupled-path construction.

    Caches spline representations of Phi_S(u) = int_0^u du'/eta(u') and
    Phi_V(w) = sqrt(V0) int_0^w e^{w'/2}/sigma(w') dw' on wide log grids,
    giving fast vectorized F(v), the effective payoff map G(x) = x eta^2(F(x)),
    and its analytic derivative.
    """

    W_SPAN = 10.0
    _GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)

    def __init__(self, model: LsvModel, rho_eff: float):
        self.model = model
        self.rho_eff = rho_eff
        self.s0 = model.s0
        self.v0 = model.v0

        w = np.linspace(-self.W_SPAN, self.W_SPAN, 1601)
        integrand_v = lambda ww: np.sqrt(self.v0) * np.exp(0.5 * ww) / np.asarray(
            sigma_log_eval(model, ww), dtype=float
        )
        phi_v = self._cumulative(integrand_v, w)
        self._phi_v = CubicSpline(w, phi_v)

        # asset-side span must cover the image of rho * Phi_V: Phi_S grows at
        # least like u / eta_max, so u_span = |Phi_V|_max eta_max suffices
        reach = abs(rho_eff) * float(np.max(np.abs(phi_v)))
        u_span = max(2.0, 1.05 * reach * model.eta.clamp_hi + 1.0)
        n_seg = int(min(12800, max(1600, 80 * u_span)))
        u = np.linspace(-u_span, u_span, n_seg + 1)
        integrand_s = lambda uu: 1.0 / np.asarray(eta_log_eval(model, uu), dtype=float)
        phi_s = self._cumulative(integrand_s, u)
        self._phi_s = CubicSpline(u, phi_s)
        self._phi_s_inv = CubicSpline(phi_s, u)
        self._phi_s_range = (phi_s[0], phi_s[-1])

    @classmethod
    def _cumulative(cls, fn, grid):
        """Cumulative integral along a uniform grid anchored at 0,
        Gauss-Legendre per segment."""
        lo = grid[:-1]
        hi = grid[1:]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        nodes = mid[:, None] + half[:, None] * cls._GL_NODES[None, :]
        vals = fn(nodes.ravel()).reshape(nodes.shape)
        seg = half * (vals @ cls._GL_WEIGHTS)
        out = np.zeros(grid.size)
        out[1:] = np.cumsum(seg)
        # anchor so the primitive vanishes exactly at 0 (0 need not be a node)
        out -= CubicSpline(grid, out)(0.0)
        return out

    def f_of_x(self, x):
        """F at variance level(s) x (vectorized); returns asset levels."""
        w = np.log(np.asarray(x, dtype=float) / self.v0)
        if np.any(np.abs(w) > self.W_SPAN):
            raise NumericsError("variance level outside the coupled-map table")
        rhs = self.rho_eff * self._phi_v(w)
        if np.any(rhs < self._phi_s_range[0]) or np.any(rhs > self._phi_s_range[1]):
            raise NumericsError("coupled-map primitive out of range (clamp saturation)")
        return self.s0 * np.exp(self._phi_s_inv(rhs))

    def payoff_factor(self, x):
        """G(x) = x * eta^2(F(x))."""
        x = np.asarray(x, dtype=float)
        f = self.f_of_x(x)
        e = np.asarray(eta_log_eval(self.model, np.log(f / self.s0)), dtype=float)
        return x * e * e

    def payoff_factor_deriv(self, x):
        """G'(x) = eta^2(F) * (1 + 2 rho_eff sqrt(x) * Xi(F) / sigma(x)),
        with Xi the log-derivative of eta at F."""
        x = np.asarray(x, dtype=float)
        f = self.f_of_x(x)
        u = np.log(f / self.s0)
        e = np.asarray(eta_log_eval(self.model, u), dtype=float)
        xi = np.asarray(self.model.eta.dvalue_log(u), dtype=float)
        sig = np.asarray(sigma_log_eval(self.model, np.log(x / self.v0)), dtype=float)
        return e * e * (1.0 + 2.0 * self.rho_eff * np.sqrt(x) * xi / sig)

    def monotone_window(self, n: int = 2001):
        """Largest log-variance window around 0 where G is strictly increasing."""
        w = np.linspace(-self.W_SPAN + 0.05, self.W_SPAN - 0.05, n)
        gp = self.payoff_factor_deriv(self.v0 * np.exp(w))
        i0 = n // 2
        if gp[i0] <= 0.0:
            return None
        lo = i0
        while lo > 0 and gp[lo - 1] > 0.0:
            lo -= 1
        hi = i0
        while hi < n - 1 and gp[hi + 1] > 0.0:
            hi += 1
        return (w[lo], w[hi], lo > 0 or hi < n - 1)

    def payoff_inverse(self, a: float, w_window) -> float:
        """x with G(x) = a, searched inside the monotone window."""
        w_lo, w_hi, _ = w_window

        def fn(w):
            return float(self.payoff_factor(self.v0 * math.exp(w))) - a

        f_lo, f_hi = fn(w_lo), fn(w_hi)
        if f_lo > 0.0 or f_hi < 0.0:
            raise NumericsError("payoff level outside the monotone window")
        w = brentq(fn, w_lo, w_hi, xtol=1e-13)
        return self.v0 * math.exp(w)


def _h_only_rate(model: LsvModel, k: float, rho_eff: float, tol: QuadTolerance) -> RateResult:
    """inf of the variance-leg energy subject to int G(e^h) dt = K.

    Reduced to a plain Asian problem with effective volatility
    sigma_hat(A) = x G'(x) sigma(x) / A at x = G^{-1}(A); falls back to a
    one-dimensional direct transcription when G is not invertible on the
    needed range.
    """
    a0 = forward_variance_limit(model)
    if abs(k - a0) <= 1e-14 * a0:
        return RateResult(0.0, "corr_path_asian", z_star=k, g_cost=0.0, h_cost=0.0)

    mapper = _CoupledMap(model, rho_eff)
    window = mapper.monotone_window()
    if window is not None:
        try:
            def sig_hat_log(y):
                a = a0 * math.exp(y)
                x = mapper.payoff_inverse(a, window)
                gp = float(mapper.payoff_factor_deriv(np.asarray([x]))[0])
                sig = float(sigma_log_eval(model, math.log(x / model.v0)))
                return x * gp * sig / a

            sol = asian_rate_general(sig_hat_log, k / a0, tol=tol)
            return RateResult(
                sol.value,
                "corr_path_asian",
                z_star=k,
                g_cost=0.0,
                h_cost=sol.value,
                diagnostics={"alpha": sol.alpha, "branch": sol.branch, "rho_eff": rho_eff},
            )
        except NumericsError:
            pass  # excursion left the monotone window: transcribe directly

    return _h_only_direct(model, k, mapper, tol)


def _h_only_direct(model: LsvModel, k: float, mapper: _CoupledMap, tol: QuadTolerance, n: int = 401) -> RateResult:
    """Direct transcription of the h-only problem (non-invertible payoff map).

    The payoff map may be locally decreasing, so the sign of the excursion
    that meets the constraint is not known a priori; both directions are
    tried and the better-converged, lower-cost solution wins.
    """
    t = np.linspace(0.0, 1.0, n)
    dt = t[1] - t[0]
    log_v0 = math.log(model.v0)
    a0 = forward_variance_limit(model)
    x_eff = math.log(k / a0)

    def split(h_int):
        h = np.concatenate(([0.0], h_int))
        hm = 0.5 * (h[1:] + h[:-1])
        dh = np.diff(h) / dt
        return h, hm, dh

    def objective_grad(h_int, lam, mu):
        h, hm, dh = split(h_int)
        sig = np.asarray(sigma_log_eval(model, hm), dtype=float)
        dsig = np.asarray(model.sigma.dvalue_log(hm), dtype=float)
        v = model.v0 * np.exp(hm)
        gvals = mapper.payoff_factor(v)
        gder = mapper.payoff_factor_deriv(v)
        c = float(np.sum(gvals) * dt) - k
        b = dh / sig
        obj = 0.5 * float(np.sum(b * b)) * dt + lam * c + 0.5 * mu * c * c
        nu = lam + mu * c
        d_dh = b / sig * dt
        d_hm = -b * b / sig * dsig * dt + nu * gder * v * dt
        grad = np.zeros(n)
        np.add.at(grad, np.arange(0, n - 1), -d_dh / dt + 0.5 * d_hm)
        np.add.at(grad, np.arange(1, n), d_dh / dt + 0.5 * d_hm)
        return obj, grad[1:], c

    def solve_from(scale):
        h_int = (scale * 1.5 * (2.0 * t - t * t))[1:]
        lam, mu = 0.0, 1.0
        c = math.inf
        for outer in range(10):
            maxiter = 400 if outer < 3 else 3000
            res = minimize(
                lambda v_, lam=lam, mu=mu: objective_grad(v_, lam, mu)[:2],
                h_int,
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": maxiter, "ftol": 1e-18, "gtol": 1e-12, "maxcor": 20},
            )
            h_int = res.x
            _, _, c = objective_grad(h_int, lam, mu)
            if abs(c) <= 1e-10 * k and res.status == 0:
                break
            lam += mu * c
            mu *= 10.0
        h, hm, dh = split(h_int)
        sig = np.asarray(sigma_log_eval(model, hm), dtype=float)
        value = 0.5 * float(np.sum((dh / sig) ** 2)) * dt
        return value, c, h

    candidates = [solve_from(s) for s in (x_eff, -x_eff)]
    candidates.sort(key=lambda r: (abs(r[1]) > 1e-8 * k, r[0]))
    value, c, h = candidates[0]
    paths = PathPair(
        t,
        np.log(mapper.f_of_x(model.v0 * np.exp(np.clip(h, -mapper.W_SPAN, mapper.W_SPAN)))),
        log_v0 + h,
    )
    return RateResult(
        value,
        "corr_path_direct",
        z_star=k,
        g_cost=0.0,
        h_cost=value,
        diagnostics={"constraint_residual": c, "fallback": True},
        paths=paths,
    )


def rate_perfect_corr(model: LsvModel, k: float, sign: int, tol: QuadTolerance | None = None) -> RateResult:
    """Exact rate at rho = +1 or -1 via the coupled-path reduction."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if model.rho != float(sign):
        raise ValueError(f"model.rho must equal {sign} for the perfect-correlation rate")
    if k <= 0:
        raise ValueError("strike must be positive")
    tol = tol or QuadTolerance()
    res = _h_only_rate(model, k, float(sign), tol)
    method = "perfect_corr" if res.method == "corr_path_asian" else "perfect_corr_direct"
    return RateResult(
        res.value,
        method,
        z_star=res.z_star,
        g_cost=res.g_cost,
        h_cost=res.h_cost,
        diagnostics=res.diagnostics,
        paths=res.paths,
    )


def rate_upper_corr_path(model: LsvModel, k: float, tol: QuadTolerance | None = None) -> float:
    """h-only upper bound on the rate for |rho| < 1 (tight as |rho| -> 1)."""
    if abs(model.rho) >= 1.0:
        raise ValueError("requires |rho| < 1")
    if k <= 0:
        raise ValueError("strike must be positive")
    tol = tol or QuadTolerance()
    return _h_only_rate(model, k, model.rho, tol).value


# ---------------------------------------------------------------------------
# Direct transcription of the full two-dimensional problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NumericOptions:
    n: int = 201
    max_outer: int = 8
    mu0: float = 1.0
    constraint_tol: float = 1e-11  # relative to K
    gtol: float = 1e-11
    max_inner: int = 4000
    n_starts: int = 3
    seed: int = 0


def _al_objective(model: LsvModel, k: float, n: int, dt: float):
    """Builds the augmented-Lagrangian objective/gradient closure."""
    rho = model.rho
    one_m = 1.0 - rho * rho
    log_s0 = math.log(model.s0)
    log_v0 = math.log(model.v0)
    v0 = model.v0

    def compute(vars_, lam, mu):
        g = np.concatenate(([log_s0], vars_[: n - 1]))
        h = np.concatenate(([log_v0], vars_[n - 1 :]))
        dg = np.diff(g) / dt
        dh = np.diff(h) / dt
        gm = 0.5 * (g[1:] + g[:-1]) - log_s0
        hm = 0.5 * (h[1:] + h[:-1]) - log_v0
        eta_m = np.asarray(eta_log_eval(model, gm), dtype=float)
        deta_m = np.asarray(model.eta.dvalue_log(gm), dtype=float)
        sig_m = np.asarray(sigma_log_eval(model, hm), dtype=float)
        dsig_m = np.asarray(model.sigma.dvalue_log(hm), dtype=float)
        v_m = v0 * np.exp(hm)
        sqrt_v = np.sqrt(v_m)

        p = 1.0 / (eta_m * sqrt_v)
        q = 1.0 / sig_m
        u = dg * p - rho * dh * q
        b = dh * q

        c_terms = v_m * eta_m * eta_m * dt
        c = float(np.sum(c_terms)) - k
        lam_eff = lam + mu * c

        obj = float(np.sum(u * u)) * dt / (2.0 * one_m) + 0.5 * float(np.sum(b * b)) * dt
        obj += lam * c + 0.5 * mu * c * c

        a_w = dt * u / one_m  # weight on du
        b_w = dt * b  # weight on db

        d_dg = a_w * p
        d_dh = -a_w * rho * q + b_w * q
        d_gm = a_w * (-dg * p * deta_m / eta_m) + lam_eff * 2.0 * c_terms * deta_m / eta_m
        d_hm = (
            a_w * (-0.5 * dg * p + rho * dh * q * dsig_m / sig_m)
            - b_w * dh * q * dsig_m / sig_m
            + lam_eff * c_terms
        )

        grad_g = np.zeros(n)
        grad_h = np.zeros(n)
        left = np.arange(0, n - 1)
        right = np.arange(1, n)
        np.add.at(grad_g, left, -d_dg / dt + 0.5 * d_gm)
        np.add.at(grad_g, right, d_dg / dt + 0.5 * d_gm)
        np.add.at(grad_h, left, -d_dh / dt + 0.5 * d_hm)
        np.add.at(grad_h, right, d_dh / dt + 0.5 * d_hm)
        grad = np.concatenate((grad_g[1:], grad_h[1:]))
        return obj, grad, c

    return compute


def _el_residual(model: LsvModel, paths: PathPair, lam: float) -> float:
    """Max-norm residual of the continuous stationarity conditions on the
    discrete paths (central differences of the momenta); diagnostic only."""
    rho = model.rho
    one_m = 1.0 - rho * rho
    dt = paths.dt
    dg = np.diff(paths.g) / dt
    dh = np.diff(paths.h) / dt
    gm = 0.5 * (paths.g[1:] + paths.g[:-1]) - math.log(model.s0)
    hm = 0.5 * (paths.h[1:] + paths.h[:-1]) - math.log(model.v0)
    eta_m = np.asarray(eta_log_eval(model, gm), dtype=float)
    deta_m = np.asarray(model.eta.dvalue_log(gm), dtype=float)
    sig_m = np.asarray(sigma_log_eval(model, hm), dtype=float)
    dsig_m = np.asarray(model.sigma.dvalue_log(hm), dtype=float)
    v_m = model.v0 * np.exp(hm)
    sqrt_v = np.sqrt(v_m)

    p_g = dg / (one_m * eta_m**2 * v_m) - rho * dh / (one_m * eta_m * sqrt_v * sig_m)
    p_h = dh / (one_m * sig_m**2) - rho * dg / (one_m * eta_m * sqrt_v * sig_m)

    rhs_g = (
        -(dg**2) * deta_m / (one_m * eta_m**3 * v_m)
        + rho * dg * dh * deta_m / (one_m * eta_m**2 * sqrt_v * sig_m)
        + 2.0 * lam * v_m * eta_m * deta_m
    )
    rhs_h = (
        -0.5 * dg**2 / (one_m * eta_m**2 * v_m)
        - dh**2 * dsig_m / (one_m * sig_m**3)
        + rho * dg * dh * dsig_m / (one_m * eta_m * sqrt_v * sig_m**2)
        + rho * 0.5 * dg * dh / (one_m * eta_m * sqrt_v * sig_m)
        + lam * v_m * eta_m**2
    )
    r_g = np.diff(p_g) / dt - 0.5 * (rhs_g[1:] + rhs_g[:-1])
    r_h = np.diff(p_h) / dt - 0.5 * (rhs_h[1:] + rhs_h[:-1])
    scale = max(1.0, float(np.max(np.abs(rhs_g))), float(np.max(np.abs(rhs_h))))
    return float(max(np.max(np.abs(r_g)), np.max(np.abs(r_h)))) / scale


def _one_start(model, k, opts, init_g, init_h):
    n = opts.n
    t = np.linspace(0.0, 1.0, n)
    dt = t[1] - t[0]
    compute = _al_objective(model, k, n, dt)
    vars_ = np.concatenate((init_g[1:], init_h[1:]))
    lam, mu = 0.0, opts.mu0
    c = math.inf
    # early outers only steer lambda/mu; precision comes from the last ones
    for outer in range(opts.max_outer):
        maxiter = 300 if outer < 3 else min(opts.max_inner, 600 * 2 ** (outer - 3))
        gtol = 1e-8 if outer < 3 else opts.gtol
        res = minimize(
            lambda v_, lam=lam, mu=mu: compute(v_, lam, mu)[:2],
            vars_,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": maxiter, "ftol": 1e-18, "gtol": gtol, "maxcor": 20},
        )
        vars_ = res.x
        _, grad, c = compute(vars_, lam, mu)
        if abs(c) <= opts.constraint_tol * k and res.status == 0:
            break
        lam += mu * c
        mu *= 10.0
    g = np.concatenate(([math.log(model.s0)], vars_[: n - 1]))
    h = np.concatenate(([math.log(model.v0)], vars_[n - 1 :]))
    paths = PathPair(t, g, h)
    grad_norm = float(np.max(np.abs(grad)))
    return paths, lam, c, grad_norm


def rate_numeric(
    model: LsvModel,
    k: float,
    opts: NumericOptions | None = None,
) -> RateResult:
    """Direct transcription of the full variational problem for |rho| < 1.

    Piecewise-linear paths on a uniform grid, midpoint-rule action, equality
    constraint enforced by an augmented Lagrangian with an L-BFGS inner loop,
    initialized from the small-x expansion paths (plus perturbed restarts).
    """
    if abs(model.rho) >= 1.0:
        raise ValueError("rate_numeric requires |rho| < 1")
    if k <= 0:
        raise ValueError("strike must be positive")
    opts = opts or NumericOptions()

    fv0 = forward_variance_limit(model)
    x = math.log(k / fv0)
    n = opts.n
    t = np.linspace(0.0, 1.0, n)
    if abs(x) <= 1e-14:
        paths = PathPair(t, np.full(n, math.log(model.s0)), np.full(n, math.log(model.v0)))
        return RateResult(0.0, "numeric_transcription", z_star=model.v0, lagrange=0.0, paths=paths)

    base = atm_mod.expansion_paths(model, x, n=n, order=2)
    rng = np.random.default_rng(opts.seed)
    shapes = np.stack([2.0 * t - t * t, t * t * (1.0 - t) * 4.0, np.sin(math.pi * t) * t])

    starts = []
    for i in range(opts.n_starts):
        if i == 0:
            starts.append((base.g.copy(), base.h.copy()))
        else:
            wiggle_g = 0.1 * abs(x) * (rng.standard_normal(3) @ shapes)
            wiggle_h = 0.1 * abs(x) * (rng.standard_normal(3) @ shapes)
            starts.append((base.g + wiggle_g, base.h + wiggle_h))

    results = []
    with ThreadPoolExecutor(max_workers=min(opts.n_starts, 4)) as pool:
        futures = [pool.submit(_one_start, model, k, opts, g0, h0) for g0, h0 in starts]
        for i, fut in enumerate(futures):
            paths, lam, c, grad_norm = fut.result()
            val = lambda_functional(model, paths).total
            results.append((val, i, paths, lam, c, grad_norm))

    results.sort(key=lambda r: (r[0], r[1]))
    val, idx, paths, lam, c, grad_norm = results[0]
    if abs(c) > 1e-8 * k:
        raise ConvergenceError(
            f"constraint residual {c:.3e} after augmented-Lagrangian loop",
            best=paths,
            diagnostics={"constraint_residual": c, "grad_norm": grad_norm},
        )

    lv = lambda_functional(model, paths)
    return RateResult(
        lv.total,
        "numeric_transcription",
        z_star=None,
        g_endpoint=float(math.exp(paths.g[-1])),
        lagrange=lam,
        g_cost=lv.g_cost,
        h_cost=lv.h_cost,
        diagnostics={
            "x": x,
            "constraint_residual": c,
            "grad_norm": grad_norm,
            "el_residual": _el_residual(model, paths, lam),
            "start_values": [(r[0], r[1]) for r in results],
            "selected_start": idx,
        },
        paths=paths,
    )
