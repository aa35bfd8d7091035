"""Zero-correlation rate function for variance options.

With rho = 0 the two-dimensional path problem splits: given the variance
leg's time budget z = integral of e^h, the asset leg's optimal cost is a
closed form driven by a terminal level G solving a ratio-of-integrals
equation, and the variance leg is the Asian-option rate J(V0, z).  The
rate function is the scalar infimum over z of the sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import (
    AccuracyError,
    BracketError,
    DegenerateEtaError,
    InfeasibleStrikeError,
)
from .model import (
    LsvModel,
    SigmaSpec,
    eta_log_coeffs,
    eta_log_eval,
    forward_variance_limit,
)
from .numerics import Bracket, QuadTolerance, bracket_root, find_root, integrate_sqrt_singular, minimize_scalar
from .paths import PathPair

__all__ = [
    "AsianRateSolution",
    "RateResult",
    "asian_rate_j",
    "asian_rate_j_const",
    "asian_rate_general",
    "solve_g_endpoint",
    "rate_zero_rho",
    "optimal_paths_zero_rho",
]

# Treat eta as constant below this relative slope; the endpoint equation
# degenerates (it divides by eta^2(G) - eta^2(x) which is identically 0).
CONST_ETA_REL_TOL = 1e-12

_ATM_REL_TOL = 1e-13


@dataclass(frozen=True)
class AsianRateSolution:
    """Variance-leg (h-only) rate J with its branch data.

    ``alpha`` is the terminal log excursion |h(1) - h(0)|; ``f_value`` and
    ``g_value`` are the two endpoint integrals whose half-product is J.
    ``const_param`` carries beta (above) or xi (below) when the constant
    vol-of-vol shortcut produced the solution.
    """

    value: float
    branch: str  # "above" | "below" | "atm"
    alpha: float = 0.0
    f_value: float = 0.0
    g_value: float = 0.0
    const_param: Optional[float] = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("asian rate must be nonnegative")


@dataclass(frozen=True)
class RateResult:
    """Rate-function value with optimizer diagnostics."""

    value: float
    method: str
    z_star: Optional[float] = None
    g_endpoint: Optional[float] = None
    lagrange: Optional[float] = None
    g_cost: float = 0.0
    h_cost: float = 0.0
    diagnostics: dict = field(default_factory=dict)
    paths: Optional[PathPair] = None


# ---------------------------------------------------------------------------
# Asian-option sub-problem J(V0, z)
# ---------------------------------------------------------------------------


def _fg_above(sig_log: Callable[[float], float], alpha: float, tol: QuadTolerance):
    """Endpoint integrals for the z > level0 branch.

    F = int_0^a dy / (sig(y) sqrt(e^a - e^y)),  G = int_0^a sqrt(e^a - e^y) / sig(y) dy,
    with e^a - e^y = e^y expm1(d) on the exact distance d = a - y.
    """

    def f_int(y, d):
        return math.exp(-0.5 * y) / (sig_log(y) * math.sqrt(math.expm1(d)))

    def g_int(y, d):
        return math.exp(0.5 * y) * math.sqrt(math.expm1(d)) / sig_log(y)

    f = integrate_sqrt_singular(f_int, 0.0, alpha, singular_at="b", tol=tol, pass_distance=True)
    g = integrate_sqrt_singular(g_int, 0.0, alpha, singular_at="b", tol=tol, pass_distance=True)
    return f, g


def _fg_below(sig_log: Callable[[float], float], alpha: float, tol: QuadTolerance):
    """Endpoint integrals for the z < level0 branch (log excursion downward)."""
    ea = math.exp(0.5 * alpha)

    def f_int(y, d):
        return 1.0 / (sig_log(-y) * math.sqrt(math.expm1(d)))

    def g_int(y, d):
        return math.sqrt(math.expm1(d)) / sig_log(-y)

    f = ea * integrate_sqrt_singular(f_int, 0.0, alpha, singular_at="b", tol=tol, pass_distance=True)
    g = integrate_sqrt_singular(g_int, 0.0, alpha, singular_at="b", tol=tol, pass_distance=True) / ea
    return f, g


def asian_rate_general(
    sig_log: Callable[[float], float],
    zr: float,
    tol: QuadTolerance | None = None,
) -> AsianRateSolution:
    """Rate of the h-only problem with constraint (1/level0) int e^h dt = zr.

    ``sig_log(y)`` must return the (positive) volatility coefficient at log
    offset y from the starting level.  Used directly for J(V0, z) and, with
    a transformed coefficient, for the perfectly correlated reduction.
    """
    tol = tol or QuadTolerance()
    if zr <= 0:
        raise ValueError("zr must be positive")
    if abs(zr - 1.0) <= _ATM_REL_TOL:
        return AsianRateSolution(0.0, "atm")

    if zr > 1.0:

        def phi(alpha):
            f, g = _fg_above(sig_log, alpha, tol)
            return math.exp(alpha) - zr - g / f

        lo = math.log(zr)  # e^alpha >= zr at the root
        br = bracket_root(phi, lo, lo + 1.0, expand="hi")
        alpha = find_root(phi, br, tol=1e-13)
        f, g = _fg_above(sig_log, alpha, tol)
        return AsianRateSolution(0.5 * f * g, "above", alpha=alpha, f_value=f, g_value=g)

    def phi(alpha):
        f, g = _fg_below(sig_log, alpha, tol)
        return zr - math.exp(-alpha) - g / f

    lo = -math.log(zr)  # e^-alpha <= zr at the root
    br = bracket_root(phi, lo, lo + 1.0, expand="hi")
    alpha = find_root(phi, br, tol=1e-13)
    f, g = _fg_below(sig_log, alpha, tol)
    return AsianRateSolution(0.5 * f * g, "below", alpha=alpha, f_value=f, g_value=g)


def asian_rate_j(
    sigma: SigmaSpec,
    v0: float,
    z: float,
    tol: QuadTolerance | None = None,
) -> AsianRateSolution:
    """J(V0, z): the variance-leg rate, by quadrature plus root finding."""
    if v0 <= 0 or z <= 0:
        raise ValueError("v0 and z must be positive")
    return asian_rate_general(lambda y: float(sigma.value_log(y)), z / v0, tol=tol)


def asian_rate_j_const(sigma0: float, v0: float, z: float) -> AsianRateSolution:
    """J(V0, z) for constant vol-of-vol, via the transcendental shortcuts.

    z above V0: beta solves sinh(beta)/beta = z/V0 and
    J = (beta^2/2 - beta tanh(beta/2)) / sigma0^2.  z below V0: xi in
    [0, pi/2] solves sin(2 xi)/(2 xi) = z/V0 and J = 2 xi (tan xi - xi) / sigma0^2.
    Quadrature-free, used as the independent check of the general route.
    """
    if sigma0 <= 0 or v0 <= 0 or z <= 0:
        raise ValueError("inputs must be positive")
    zr = z / v0
    if abs(zr - 1.0) <= _ATM_REL_TOL:
        return AsianRateSolution(0.0, "atm", const_param=0.0)

    if zr > 1.0:
        br = bracket_root(lambda b: math.sinh(b) / b - zr, 1e-8, 2.0, expand="hi")
        beta = find_root(lambda b: math.sinh(b) / b - zr, br, tol=1e-14)
        value = (0.5 * beta * beta - beta * math.tanh(0.5 * beta)) / sigma0**2
        ch = math.cosh(0.5 * beta)
        alpha = 2.0 * math.log(ch)
        f = beta / (sigma0 * ch)
        g = 2.0 * ch * (0.5 * beta - math.tanh(0.5 * beta)) / sigma0
        return AsianRateSolution(value, "above", alpha=alpha, f_value=f, g_value=g, const_param=beta)

    br = Bracket(1e-12, 0.5 * math.pi * (1.0 - 1e-15))
    xi = find_root(lambda s: math.sin(2.0 * s) / (2.0 * s) - zr, br, tol=1e-14)
    value = 2.0 * xi * (math.tan(xi) - xi) / sigma0**2
    alpha = -2.0 * math.log(math.cos(xi))
    f = 2.0 * xi / (sigma0 * math.cos(xi))
    g = 2.0 * (math.sin(xi) - xi * math.cos(xi)) / sigma0
    return AsianRateSolution(value, "below", alpha=alpha, f_value=f, g_value=g, const_param=xi)


# ---------------------------------------------------------------------------
# Asset-leg endpoint equation and cost
# ---------------------------------------------------------------------------


def _endpoint_integrals(model: LsvModel, u_g: float, tol: QuadTolerance):
    """The two integrals of the endpoint equation, on [min(u_g,0), max(u_g,0)].

    Returned positively oriented; their ratio num/den equals z/K at the
    solution.  u_g < 0 is the call geometry (eta^2(G) > eta^2(x) on the way),
    u_g > 0 the put geometry.
    """
    if u_g < 0:
        lo, hi, singular = u_g, 0.0, "a"

        def dsq(u, dist):
            # eta^2(e^u_g) - eta^2(e^u) with u - u_g = dist exact
            e1 = eta_log_eval(model, u_g)
            e2 = eta_log_eval(model, u)
            return model.eta.diff_log(u_g, u, delta=-dist) * (e1 + e2)

    else:
        lo, hi, singular = 0.0, u_g, "b"

        def dsq(u, dist):
            # eta^2(e^u) - eta^2(e^u_g) with u_g - u = dist exact
            e1 = eta_log_eval(model, u)
            e2 = eta_log_eval(model, u_g)
            return model.eta.diff_log(u, u_g, delta=-dist) * (e1 + e2)

    def num_int(u, dist):
        e = float(eta_log_eval(model, u))
        d = float(dsq(u, dist))
        return 1.0 / (e * math.sqrt(max(d, 5e-324)))

    def den_int(u, dist):
        e = float(eta_log_eval(model, u))
        d = float(dsq(u, dist))
        return e / math.sqrt(max(d, 5e-324))

    num = integrate_sqrt_singular(num_int, lo, hi, singular_at=singular, tol=tol, pass_distance=True)
    den = integrate_sqrt_singular(den_int, lo, hi, singular_at=singular, tol=tol, pass_distance=True)
    return num, den


def _solve_u_g(model: LsvModel, z: float, k: float, side: str, tol: QuadTolerance) -> float:
    """Root u_G = log(G/S0) of the ratio equation num/den = z/K."""
    eta0 = float(eta_log_eval(model, 0.0))
    target = z / k
    limit = 1.0 / eta0**2

    if side == "call":
        if target > limit * (1.0 + 1e-12):
            raise InfeasibleStrikeError(
                f"call-side endpoint needs z/K <= 1/eta(S0)^2; got {target} > {limit}"
            )
        if target >= limit * (1.0 - 1e-13):
            return 0.0
        sign = -1.0
    elif side == "put":
        if target < limit * (1.0 - 1e-12):
            raise InfeasibleStrikeError(
                f"put-side endpoint needs z/K >= 1/eta(S0)^2; got {target} < {limit}"
            )
        if target <= limit * (1.0 + 1e-13):
            return 0.0
        sign = 1.0
    else:
        raise ValueError("side must be 'call' or 'put'")

    def psi(u_g):
        num, den = _endpoint_integrals(model, u_g, tol)
        return num / den - target

    # psi has the sign of (limit - target) near u_g = 0 and crosses zero as
    # |u_g| grows; expand until it does or eta saturates.
    u_near = sign * 1e-12
    f_near = psi(u_near)
    u = sign * 0.25
    u_prev = u_near
    while True:
        f_u = psi(u)
        if f_near * f_u <= 0.0:
            break
        u_prev = u
        u = 2.0 * u
        if abs(u) > 40.0:
            raise InfeasibleStrikeError(
                f"no endpoint level G reaches z/K = {target} (eta saturated)"
            )
    lo, hi = (u, u_prev) if u < u_prev else (u_prev, u)
    return find_root(psi, Bracket(lo, hi), tol=1e-13)


def solve_g_endpoint(
    model: LsvModel,
    z: float,
    k: float,
    side: str,
    tol: QuadTolerance | None = None,
) -> float:
    """Terminal asset level G of the zero-correlation asset-leg solution."""
    if z <= 0 or k <= 0:
        raise ValueError("z and K must be positive")
    eta0, eta1, _ = eta_log_coeffs(model)
    if getattr(model.eta, "is_constant", False) or abs(eta1) < CONST_ETA_REL_TOL * abs(eta0):
        raise DegenerateEtaError("constant eta: endpoint equation is degenerate, use J(V0, K/eta0^2)")
    tol = tol or QuadTolerance()
    u_g = _solve_u_g(model, z, k, side, tol)
    return model.s0 * math.exp(u_g)


def _g_leg_cost(model: LsvModel, z: float, k: float, tol: QuadTolerance):
    """Asset-leg cost at budget z: (G, cost, lagrange, den integral).

    The formula branch is fixed by z against K/eta(S0)^2, not by the option
    side: below it the asset path must raise eta (call geometry), above it
    must lower eta.
    """
    eta0 = float(eta_log_eval(model, 0.0))
    z_pivot = k / eta0**2
    if abs(z - z_pivot) <= 1e-13 * z_pivot:
        return model.s0, 0.0, 0.0, 0.0
    side = "call" if z < z_pivot else "put"
    u_g = _solve_u_g(model, z, k, side, tol)
    _, den = _endpoint_integrals(model, u_g, tol)
    eta_g = float(eta_log_eval(model, u_g))
    gap = eta_g**2 * z - k
    # gap >= 0 on the call branch and <= 0 on the put branch by construction.
    cost = den * den * abs(gap) / (2.0 * k * k)
    lam = -den * den / (2.0 * k * k) if side == "call" else den * den / (2.0 * k * k)
    return model.s0 * math.exp(u_g), cost, lam, den


def rate_zero_rho(
    model: LsvModel,
    k: float,
    tol: QuadTolerance | None = None,
    z_tol: float = 1e-9,
) -> RateResult:
    """Closed-form rate function at rho = 0 via scalar minimization over z."""
    if model.rho != 0.0:
        raise ValueError("rate_zero_rho requires a model with rho = 0")
    if k <= 0:
        raise ValueError("strike must be positive")
    tol = tol or QuadTolerance()

    fv0 = forward_variance_limit(model)
    x = math.log(k / fv0)
    side = "call" if x > 0 else "put"
    if abs(x) <= 1e-14:
        return RateResult(
            0.0,
            "closed_zero_rho",
            z_star=model.v0,
            g_endpoint=model.s0,
            lagrange=0.0,
            diagnostics={"x": 0.0, "side": "atm"},
        )

    eta0, eta1, _ = eta_log_coeffs(model)
    z_pivot = k / float(eta_log_eval(model, 0.0)) ** 2

    if getattr(model.eta, "is_constant", False) or abs(eta1) < CONST_ETA_REL_TOL * abs(eta0):
        sol = asian_rate_j(model.sigma, model.v0, z_pivot, tol=tol)
        return RateResult(
            sol.value,
            "closed_zero_rho",
            z_star=z_pivot,
            g_endpoint=None,
            lagrange=None,
            g_cost=0.0,
            h_cost=sol.value,
            diagnostics={"x": x, "side": side, "constant_eta": True, "asian": sol},
        )

    y_pivot = math.log(z_pivot)

    def objective(y):
        z = math.exp(y)
        try:
            j = asian_rate_j(model.sigma, model.v0, z, tol=tol).value
            _, gc, _, _ = _g_leg_cost(model, z, k, tol)
        except (InfeasibleStrikeError, BracketError, AccuracyError):
            # infeasible budget: finite penalty sloping back toward the
            # always-feasible pivot so the search cannot stall on a plateau
            return 1e6 * (1.0 + abs(y - y_pivot))
        return gc + j

    y_lo = math.log(min(model.v0, z_pivot)) - 1.0
    y_hi = math.log(max(model.v0, z_pivot)) + 1.0
    best = minimize_scalar(objective, Bracket(y_lo, y_hi), tol=z_tol, expand=True)
    z_star = math.exp(best.x)

    sol = asian_rate_j(model.sigma, model.v0, z_star, tol=tol)
    g_end, g_cost, lam, _ = _g_leg_cost(model, z_star, k, tol)
    value = g_cost + sol.value
    return RateResult(
        value,
        "closed_zero_rho",
        z_star=z_star,
        g_endpoint=g_end,
        lagrange=lam,
        g_cost=g_cost,
        h_cost=sol.value,
        diagnostics={
            "x": x,
            "side": side,
            "boundary_minimizer": best.boundary,
            "bracket_expansions": best.expansions,
            "asian": sol,
        },
    )


# ---------------------------------------------------------------------------
# Optimal paths (rho = 0)
# ---------------------------------------------------------------------------


def _cumulative_map(integrand, upper: float, singular_last: bool, tol: QuadTolerance, m: int = 160):
    """Cumulative integral of ``integrand`` on [0, upper] at nodes clustered
    toward ``upper`` (where the integrand may be singular).  ``integrand``
    takes (y, d) with d the exact distance upper - y when known, else None.
    Returns (nodes, cumulative values)."""
    j = np.arange(m + 1)
    nodes = upper * (1.0 - (1.0 - j / m) ** 2)
    nodes[0], nodes[-1] = 0.0, upper
    cum = np.zeros(m + 1)
    for i in range(1, m + 1):
        lo, hi = nodes[i - 1], nodes[i]
        if singular_last and i == m:
            cum[i] = cum[i - 1] + integrate_sqrt_singular(
                integrand, lo, hi, singular_at="b", tol=tol, pass_distance=True
            )
        else:
            cum[i] = cum[i - 1] + integrate_sqrt_singular(
                lambda y: integrand(y, None), lo, hi, singular_at="none", tol=tol
            )
    return nodes, cum


def optimal_paths_zero_rho(
    model: LsvModel,
    k: float,
    n: int = 401,
    tol: QuadTolerance | None = None,
) -> PathPair:
    """Optimal (g, h) paths of the rho = 0 problem on a uniform n-point grid.

    h is recovered by inverting its implicit time map; g then follows from its
    own implicit equation driven by the running integral of e^h.  Endpoint
    slopes vanish by construction.
    """
    if model.rho != 0.0:
        raise ValueError("optimal_paths_zero_rho requires rho = 0")
    tol = tol or QuadTolerance()
    eta0, eta1, _ = eta_log_coeffs(model)
    if getattr(model.eta, "is_constant", False) or abs(eta1) < CONST_ETA_REL_TOL * abs(eta0):
        raise DegenerateEtaError("optimal paths need non-constant eta")

    res = rate_zero_rho(model, k, tol=tol)
    t = np.linspace(0.0, 1.0, n)
    log_s0 = math.log(model.s0)
    log_v0 = math.log(model.v0)
    if res.value == 0.0:
        return PathPair(t, np.full(n, log_s0), np.full(n, log_v0))

    z_star = res.z_star
    sol: AsianRateSolution = res.diagnostics["asian"]
    sig = model.sigma

    # variance leg: invert t(w) = P(w)/P(alpha)
    alpha = sol.alpha
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

    w_nodes, p_cum = _cumulative_map(kern, alpha, singular_last=True, tol=tol)
    w_of_p = PchipInterpolator(p_cum, w_nodes)
    f0 = w_of_p(np.clip(t * p_cum[-1], 0.0, p_cum[-1]))
    if sol.branch == "below":
        f0 = -f0
    h = log_v0 + f0
    h[0] = log_v0

    # asset leg: Theta(gamma(t)) = (den / (sqrt2 K)) * int_0^t e^h ds
    u_g = math.log(res.g_endpoint / model.s0)
    _, den = _endpoint_integrals(model, u_g, tol)

    m_spline = CubicSpline(t, np.exp(h)).antiderivative()
    m_t = m_spline(t)

    abs_ug = abs(u_g)
    if u_g < 0.0:

        def theta_kern(s, d=None):
            if d is None:
                d = abs_ug - s
            u = -s
            e1 = eta_log_eval(model, u_g)
            e2 = eta_log_eval(model, u)
            dd = float(model.eta.diff_log(u_g, u, delta=-d) * (e1 + e2))
            return 1.0 / (float(e2) * math.sqrt(2.0 * max(dd, 5e-324)))

    else:

        def theta_kern(s, d=None):
            if d is None:
                d = abs_ug - s
            u = s
            e1 = eta_log_eval(model, u)
            e2 = eta_log_eval(model, u_g)
            dd = float(model.eta.diff_log(u, u_g, delta=-d) * (e1 + e2))
            return 1.0 / (float(e1) * math.sqrt(2.0 * max(dd, 5e-324)))

    s_nodes, theta_cum = _cumulative_map(theta_kern, abs(u_g), singular_last=True, tol=tol)
    s_of_theta = PchipInterpolator(theta_cum, s_nodes)
    rhs = (den / math.sqrt(2.0) / k) * m_t
    gamma = s_of_theta(np.clip(rhs, 0.0, theta_cum[-1]))
    if u_g < 0.0:
        gamma = -gamma
    g = log_s0 + gamma
    g[0] = log_s0

    return PathPair(t, g, h)
