"""Shared numerical kernel: singular quadrature, bracketed root finding,
golden-section minimization.

Every integral in the rate-function machinery has at worst an inverse
square-root singularity at one endpoint.  ``integrate_sqrt_singular``
removes it exactly by the substitution u = sqrt(b - y) (mirrored for the
left endpoint) and integrates the smooth transformed integrand with
adaptive Gauss panels.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import AccuracyError, BracketError

__all__ = [
    "QuadTolerance",
    "Bracket",
    "ScalarMinimum",
    "integrate_sqrt_singular",
    "find_root",
    "bracket_root",
    "minimize_scalar",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0

# Hard cap on bracket auto-expansion (total width factor).
_EXPAND_LIMIT = 2.0**10


@dataclass(frozen=True)
class QuadTolerance:
    """Accuracy targets for the quadrature kernel."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi]; sign change for roots, unimodality for minima."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class ScalarMinimum:
    """Result of a scalar minimization."""

    x: float
    fx: float
    boundary: bool = False
    expansions: int = 0


def integrate_sqrt_singular(
    f: Callable[[float], float],
    a: float,
    b: float,
    singular_at: str = "none",
    tol: QuadTolerance | None = None,
    pass_distance: bool = False,
) -> float:
    """Integrate f on [a, b] where f may blow up like 1/sqrt(distance) at one end.

    ``singular_at`` is "a", "b" or "none".  The singular endpoint is removed
    by substitution before the adaptive panels see the integrand, so the
    endpoint itself is never evaluated.

    With ``pass_distance`` (singular cases only) the integrand is called as
    f(y, d) where d is the exact distance to the singular endpoint; forming
    b - y inside f would cancel catastrophically near the endpoint.
    """
    tol = tol or QuadTolerance()
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration endpoints must be finite")
    if a == b:
        return 0.0
    if a > b:
        raise ValueError("requires a < b")

    if singular_at == "b":
        width = b - a
        if pass_distance:

            def g(u: float) -> float:
                d = u * u
                return 2.0 * u * f(b - d, d)

        else:

            def g(u: float) -> float:
                return 2.0 * u * f(b - u * u)

        lo, hi = 0.0, math.sqrt(width)
    elif singular_at == "a":
        width = b - a
        if pass_distance:

            def g(u: float) -> float:
                d = u * u
                return 2.0 * u * f(a + d, d)

        else:

            def g(u: float) -> float:
                return 2.0 * u * f(a + u * u)

        lo, hi = 0.0, math.sqrt(width)
    elif singular_at == "none":
        if pass_distance:
            raise ValueError("pass_distance needs a singular endpoint")
        g, lo, hi = f, a, b
    else:
        raise ValueError("singular_at must be 'a', 'b' or 'none'")

    out = quad(
        g,
        lo,
        hi,
        epsabs=tol.abs_tol,
        epsrel=tol.rel_tol,
        limit=tol.max_subdivisions,
        full_output=1,
    )
    if len(out) >= 4:
        raise AccuracyError(str(out[3]).replace("\n", " "), estimate=out[0], error_bound=out[1])
    return out[0]


def find_root(f: Callable[[float], float], bracket: Bracket, tol: float = 1e-12) -> float:
    """Bracketed root via Brent's method; never steps outside the bracket."""
    flo = f(bracket.lo)
    fhi = f(bracket.hi)
    if flo == 0.0:
        return bracket.lo
    if fhi == 0.0:
        return bracket.hi
    if flo * fhi > 0:
        raise BracketError(
            f"no sign change on [{bracket.lo}, {bracket.hi}]: f={flo:.6g}, {fhi:.6g}"
        )
    return brentq(f, bracket.lo, bracket.hi, xtol=tol, rtol=4 * sys.float_info.epsilon)


def bracket_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grow: float = 2.0,
    max_expansions: int = 60,
    expand: str = "hi",
) -> Bracket:
    """Expand [lo, hi] geometrically on one side until f changes sign."""
    flo = f(lo)
    fhi = f(hi)
    n = 0
    while flo * fhi > 0:
        if n >= max_expansions:
            raise BracketError(f"no sign change after {n} expansions (last [{lo}, {hi}])")
        if expand == "hi":
            hi = lo + (hi - lo) * grow
            fhi = f(hi)
        else:
            lo = hi - (hi - lo) * grow
            flo = f(lo)
        n += 1
    return Bracket(lo, hi)


def _golden(f, a, b, tol):
    """Golden-section search on [a, b]; returns best sampled (x, fx)."""
    h = b - a
    x1 = a + _INVPHI2 * h
    x2 = a + _INVPHI * h
    f1, f2 = f(x1), f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    while h > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            h = b - a
            x1 = a + _INVPHI2 * h
            f1 = f(x1)
            if f1 < best_f:
                best_x, best_f = x1, f1
        else:
            a, x1, f1 = x1, x2, f2
            h = b - a
            x2 = a + _INVPHI * h
            f2 = f(x2)
            if f2 < best_f:
                best_x, best_f = x2, f2
    return best_x, best_f, a, b


def minimize_scalar(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float = 1e-10,
    expand: bool = True,
    hard_bounds: tuple[float, float] | None = None,
) -> ScalarMinimum:
    """Golden-section minimization with optional auto-expanding bracket.

    If the minimizer lands at a bracket edge the bracket is widened on that
    side (doubling, capped at a total factor of 2**10, clipped to
    ``hard_bounds``).  If the edge persists the result is returned with
    ``boundary=True``; the value is still valid as an upper bound.
    """
    lo, hi = bracket.lo, bracket.hi
    width0 = hi - lo
    expansions = 0
    while True:
        x, fx, a_fin, b_fin = _golden(f, lo, hi, tol)
        edge_lo = (x - lo) <= 2.0 * tol
        edge_hi = (hi - x) <= 2.0 * tol
        if not (edge_lo or edge_hi):
            return ScalarMinimum(x, fx, boundary=False, expansions=expansions)
        if not expand or (hi - lo) >= _EXPAND_LIMIT * width0:
            return ScalarMinimum(x, fx, boundary=True, expansions=expansions)
        w = hi - lo
        if edge_lo:
            new_lo = lo - w
            if hard_bounds is not None:
                new_lo = max(new_lo, hard_bounds[0])
            if new_lo >= lo or not new_lo < x:
                return ScalarMinimum(x, fx, boundary=True, expansions=expansions)
            lo = new_lo
        else:
            new_hi = hi + w
            if hard_bounds is not None:
                new_hi = min(new_hi, hard_bounds[1])
            if new_hi <= hi or not new_hi > x:
                return ScalarMinimum(x, fx, boundary=True, expansions=expansions)
            hi = new_hi
        expansions += 1
