"""Expansion of the rate function around the money and the ATM sqrt(T) limit.

The rate function admits I(x) = A x^2 + B x^3 + O(x^4) in log-moneyness
x = log(K / (V0 eta(S0)^2)).  A and B are explicit in the log-expansion
coefficients of eta and sigma; the optimal paths expand to second order
with polynomial time profiles whose coefficients are sigma0-polynomials
assembled below.  Everything here is closed-form arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError
from .model import (
    LsvModel,
    eta_log_coeffs,
    forward_variance_limit,
    sigma_log_coeffs,
)
from .paths import PathPair

__all__ = ["AtmExpansion", "atm_expansion", "rate_expansion", "expansion_paths", "atm_price_limit"]


@dataclass(frozen=True)
class AtmExpansion:
    """Coefficients of the small-x expansion of the rate function and paths.

    value(x) = A x^2 + B x^3; first-order paths are g1_amp * (2t - t^2) and
    h1_amp * (2t - t^2); second-order profiles are cubic/quartic polynomials
    with coefficients (a, b, c) and (abar, bbar, cbar).
    """

    A: float
    B: float
    D: float
    beta0: float
    beta1: float
    beta2: float
    g1_amp: float
    h1_amp: float
    a: float
    b: float
    c: float
    abar: float
    bbar: float
    cbar: float
    c_series: tuple[float, ...]
    d_series: tuple[float, ...]
    cbar_series: tuple[float, ...]
    dbar_series: tuple[float, ...]

    def rate(self, x: float) -> float:
        return self.A * x * x + self.B * x**3

    def g1(self, t):
        t = np.asarray(t, dtype=float)
        return self.g1_amp * (2.0 * t - t * t)

    def h1(self, t):
        t = np.asarray(t, dtype=float)
        return self.h1_amp * (2.0 * t - t * t)

    def g2(self, t):
        t = np.asarray(t, dtype=float)
        return (
            0.5 * self.a * t * (t - 2.0)
            + self.b * t * (t * t - 3.0) / 6.0
            + self.c * t * (t**3 - 4.0) / 12.0
        )

    def h2(self, t):
        t = np.asarray(t, dtype=float)
        return (
            0.5 * self.abar * t * (t - 2.0)
            + self.bbar * t * (t * t - 3.0) / 6.0
            + self.cbar * t * (t**3 - 4.0) / 12.0
        )


def atm_expansion(model: LsvModel) -> AtmExpansion:
    """Assemble the expansion coefficients for the given model."""
    eta0, eta1, eta2 = eta_log_coeffs(model)
    sig0, sig1, _ = sigma_log_coeffs(model)
    rho = model.rho
    v0 = model.v0
    sv = math.sqrt(v0)

    d = sig0 * sig0 + 4.0 * rho * sig0 * sv * eta1 + 4.0 * eta1 * eta1 * v0
    if d <= 1e-14:
        raise DegenerateModelError("quadratic coefficient denominator vanishes")

    beta0 = 16.0 * eta1**2 * v0**2 * (eta1**2 + 6.0 * eta0 * eta2)
    beta1 = 8.0 * eta1 * rho * v0 * (3.0 * eta1 * rho * sig1 + 7.0 * eta1**2 * sv + 12.0 * eta0 * eta2 * sv)
    beta2 = 4.0 * (
        6.0 * eta1 * rho * sig1 * sv + 6.0 * eta0 * eta2 * rho**2 * v0 + eta1**2 * (5.0 + 7.0 * rho**2) * v0
    )
    cubic_num = (
        sig0**4
        + 2.0 * sig0**3 * (3.0 * sig1 + 7.0 * eta1 * rho * sv)
        + beta2 * sig0**2
        + beta1 * sig0
        + beta0
    )
    a_coef = 3.0 / (2.0 * d)
    b_coef = -3.0 / (10.0 * d**3) * cubic_num

    g1_amp = 1.5 * (2.0 * eta1 * sv + rho * sig0) * sv * eta0 / d
    h1_amp = 1.5 * sig0 * (sig0 + 2.0 * eta1 * rho * sv) / d

    c_series = (
        64.0 * eta1**3 * (14.0 * eta1**2 + 9.0 * eta0 * eta2) * v0**2.5,
        144.0 * eta1**3 * rho**2 * sig1 * v0**1.5
        + 16.0 * eta1**2 * (149.0 * eta1**2 + 54.0 * eta0 * eta2) * rho * v0**2,
        144.0 * eta1**2 * rho * sig1 * v0
        + 72.0 * eta1**2 * rho**3 * sig1 * v0
        + 640.0 * eta1**3 * v0**1.5
        + 8.0 * eta1 * (227.0 * eta1**2 + 54.0 * eta0 * eta2) * rho**2 * v0**1.5,
        36.0 * eta1 * sig1 * sv
        + 72.0 * eta1 * rho**2 * sig1 * sv
        + 864.0 * eta1**2 * rho * v0
        + 4.0 * (91.0 * eta1**2 + 18.0 * eta0 * eta2) * rho**3 * v0,
        18.0 * rho * sig1 + 86.0 * eta1 * sv + 212.0 * eta1 * rho**2 * sv,
        28.0 * rho,
    )
    d_series = (
        8.0 * eta0 * eta1 * v0**2 * (5.0 * eta1**2 + 2.0 * eta0 * eta2),
        4.0 * eta0 * eta1 * rho**2 * sig1 * v0
        + 8.0 * eta0 * (8.0 * eta1**2 + eta0 * eta2) * rho * v0**1.5,
        2.0 * eta0 * rho * sig1 * sv + 16.0 * eta0 * eta1 * v0 + 16.0 * eta0 * eta1 * rho**2 * v0,
        5.0 * eta0 * rho * sv,
    )
    cbar_series = (
        32.0
        * (
            15.0 * eta1**4 * rho**2 * sig1 * v0**2
            + 13.0 * eta1**5 * rho * v0**2.5
            + 18.0 * eta0 * eta1**3 * eta2 * rho * v0**2.5
        ),
        16.0
        * (
            30.0 * eta1**3 * rho * sig1 * v0**1.5
            + 39.0 * eta1**3 * rho**3 * sig1 * v0**1.5
            - 2.0 * eta1**4 * v0**2
            + 18.0 * eta0 * eta1**2 * eta2 * v0**2
            + 76.0 * eta1**4 * rho**2 * v0**2
            + 36.0 * eta0 * eta1**2 * eta2 * rho**2 * v0**2
        ),
        8.0
        * (
            15.0 * eta1**2 * sig1 * v0
            + 102.0 * eta1**2 * rho**2 * sig1 * v0
            + 66.0 * eta1**3 * rho * v0**1.5
            + 36.0 * eta0 * eta1 * eta2 * rho * v0**1.5
            + 91.0 * eta1**3 * rho**3 * v0**1.5
            + 18.0 * eta0 * eta1 * eta2 * rho**3 * v0**1.5
        ),
        4.0
        * (
            87.0 * eta1 * rho * sig1 * sv
            + 20.0 * eta1**2 * v0
            + 137.0 * eta1**2 * rho**2 * v0
            + 18.0 * eta0 * eta2 * rho**2 * v0
        ),
        4.0 * (12.0 * sig1 + 37.0 * eta1 * rho * sv),
        13.0,
    )
    dbar_series = (
        4.0 * eta1 * rho * (3.0 * eta1 * rho * sig1 + 2.0 * eta1**2 * sv + 2.0 * eta0 * eta2 * sv) * v0,
        2.0 * (7.0 * eta1 * rho * sig1 * sv + 7.0 * eta1**2 * rho**2 * v0 + 2.0 * eta0 * eta2 * rho**2 * v0),
        4.0 * sig1 + 7.0 * eta1 * rho * sv,
        1.0,
    )

    c_sum = sum(cj * sig0**j for j, cj in enumerate(c_series))
    d_sum = sum(dj * sig0**j for j, dj in enumerate(d_series))
    cbar_sum = sum(cj * sig0**j for j, cj in enumerate(cbar_series))
    dbar_sum = sum(dj * sig0**j for j, dj in enumerate(dbar_series))

    a = 3.0 * eta0 * sv * c_sum / (10.0 * d**3)
    b = -4.5 * d_sum / (d * d)
    c = 2.25 * d_sum / (d * d)
    abar = 3.0 * sig0 * cbar_sum / (10.0 * d**3)
    bbar = -9.0 * sig0 * dbar_sum / (d * d)
    cbar = 4.5 * sig0 * dbar_sum / (d * d)

    return AtmExpansion(
        A=a_coef,
        B=b_coef,
        D=d,
        beta0=beta0,
        beta1=beta1,
        beta2=beta2,
        g1_amp=g1_amp,
        h1_amp=h1_amp,
        a=a,
        b=b,
        c=c,
        abar=abar,
        bbar=bbar,
        cbar=cbar,
        c_series=c_series,
        d_series=d_series,
        cbar_series=cbar_series,
        dbar_series=dbar_series,
    )


def rate_expansion(model: LsvModel, x: float) -> float:
    """A x^2 + B x^3; accurate for small |x| only."""
    return atm_expansion(model).rate(x)


def expansion_paths(model: LsvModel, x: float, n: int = 401, order: int = 2) -> PathPair:
    """Optimal paths truncated at first or second order in x."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    exp = atm_expansion(model)
    t = np.linspace(0.0, 1.0, n)
    g = x * exp.g1(t)
    h = x * exp.h1(t)
    if order == 2:
        g = g + x * x * exp.g2(t)
        h = h + x * x * exp.h2(t)
    return PathPair(t, math.log(model.s0) + g, math.log(model.v0) + h)


def atm_price_limit(model: LsvModel) -> float:
    """limit of ATM price / sqrt(T): same constant for calls and puts.

    Equals eta^2(S0) V0 / sqrt(6 pi) times the square root of
    4 V0 (S0 eta'(S0))^2 + sigma^2(V0) + 4 rho S0 eta'(S0) sqrt(V0) sigma(V0).
    """
    _, eta1, _ = eta_log_coeffs(model)
    sig0, _, _ = sigma_log_coeffs(model)
    v0 = model.v0
    radicand = 4.0 * v0 * eta1 * eta1 + sig0 * sig0 + 4.0 * model.rho * eta1 * math.sqrt(v0) * sig0
    radicand = max(radicand, 0.0)
    return forward_variance_limit(model) / math.sqrt(6.0 * math.pi) * math.sqrt(radicand)
