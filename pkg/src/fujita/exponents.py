"""Critical-exponent calculus for the weighted heat equation.

Closed forms for the scale-critical Lebesgue index p_c, the (forced)
Fujita exponents p_F(sigma) and p_F(m), the auxiliary index ell, the
admissible window for the Lorentz index r, and the time weight mu with
its two consistency identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ExponentSet:
    """All derived exponents for parameters (N, d, alpha, sigma, m, p).

    r_window is the open interval of admissible values of 1/r (empty
    when lo >= hi); r is its midpoint reciprocal and mu the associated
    time weight, both None when the window is empty.
    """

    p_c: float
    p_F_sigma: float
    p_F_m: float
    ell: float
    r_window: tuple
    r: float | None
    mu: float | None


def fujita_exponent(N: int, d: float, alpha: float, s: float) -> float:
    """p_F(s) = (N - 2ds + alpha)/(N - 2ds - 2d), or +inf if the denominator
    is nonpositive (supercritical smoothing: every p > 1 is admissible)."""
    den = N - 2.0 * d * s - 2.0 * d
    if den <= 0:
        return math.inf
    return (N - 2.0 * d * s + alpha) / den


def exponents(N: int, d: float, alpha: float, sigma: float, m: float, p: float) -> ExponentSet:
    """Fill an ExponentSet; requires 2d + alpha > 0 and p > 1."""
    if 2.0 * d + alpha <= 0:
        raise ValueError(f"need 2d + alpha > 0, got 2d={2*d}, alpha={alpha}")
    if p <= 1:
        raise ValueError(f"need p > 1, got {p}")
    p_c = N * (p - 1.0) / (2.0 * d + alpha)
    ell = N * p_c / (N + 2.0 * (sigma + 1.0) * d * p_c)
    lo = max((alpha * p + 2.0 * d) / (N * p * (p - 1.0)), 1.0 / p_c + 2.0 * d * sigma / N)
    hi = min(1.0 / p_c, (N + alpha) / (N * p), 1.0 / p)
    if lo < hi:
        window = (lo, hi)
        inv_r = 0.5 * (lo + hi)
        r = 1.0 / inv_r
        mu = (N / (2.0 * d)) * (1.0 / p_c - inv_r)
    else:
        window = ()
        r = None
        mu = None
    return ExponentSet(
        p_c=p_c,
        p_F_sigma=fujita_exponent(N, d, alpha, sigma),
        p_F_m=fujita_exponent(N, d, alpha, m),
        ell=ell,
        r_window=window,
        r=r,
        mu=mu,
    )


def mu_identity_gaps(es: ExponentSet, N: int, d: float, alpha: float,
                     sigma: float, p: float) -> tuple:
    """Residuals of the two defining identities of mu (0 when they hold).

    mu = N(p-1)/(2rd) - alpha/(2d) + p*mu - 1
    mu = (N/2d)(1/ell - 1/r) - sigma - 1
    """
    if es.mu is None:
        raise ValueError("mu is undefined: empty r-window")
    r, mu = es.r, es.mu
    gap1 = mu - (N * (p - 1.0) / (2.0 * r * d) - alpha / (2.0 * d) + p * mu - 1.0)
    gap2 = mu - ((N / (2.0 * d)) * (1.0 / es.ell - 1.0 / r) - sigma - 1.0)
    return gap1, gap2


def beta_function(a: float, b: float) -> float:
    """Euler beta B(a,b) = Gamma(a)Gamma(b)/Gamma(a+b) via log-gamma."""
    if a <= 0 or b <= 0:
        raise ValueError(f"beta_function requires positive arguments, got {a}, {b}")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
