"""Test-function blow-up machinery: cutoffs, the rescaled test function
psi_T, the integral inequality of the weak formulation, and the sign
criterion theta < 0 <=> p < p_F(m).

The test function is separable, psi_T(x,t) = psi1(t/T)^{p'} * Phi(x) with
Phi = psi2(|x|^{2d}/T)^{2dp'}, p' = p/(p-1), so all space-time integrals
factor into a time quadrature (trapezoid over the trajectory mesh) and
exact cell sums in space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec, fractional_laplacian, radial_weight

_QUAD_TOL = 1e-6
_MIN_LAYER_CELLS = 16


class SupportClipped(ValueError):
    """The spatial support of psi_T exceeds the periodic box."""


class ResolutionError(ValueError):
    """A cutoff transition layer is under-resolved on the grid."""


# ---------------------------------------------------------------------------
# smooth cutoffs
# ---------------------------------------------------------------------------

def _bump(s: np.ndarray) -> np.ndarray:
    """exp(-1/s) for s > 0, 0 otherwise (the standard C-infinity mollifier)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smoothstep(s) -> np.ndarray:
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, B(s)/(B(s)+B(1-s)) between."""
    s = np.asarray(s, dtype=float)
    b, c = _bump(s), _bump(1.0 - s)
    out = np.where(s >= 1.0, 1.0, 0.0)
    mid = (s > 0.0) & (s < 1.0)
    out[mid] = b[mid] / (b[mid] + c[mid])
    return out


def smoothstep_prime(s) -> np.ndarray:
    """Derivative of smoothstep; vanishes identically outside (0, 1)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    mid = (s > 0.0) & (s < 1.0)
    sm = s[mid]
    b, c = _bump(sm), _bump(1.0 - sm)
    db = b / sm**2
    dc = c / (1.0 - sm) ** 2
    out[mid] = (db * c + b * dc) / (b + c) ** 2
    return out


def psi1(s) -> np.ndarray:
    """Temporal cutoff: 1 on [1/2, 3/4], 0 on [0, 1/4] and [4/5, inf)."""
    s = np.asarray(s, dtype=float)
    rising = smoothstep((s - 0.25) * 4.0)
    falling = smoothstep((0.8 - s) * 20.0)
    # each factor is 1 wherever the other varies, so the product realizes
    # the plateau/support table and is C-infinity
    return rising * falling


def psi1_prime(s) -> np.ndarray:
    """Analytic derivative of psi1 (zero on the plateau and off-support)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    up = (s > 0.25) & (s < 0.5)
    out[up] = 4.0 * smoothstep_prime((s[up] - 0.25) * 4.0)
    down = (s > 0.75) & (s < 0.8)
    out[down] = -20.0 * smoothstep_prime((0.8 - s[down]) * 20.0)
    return out


def psi2(s) -> np.ndarray:
    """Spatial cutoff: 1 on [0, 1], 0 on [2, inf)."""
    s = np.asarray(s, dtype=float)
    return smoothstep(2.0 - s)


def psi2_prime(s) -> np.ndarray:
    return -smoothstep_prime(2.0 - np.asarray(s, dtype=float))


@dataclass(frozen=True)
class CutoffPair:
    psi1: object
    psi2: object


def cutoff_pair() -> CutoffPair:
    return CutoffPair(psi1, psi2)


def psi_T(radius, t: float, T: float, d: float, p: float) -> np.ndarray:
    """psi_T(x, t) = psi1(t/T)^{p/(p-1)} psi2(|x|^{2d}/T)^{2dp/(p-1)}.

    ``radius`` is |x| (scalar or array).
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    pp = p / (p - 1.0)
    r = np.asarray(radius, dtype=float)
    return psi1(t / T) ** pp * psi2(r ** (2.0 * d) / T) ** (2.0 * d * pp)


# ---------------------------------------------------------------------------
# spatial factor and its fractional Laplacian
# ---------------------------------------------------------------------------

def _check_support(grid: GridSpec, T: float, d: float) -> None:
    if (2.0 * T) ** (1.0 / (2.0 * d)) >= grid.half_width:
        raise SupportClipped(
            f"psi_T support radius (2T)^(1/2d)={(2.0*T)**(1.0/(2.0*d)):.3g} "
            f"exceeds the box half-width {grid.half_width}"
        )


def spatial_factor(grid: GridSpec, T: float, d: float, p: float) -> Field:
    """Phi(x) = psi2(|x|^{2d}/T)^{2dp/(p-1)} sampled on the grid."""
    _check_support(grid, T, d)
    pp = p / (p - 1.0)
    return Field(grid, psi2(grid.radius() ** (2.0 * d) / T) ** (2.0 * d * pp))


def laplacian_power_bound_check(T: float, d: int, p: float, grid: GridSpec) -> float:
    """Scaling ratio for the bound |(-Delta)^d psi_T| <= C T^{-1} psi2^{2d/(p-1)}.

    With the temporal factor frozen at its plateau, returns the sup over
    the transition region (psi2 in (1e-3, 1-1e-3)) of
    T |(-Delta)^d Phi| / psi2(|x|^{2d}/T)^{2d/(p-1)}; callers assert this
    stays bounded as T doubles.
    """
    if d not in (1, 2):
        raise ValueError(f"laplacian_power_bound_check requires integer d in {{1,2}}, got {d}")
    # transition layer |x| in [T^{1/2d}, (2T)^{1/2d}] must span >= 16 cells
    layer = (2.0 * T) ** (1.0 / (2.0 * d)) - T ** (1.0 / (2.0 * d))
    if layer / grid.spacing < _MIN_LAYER_CELLS:
        raise ResolutionError(
            f"psi_2 transition layer spans {layer / grid.spacing:.1f} cells "
            f"(< {_MIN_LAYER_CELLS}); refine the grid or lower T"
        )
    phi = spatial_factor(grid, T, float(d), p)
    lap = fractional_laplacian(phi, float(d))
    base = psi2(grid.radius() ** (2.0 * d) / T)
    region = (base > 1e-3) & (base < 1.0 - 1e-3)
    if not np.any(region):
        return 0.0
    denom = base[region] ** (2.0 * d / (p - 1.0))
    return float(np.max(T * np.abs(lap.values[region]) / denom))


# ---------------------------------------------------------------------------
# the certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificateReport:
    T: float
    lhs_nonlinear: float
    forcing_term: float
    I1: float
    I2: float
    theta: float
    verdict: str  # InequalityHolds | InequalityViolated | Indeterminate


def nonexistence_exponent(N: int, d: float, alpha: float, p: float, m: float) -> float:
    """theta = -alpha/(2d(p-1)) + N/(2d) - p/(p-1) - m.

    The certificate's right-hand side scales like T^theta; theta < 0 is
    equivalent to p < p_F(m) whenever N - 2dm - 2d > 0.
    """
    return (-alpha / (2.0 * d * (p - 1.0)) + N / (2.0 * d)
            - p / (p - 1.0) - m)


def wbar_integral(w: Field, T: float, d: float, p: float) -> float:
    """Cell sum of w(x) psi2(|x|^{2d}/T)^{2dp/(p-1)}."""
    phi = spatial_factor(w.grid, T, d, p)
    return float(np.sum(w.values * phi.values) * w.grid.cell_measure)


def _trapezoid(times: np.ndarray, vals: np.ndarray) -> float:
    return float(np.trapezoid(vals, times))


def certificate(u_traj, params, T: float, allow_fractional: bool = False) -> CertificateReport:
    """Evaluate the integral inequality of the weak formulation on [0, T].

    ``u_traj`` is a pair (times, fields) covering [0, T].  All four
    integrals use the trapezoid rule in time and exact cell sums in
    space.  InequalityViolated means
    lhs_nonlinear + forcing_term > (I1 + I2)(1 + 1e-6): the trajectory
    cannot continue to a global weak solution.  Non-integer d is outside
    the theory; with ``allow_fractional`` the functional is still
    evaluated but the verdict is always Indeterminate.
    """
    g = params.grid
    d, p = params.d, params.p
    integer_d = float(d).is_integer()
    if not integer_d and not allow_fractional:
        raise ValueError(
            "the certificate's theory requires integer d; pass "
            "allow_fractional=True for Indeterminate-grade evaluation")
    times, fields = u_traj
    times = np.asarray(times, dtype=float)
    if times[0] > 0 or times[-1] < T:
        raise ValueError(f"trajectory [{times[0]}, {times[-1]}] does not cover [0, {T}]")
    sel = times <= T * (1.0 + 1e-12)
    times = times[sel]
    fields = [f for f, keep in zip(fields, sel) if keep]

    pp = p / (p - 1.0)
    phi = spatial_factor(g, T, d, p)
    lap_phi = fractional_laplacian(phi, d)
    weight = radial_weight(g, params.alpha, params.reg_radius)
    hN = g.cell_measure
    zeta = params.forcing.zeta

    a_t = psi1(times / T) ** pp
    da_t = pp * psi1(times / T) ** (pp - 1.0) * psi1_prime(times / T) / T
    # psi1 vanishes to infinite order at the support edges, so the
    # pp-1 < 0 power never blows up; clean up 0 * inf -> 0
    da_t = np.nan_to_num(da_t, nan=0.0, posinf=0.0, neginf=0.0)

    nl_space = np.array([float(np.sum(weight.values * np.abs(f.values) ** p * phi.values)) * hN
                         for f in fields])
    abs_lap = np.abs(lap_phi.values)
    i1_space = np.array([float(np.sum(np.abs(f.values) * abs_lap)) * hN for f in fields])
    i2_space = np.array([float(np.sum(np.abs(f.values) * phi.values)) * hN for f in fields])
    zeta_t = np.array([zeta(t) for t in times])
    w_space = float(np.sum(params.w.values * phi.values)) * hN

    lhs_nonlinear = _trapezoid(times, a_t * nl_space)
    forcing_term = _trapezoid(times, a_t * zeta_t) * w_space
    I1 = _trapezoid(times, a_t * i1_space)
    I2 = _trapezoid(times, np.abs(da_t) * i2_space)

    m = getattr(params.forcing, "m", getattr(params.forcing, "sigma", 0.0))
    theta = nonexistence_exponent(g.dim, d, params.alpha, p, m)

    lhs = lhs_nonlinear + forcing_term
    rhs = I1 + I2
    scale = max(lhs, rhs, 1e-300)
    if not integer_d:
        verdict = "Indeterminate"
    elif lhs > rhs * (1.0 + _QUAD_TOL):
        verdict = "InequalityViolated"
    elif abs(lhs - rhs) <= _QUAD_TOL * scale and lhs > 0:
        verdict = "Indeterminate"
    else:
        verdict = "InequalityHolds"
    return CertificateReport(T=T, lhs_nonlinear=lhs_nonlinear, forcing_term=forcing_term,
                             I1=I1, I2=I2, theta=theta, verdict=verdict)


def young_split(u_traj, params, T: float, eps: float = 0.5):
    """The epsilon-Young decomposition of I1, evaluated pointwise.

    Returns (I1_masked, half_lhs, I11): by the pointwise Young inequality
    |u (-Delta)^d psi_T| <= eps |x|^alpha |u|^p psi_T
                            + C(eps) |(-Delta)^d psi_T|^{p'} |x|^{-alpha/(p-1)} psi_T^{-1/(p-1)}
    with C(eps) = (eps p)^{-p'/p}/p', the masked I1 never exceeds
    half_lhs + I11 when eps = 1/2.  The mask restricts to psi_T > 1e-12
    where the negative power is well defined.
    """
    g = params.grid
    d, p = params.d, params.p
    pp = p / (p - 1.0)
    times, fields = u_traj
    times = np.asarray(times, dtype=float)
    phi = spatial_factor(g, T, d, p)
    lap_phi = fractional_laplacian(phi, d)
    weight = radial_weight(g, params.alpha, params.reg_radius)
    hN = g.cell_measure
    c_eps = (eps * p) ** (-pp / p) / pp

    a_t = psi1(times / T) ** pp
    i1_vals = np.zeros_like(times)
    lhs_vals = np.zeros_like(times)
    i11_vals = np.zeros_like(times)
    for i, f in enumerate(fields):
        psi_full = a_t[i] * phi.values
        mask = psi_full > 1e-12
        if not np.any(mask):
            continue
        lap_full = a_t[i] * lap_phi.values
        uu = np.abs(f.values[mask])
        i1_vals[i] = np.sum(uu * np.abs(lap_full[mask])) * hN
        lhs_vals[i] = np.sum(weight.values[mask] * uu**p * psi_full[mask]) * hN
        i11_vals[i] = np.sum(
            np.abs(lap_full[mask]) ** pp
            * weight.values[mask] ** (-1.0 / (p - 1.0))
            * psi_full[mask] ** (-1.0 / (p - 1.0))
        ) * hN
    return (_trapezoid(times, i1_vals),
            eps * _trapezoid(times, lhs_vals),
            c_eps * _trapezoid(times, i11_vals))


def weak_form_gap(u_traj, source_traj, u0: Field, params, T: float) -> float:
    """Residual of the weak identity for a manufactured solution.

    For u with u_t + (-Delta)^d u = g the pairing against psi_T gives
    -int u0 psi_T(.,0) - int int u d/dt(psi_T) + int int u (-Delta)^d psi_T
      = int int g psi_T.
    Returns the relative gap between the two sides (trapezoid in time).
    """
    g_grid = params.grid
    d, p = params.d, params.p
    pp = p / (p - 1.0)
    times, fields = u_traj
    _, sources = source_traj
    times = np.asarray(times, dtype=float)
    phi = spatial_factor(g_grid, T, d, p)
    lap_phi = fractional_laplacian(phi, d)
    hN = g_grid.cell_measure

    a_t = psi1(times / T) ** pp
    da_t = pp * psi1(times / T) ** (pp - 1.0) * psi1_prime(times / T) / T
    da_t = np.nan_to_num(da_t, nan=0.0, posinf=0.0, neginf=0.0)

    u_phi = np.array([float(np.sum(f.values * phi.values)) * hN for f in fields])
    u_lap = np.array([float(np.sum(f.values * lap_phi.values)) * hN for f in fields])
    g_phi = np.array([float(np.sum(s.values * phi.values)) * hN for s in sources])

    init = a_t[0] * float(np.sum(u0.values * phi.values)) * hN
    transport = _trapezoid(times, da_t * u_phi)
    diffusion = _trapezoid(times, a_t * u_lap)
    lhs = -init - transport + diffusion
    rhs = _trapezoid(times, a_t * g_phi)
    # normalize by the largest constituent term, not the residual itself,
    # so a zero-source manufactured solution reports a small gap
    scale = max(abs(init), abs(transport), abs(diffusion), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale
