"""Periodic-box discretization and spectral multiplier operators.

The simulation domain is the box [-L, L)^N with an even number of points
per axis.  All linear operators (the fractional/polyharmonic Laplacian,
the heat-type semigroup and its weighted variant) act as real radial
Fourier multipliers on this box, so round trips and semigroup
compositions are exact to machine precision.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

# Hard cap on the total number of grid points (memory budget).
MAX_TOTAL_POINTS = 2**24


class GridError(ValueError):
    """Invalid grid construction parameters."""


class OddResolution(GridError):
    """points_per_axis must be even."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L)^N."""

    dim: int
    half_width: float
    points_per_axis: int

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def cell_measure(self) -> float:
        return self.spacing**self.dim

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def total_points(self) -> int:
        return self.points_per_axis**self.dim

    def axis_coords(self) -> np.ndarray:
        """Physical coordinates along one axis: -L + i*h."""
        return -self.half_width + self.spacing * np.arange(self.points_per_axis)

    def axis_wavenumbers(self) -> np.ndarray:
        """Wavenumbers along one axis: integer multiples of pi/L."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    def coords(self) -> list:
        return list(np.meshgrid(*([self.axis_coords()] * self.dim), indexing="ij"))

    def radius(self) -> np.ndarray:
        return _radius(self)

    def wavenumber_norm(self) -> np.ndarray:
        return _wavenumber_norm(self)


@functools.lru_cache(maxsize=64)
def _radius(grid: GridSpec) -> np.ndarray:
    x = grid.axis_coords()
    r2 = np.zeros(grid.shape)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = grid.points_per_axis
        r2 = r2 + x.reshape(shape) ** 2
    r = np.sqrt(r2)
    r.setflags(write=False)
    return r


@functools.lru_cache(maxsize=64)
def _wavenumber_norm(grid: GridSpec) -> np.ndarray:
    k = grid.axis_wavenumbers()
    k2 = np.zeros(grid.shape)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = grid.points_per_axis
        k2 = k2 + k.reshape(shape) ** 2
    kn = np.sqrt(k2)
    kn.setflags(write=False)
    return kn


def make_grid(dim: int, half_width: float, points_per_axis: int) -> GridSpec:
    """Build and validate a periodic grid."""
    if dim not in (1, 2, 3):
        raise GridError(f"dim must be 1, 2 or 3, got {dim}")
    if half_width <= 0:
        raise GridError(f"half_width must be positive, got {half_width}")
    if points_per_axis % 2 != 0:
        raise OddResolution(f"points_per_axis must be even, got {points_per_axis}")
    if points_per_axis < 8:
        raise GridError(f"points_per_axis must be >= 8, got {points_per_axis}")
    if points_per_axis**dim > MAX_TOTAL_POINTS:
        raise GridError(
            f"grid with {points_per_axis}^{dim} points exceeds the memory budget"
        )
    return GridSpec(dim, float(half_width), points_per_axis)


class Field:
    """Real scalar function sampled on a grid, with cached spectral data.

    Treated as an immutable value: operations return new fields and never
    modify their inputs.  Non-finite samples are a detectable poisoned
    state (``is_finite``) that propagates through arithmetic.
    """

    __slots__ = ("grid", "values", "_spectral")

    def __init__(self, grid: GridSpec, values: np.ndarray, _spectral=None):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self._spectral = _spectral

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            self._spectral = np.fft.fftn(self.values)
            self._spectral.setflags(write=False)
        return self._spectral

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_measure)

    # arithmetic (element-wise, same grid)
    def _binary(self, other, op):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            other = other.values
        return Field(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


def constant_field(grid: GridSpec, value: float) -> Field:
    return Field(grid, np.full(grid.shape, float(value)))


def spike_field(grid: GridSpec, normalized: bool = True) -> Field:
    """Single-cell spike at x = 0 (grid index n/2 along each axis).

    With ``normalized`` the spike has unit grid integral (a discrete
    Dirac mass); otherwise its height is 1.
    """
    v = np.zeros(grid.shape)
    center = (grid.points_per_axis // 2,) * grid.dim
    v[center] = 1.0 / grid.cell_measure if normalized else 1.0
    return Field(grid, v)


def from_function(grid: GridSpec, fn) -> Field:
    """Sample ``fn(x1, ..., xN)`` (vectorized) on the grid."""
    return Field(grid, np.asarray(fn(*grid.coords()), dtype=float))


def apply_multiplier(f: Field, multiplier: np.ndarray) -> Field:
    """Apply a real Fourier multiplier; result is real by symmetry."""
    out = np.fft.ifftn(multiplier * f.spectral)
    return Field(f.grid, out.real)


def fractional_laplacian(f: Field, d: float) -> Field:
    """(-Delta)^d via the |xi|^(2d) multiplier; the zero mode maps to 0."""
    if d <= 0:
        raise ValueError(f"d must be positive, got {d}")
    return apply_multiplier(f, f.grid.wavenumber_norm() ** (2.0 * d))


@functools.lru_cache(maxsize=256)
def _semigroup_multiplier(grid: GridSpec, d: float, t: float) -> np.ndarray:
    m = np.exp(-t * grid.wavenumber_norm() ** (2.0 * d))
    m.setflags(write=False)
    return m


def semigroup_apply(f: Field, d: float, t: float) -> Field:
    """Apply e^{-t(-Delta)^d}.  t = 0 is the identity; the mean is conserved."""
    if d <= 0:
        raise ValueError(f"d must be positive, got {d}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0:
        return f
    return apply_multiplier(f, _semigroup_multiplier(f.grid, float(d), float(t)))


def radial_weight(grid: GridSpec, alpha: float, reg_radius: float | None = None) -> Field:
    """|x|^alpha with the singularity capped at reg_radius (default h/2)."""
    if reg_radius is None:
        reg_radius = grid.spacing / 2.0
    if reg_radius <= 0:
        raise ValueError(f"reg_radius must be positive, got {reg_radius}")
    if alpha == 0:
        return constant_field(grid, 1.0)
    r = np.maximum(grid.radius(), reg_radius)
    return Field(grid, r**alpha)


def weighted_semigroup_apply(
    f: Field, d: float, a: float, t: float, reg_radius: float | None = None
) -> Field:
    """e^{-t(-Delta)^d} |x|^{-a} f for a in (0, N), t > 0."""
    if not 0 < a < f.grid.dim:
        raise ValueError(f"a must lie in (0, N={f.grid.dim}), got {a}")
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    return semigroup_apply(radial_weight(f.grid, -a, reg_radius) * f, d, t)


def _loglog_slope(ts, vals) -> float:
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(vals, dtype=float)
    return float(np.polyfit(np.log(ts), np.log(vals), 1)[0])


def smoothing_slope(grid: GridSpec, d: float, t0: float, n_samples: int = 9) -> float:
    """Measured log-log slope of sup|S(t) spike| over t in [t0, 4 t0].

    For a single-cell spike the sup norm decays like t^{-N/(2d)}.
    """
    spike = spike_field(grid, normalized=True)
    ts = np.geomspace(t0, 4.0 * t0, n_samples)
    sups = [semigroup_apply(spike, d, t).sup() for t in ts]
    return _loglog_slope(ts, sups)


def weighted_decay_slope(
    grid: GridSpec,
    d: float,
    a: float,
    ts,
    bump_width: float = 1.0,
) -> float:
    """Measured decay slope of the weighted semigroup operator norm (L^1 -> sup).

    The input tracking the operator norm at time t is the self-similarly
    rescaled, L^1-normalized bump f_t(x) = t^{-N/2d} phi(t^{-1/2d} x); by
    homogeneity of |x|^{-a} the sup norm then decays with the exact
    exponent -N/(2d) - a/(2d).
    """
    r = grid.radius()
    N = grid.dim
    sups = []
    for t in ts:
        scale = t ** (1.0 / (2.0 * d))
        bump = Field(grid, np.exp(-((r / (bump_width * scale)) ** 2)) / scale**N)
        sups.append(weighted_semigroup_apply(bump, d, a, t).sup())
    return _loglog_slope(ts, sups)
