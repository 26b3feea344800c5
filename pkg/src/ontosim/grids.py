"""Configuration-space grids, fields, spectral utilities, and density sampling.

Conventions used throughout the package:

* physical space is one-dimensional and periodic with period ``length``;
  configuration space for ``n_particles`` particles is the n-fold product,
  discretized on a uniform grid of ``cells`` points per axis;
* field values live on grid points ``x_j = origin + j*dx``; each point is the
  center of a cell ``[x_j - dx/2, x_j + dx/2)`` and integrals are Riemann sums
  with weight ``dx**n``;
* Gaussians are wrapped around the period (images summed until the tail is
  below 1e-14) so that smoothing and collapse kernels are exactly compatible
  with spectral propagation.

All containers are immutable after construction; functions here are pure and
safe to call from concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "ComplexField",
    "RealField1D",
    "marginal",
    "gaussian_smooth",
    "sample_density",
    "inner",
    "norm",
    "normalize",
    "wrapped_gaussian",
    "density_cdf",
]

_MAX_PARTICLES = 4
_TAIL = 1e-14


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid for an N-particle configuration space.

    ``cells`` is the number of points per axis (a power of two, so spectral
    transforms stay fast and exact), ``length`` the period of each axis in
    simulation units, ``origin`` the coordinate of grid point 0.
    """

    n_particles: int
    cells: int
    length: float
    origin: float = 0.0

    def __post_init__(self):
        if not 1 <= self.n_particles <= _MAX_PARTICLES:
            raise ValueError(f"n_particles must be in 1..{_MAX_PARTICLES}, got {self.n_particles}")
        if self.cells < 1 or (self.cells & (self.cells - 1)) != 0:
            raise ValueError(f"cells must be a positive power of two, got {self.cells}")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.n_particles

    @property
    def size(self) -> int:
        return self.cells**self.n_particles

    def axis_coords(self) -> np.ndarray:
        """Grid-point coordinates along one axis."""
        return self.origin + self.dx * np.arange(self.cells)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers along one axis, FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.cells, d=self.dx)

    def wrap(self, x):
        """Map positions into [origin, origin + length)."""
        return self.origin + np.mod(np.asarray(x) - self.origin, self.length)


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitude field on the full configuration-space grid."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("field values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, values)


@dataclass(frozen=True)
class RealField1D:
    """Nonnegative density on a single periodic axis.

    ``declared_total`` (when given) states what the Riemann sum dx*sum(values)
    is supposed to be; construction checks it to 1e-9.
    """

    cells: int
    length: float
    values: np.ndarray = field(repr=False)
    origin: float = 0.0
    declared_total: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.cells,):
            raise ValueError(f"expected {self.cells} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if np.any(v < -1e-12 * max(1.0, float(np.max(np.abs(v), initial=0.0)))):
            raise ValueError("density values must be nonnegative")
        v = np.maximum(v, 0.0)
        if self.declared_total is not None:
            total = float(np.sum(v)) * self.dx
            if abs(total - self.declared_total) > 1e-9 * max(1.0, abs(self.declared_total)):
                raise ValueError(
                    f"density integrates to {total!r}, declared {self.declared_total!r}"
                )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def total(self) -> float:
        return float(np.sum(self.values)) * self.dx

    def axis_coords(self) -> np.ndarray:
        return self.origin + self.dx * np.arange(self.cells)


def _check_same_grid(a: ComplexField, b: ComplexField) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def inner(a: ComplexField, b: ComplexField) -> complex:
    """Sesquilinear inner product <a|b> with the dx^n Riemann weight."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.values, b.values)) * a.grid.dx**a.grid.n_particles


def norm(a: ComplexField) -> float:
    return float(np.sqrt(np.real(inner(a, a))))


def normalize(a: ComplexField) -> ComplexField:
    n = norm(a)
    if n <= 0.0 or not np.isfinite(n):
        raise ValueError("cannot normalize a zero field")
    return a.with_values(a.values / n)


def marginal(psi: ComplexField, axis: int, *, _tol: float = 1e-8) -> RealField1D:
    """Single-axis marginal of |psi|^2 (axes are 1-based, as particle labels).

    The input must already be normalized to 1 within 1e-8; an unnormalized
    field is reported, never silently rescaled.
    """
    g = psi.grid
    if not 1 <= axis <= g.n_particles:
        raise ValueError(f"axis must be in 1..{g.n_particles}, got {axis}")
    total = float(np.sum(np.abs(psi.values) ** 2)) * g.dx**g.n_particles
    if abs(total - 1.0) > _tol:
        raise ValueError(f"marginal requires a normalized field, |psi|^2 integrates to {total!r}")
    dens = np.abs(psi.values) ** 2
    other = tuple(ax for ax in range(g.n_particles) if ax != axis - 1)
    vals = np.sum(dens, axis=other) * g.dx ** (g.n_particles - 1)
    return RealField1D(g.cells, g.length, vals, origin=g.origin, declared_total=1.0)


def _n_images(sigma: float, length: float) -> int:
    # enough periodic images that the neglected tail is below _TAIL of the peak
    reach = sigma * np.sqrt(-2.0 * np.log(_TAIL))
    return int(np.ceil((reach + length) / length))


def wrapped_gaussian(points: np.ndarray, center: float, sigma: float, length: float) -> np.ndarray:
    """Periodized normal density of standard deviation sigma, centered at ``center``.

    Normalized so the continuum integral over one period equals 1.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    pts = np.asarray(points, dtype=np.float64)
    d = np.mod(pts - center, length)
    n = _n_images(sigma, length)
    shifts = length * np.arange(-n, n + 1)
    z = (d[..., None] + shifts) / sigma
    out = np.sum(np.exp(-0.5 * z**2), axis=-1)
    out /= np.sqrt(2.0 * np.pi) * sigma
    return out


def _smoothing_kernel(cells: int, dx: float, sigma: float) -> np.ndarray:
    """Wrapped Gaussian sampled on lattice offsets, renormalized so that the
    discrete Riemann sum is exactly 1 (mass preservation under convolution)."""
    offsets = dx * np.arange(cells)
    kern = wrapped_gaussian(offsets, 0.0, sigma, cells * dx)
    kern = kern / (np.sum(kern) * dx)
    return kern


def gaussian_smooth(f: RealField1D, sigma: float) -> RealField1D:
    """Periodic convolution of ``f`` with the normalized wrapped Gaussian."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    kern = _smoothing_kernel(f.cells, f.dx, sigma)
    out = np.fft.irfft(np.fft.rfft(f.values) * np.fft.rfft(kern), n=f.cells) * f.dx
    # convolution of nonnegative sequences; clip the rounding dust
    out = np.maximum(out, 0.0)
    return RealField1D(f.cells, f.length, out, origin=f.origin,
                       declared_total=f.declared_total)


def sample_density(f: RealField1D, rng: np.random.Generator, size: int | None = None):
    """Inverse-CDF sample(s) from a gridded density.

    The density is piecewise constant on cells centered at the grid points,
    so one uniform variate per sample fixes both the cell and the position
    inside it. Output positions lie in [origin, origin + length).
    """
    cum = np.cumsum(f.values)
    total = cum[-1]
    if not total > 0.0:
        raise ValueError("cannot sample from an all-zero density")
    u = rng.random(size)
    scaled = np.asarray(u) * total
    idx = np.searchsorted(cum, scaled, side="right")
    idx = np.minimum(idx, f.cells - 1)
    prev = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    frac = (scaled - prev) / f.values[idx]
    pos = f.origin + (idx + frac - 0.5) * f.dx
    pos = f.origin + np.mod(pos - f.origin, f.length)
    if size is None:
        return float(pos)
    return pos


def density_cdf(f: RealField1D, x) -> np.ndarray:
    """CDF of the piecewise-constant cell density at positions ``x`` in the domain."""
    cum = np.concatenate([[0.0], np.cumsum(f.values)]) * f.dx
    total = cum[-1]
    if not total > 0.0:
        raise ValueError("zero-mass density has no CDF")
    # contiguous frame: u in [0, L) with cell j occupying [j*dx, (j+1)*dx)
    u = np.mod(np.asarray(x, dtype=np.float64) - f.origin + 0.5 * f.dx, f.length)
    j = np.minimum((u // f.dx).astype(np.intp), f.cells - 1)
    frame = cum[j] + f.values[j] * (u - j * f.dx)
    out = np.mod(frame - f.values[0] * 0.5 * f.dx, total)
    # x at the right edge of the domain must give the full mass, not wrap to 0
    right_edge = np.isclose(np.mod(np.asarray(x) - f.origin, f.length), 0.0) & (
        np.asarray(x) > f.origin
    )
    out = np.where(right_edge, total, out)
    return out / total


def mixture_density(fields: Sequence[RealField1D], weights: Sequence[float]) -> RealField1D:
    """Convex mixture of densities on a common axis grid."""
    if not fields:
        raise ValueError("empty mixture")
    base = fields[0]
    vals = np.zeros(base.cells)
    for fld, w in zip(fields, weights, strict=True):
        if (fld.cells, fld.length, fld.origin) != (base.cells, base.length, base.origin):
            raise ValueError("mixture components live on different grids")
        vals += w * fld.values
    return RealField1D(base.cells, base.length, vals, origin=base.origin)
