"""Pure-numpy implementations of the hot interpolation kernels.

Semantics match ``_kernels_c`` exactly: periodic multilinear interpolation on
a uniform grid with ``cells`` points per axis, values attached to grid points
``origin + j*dx``. Kept vectorized over query points so the fallback stays
usable for ensemble-sized batches.
"""

from __future__ import annotations

import numpy as np


def _corner_data(pts: np.ndarray, cells: int, origin: float, dx: float):
    s = (pts - origin) / dx
    i0 = np.floor(s)
    frac = s - i0
    i0 = i0.astype(np.intp) % cells
    return i0, frac


def interp_periodic(values: np.ndarray, pts: np.ndarray, origin: float, dx: float) -> np.ndarray:
    """Multilinear periodic interpolation of an N-dim field at query points.

    ``values`` has shape (cells,)*ndim, ``pts`` shape (npts, ndim).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    ndim = values.ndim
    cells = values.shape[0]
    i0, frac = _corner_data(pts, cells, origin, dx)
    out = np.zeros(pts.shape[0], dtype=values.dtype)
    for corner in range(1 << ndim):
        w = np.ones(pts.shape[0])
        idx = []
        for ax in range(ndim):
            hi = (corner >> ax) & 1
            w = w * (frac[:, ax] if hi else 1.0 - frac[:, ax])
            idx.append((i0[:, ax] + hi) % cells)
        out += w * values[tuple(idx)]
    return out


def velocity_at(
    vgrids: np.ndarray,
    dens: np.ndarray,
    pts: np.ndarray,
    origin: float,
    dx: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate per-axis velocity grids and the density grid at query points.

    ``vgrids`` has shape (ndim,) + (cells,)*ndim; returns (velocities (npts,
    ndim), densities (npts,)).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    ndim = dens.ndim
    cells = dens.shape[0]
    i0, frac = _corner_data(pts, cells, origin, dx)
    vel = np.zeros((pts.shape[0], ndim))
    rho = np.zeros(pts.shape[0])
    for corner in range(1 << ndim):
        w = np.ones(pts.shape[0])
        idx = []
        for ax in range(ndim):
            hi = (corner >> ax) & 1
            w = w * (frac[:, ax] if hi else 1.0 - frac[:, ax])
            idx.append((i0[:, ax] + hi) % cells)
        idx = tuple(idx)
        rho += w * dens[idx]
        for ax in range(ndim):
            vel[:, ax] += w * vgrids[ax][idx]
    return vel, rho
