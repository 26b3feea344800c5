# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpolation kernels: periodic multilinear field and velocity
lookups, the innermost operations of trajectory integration.

Semantics are identical to ``_kernels_np``; the selector in
``ontosim.kernels`` picks whichever is importable.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.complex128_t c128


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t cells) nogil:
    i = i % cells
    if i < 0:
        i += cells
    return i


cdef inline void _locate(const f64[:, ::1] pts, Py_ssize_t p, Py_ssize_t ndim,
                         double origin, double dx, Py_ssize_t cells,
                         Py_ssize_t* base, double* frac) nogil:
    cdef Py_ssize_t ax
    cdef double s
    cdef Py_ssize_t i
    for ax in range(ndim):
        s = (pts[p, ax] - origin) / dx
        i = <Py_ssize_t>s
        if s < i:
            i -= 1
        frac[ax] = s - i
        base[ax] = _wrap(i, cells)


def interp_periodic(values, pts, double origin, double dx):
    """Multilinear periodic interpolation of an N-dim field at query points."""
    values = np.ascontiguousarray(values)
    pts_arr = np.ascontiguousarray(pts, dtype=np.float64)
    if pts_arr.ndim == 1:
        pts_arr = pts_arr.reshape(1, -1)
    if np.iscomplexobj(values):
        return _interp_c128(values.astype(np.complex128, copy=False), pts_arr, origin, dx)
    return _interp_f64(values.astype(np.float64, copy=False), pts_arr, origin, dx)


cdef _interp_c128(cnp.ndarray values, cnp.ndarray pts_arr, double origin, double dx):
    cdef Py_ssize_t ndim = values.ndim
    cdef Py_ssize_t cells = values.shape[0]
    cdef const c128[::1] flat = values.reshape(-1)
    cdef const f64[:, ::1] pts = pts_arr
    cdef Py_ssize_t npts = pts.shape[0]
    out_arr = np.empty(npts, dtype=np.complex128)
    cdef c128[::1] out = out_arr
    cdef Py_ssize_t[4] base
    cdef double[4] frac
    cdef Py_ssize_t[4] stride
    cdef Py_ssize_t p, ax, corner, idx, ncorner = 1 << ndim
    cdef double w
    cdef c128 acc
    stride[ndim - 1] = 1
    for ax in range(ndim - 2, -1, -1):
        stride[ax] = stride[ax + 1] * cells
    for p in range(npts):
        _locate(pts, p, ndim, origin, dx, cells, base, frac)
        acc = 0
        for corner in range(ncorner):
            w = 1.0
            idx = 0
            for ax in range(ndim):
                if (corner >> ax) & 1:
                    w *= frac[ax]
                    idx += _wrap(base[ax] + 1, cells) * stride[ax]
                else:
                    w *= 1.0 - frac[ax]
                    idx += base[ax] * stride[ax]
            acc = acc + w * flat[idx]
        out[p] = acc
    return out_arr


cdef _interp_f64(cnp.ndarray values, cnp.ndarray pts_arr, double origin, double dx):
    cdef Py_ssize_t ndim = values.ndim
    cdef Py_ssize_t cells = values.shape[0]
    cdef const f64[::1] flat = values.reshape(-1)
    cdef const f64[:, ::1] pts = pts_arr
    cdef Py_ssize_t npts = pts.shape[0]
    out_arr = np.empty(npts, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef Py_ssize_t[4] base
    cdef double[4] frac
    cdef Py_ssize_t[4] stride
    cdef Py_ssize_t p, ax, corner, idx, ncorner = 1 << ndim
    cdef double w, acc
    stride[ndim - 1] = 1
    for ax in range(ndim - 2, -1, -1):
        stride[ax] = stride[ax + 1] * cells
    for p in range(npts):
        _locate(pts, p, ndim, origin, dx, cells, base, frac)
        acc = 0.0
        for corner in range(ncorner):
            w = 1.0
            idx = 0
            for ax in range(ndim):
                if (corner >> ax) & 1:
                    w *= frac[ax]
                    idx += _wrap(base[ax] + 1, cells) * stride[ax]
                else:
                    w *= 1.0 - frac[ax]
                    idx += base[ax] * stride[ax]
            acc += w * flat[idx]
        out[p] = acc
    return out_arr


def velocity_at(vgrids, dens, pts, double origin, double dx):
    """Fused interpolation of per-axis velocity grids plus the density grid.

    Returns (velocities (npts, ndim), densities (npts,)).
    """
    cdef cnp.ndarray d_arr = np.ascontiguousarray(dens, dtype=np.float64)
    cdef Py_ssize_t ndim = d_arr.ndim
    cdef Py_ssize_t cells = d_arr.shape[0]
    cdef cnp.ndarray v_arr = np.ascontiguousarray(vgrids, dtype=np.float64).reshape(ndim, -1)
    cdef const f64[:, ::1] vflat = v_arr
    cdef const f64[::1] dflat = d_arr.reshape(-1)
    cdef cnp.ndarray pts_arr = np.ascontiguousarray(pts, dtype=np.float64)
    if pts_arr.ndim == 1:
        pts_arr = pts_arr.reshape(1, -1)
    cdef const f64[:, ::1] p_mv = pts_arr
    cdef Py_ssize_t npts = p_mv.shape[0]
    vel_arr = np.zeros((npts, ndim), dtype=np.float64)
    rho_arr = np.zeros(npts, dtype=np.float64)
    cdef f64[:, ::1] vel = vel_arr
    cdef f64[::1] rho = rho_arr
    cdef Py_ssize_t[4] base
    cdef double[4] frac
    cdef Py_ssize_t[4] stride
    cdef Py_ssize_t p, ax, corner, idx, ncorner = 1 << ndim
    cdef double w
    stride[ndim - 1] = 1
    for ax in range(ndim - 2, -1, -1):
        stride[ax] = stride[ax + 1] * cells
    for p in range(npts):
        _locate(p_mv, p, ndim, origin, dx, cells, base, frac)
        for corner in range(ncorner):
            w = 1.0
            idx = 0
            for ax in range(ndim):
                if (corner >> ax) & 1:
                    w *= frac[ax]
                    idx += _wrap(base[ax] + 1, cells) * stride[ax]
                else:
                    w *= 1.0 - frac[ax]
                    idx += base[ax] * stride[ax]
            rho[p] += w * dflat[idx]
            for ax in range(ndim):
                vel[p, ax] += w * vflat[ax, idx]
    return vel_arr, rho_arr
