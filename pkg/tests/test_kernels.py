"""Backend agreement: the compiled kernels and the numpy fallback must
implement identical semantics."""

import numpy as np
import pytest

from ontosim import _kernels_np, kernels


@pytest.fixture(params=[1, 2, 3])
def field_nd(request):
    ndim = request.param
    cells = {1: 64, 2: 32, 3: 16}[ndim]
    rng = np.random.default_rng(5 + ndim)
    shape = (cells,) * ndim
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    pts = rng.uniform(-15.0, 25.0, size=(200, ndim))  # includes out-of-domain wrap
    return values, pts, -10.0, 20.0 / cells


def test_interp_backends_agree_complex(field_nd):
    values, pts, origin, dx = field_nd
    a = kernels.interp_periodic(values, pts, origin, dx)
    b = _kernels_np.interp_periodic(values, pts, origin, dx)
    assert np.max(np.abs(a - b)) < 1e-12


def test_interp_backends_agree_real(field_nd):
    values, pts, origin, dx = field_nd
    a = kernels.interp_periodic(values.real.copy(), pts, origin, dx)
    b = _kernels_np.interp_periodic(values.real.copy(), pts, origin, dx)
    assert np.max(np.abs(a - b)) < 1e-12


def test_velocity_backends_agree(field_nd):
    values, pts, origin, dx = field_nd
    ndim = pts.shape[1]
    rng = np.random.default_rng(99)
    vgrids = rng.standard_normal((ndim,) + values.shape)
    dens = rng.random(values.shape) + 0.01
    va, ra = kernels.velocity_at(vgrids, dens, pts, origin, dx)
    vb, rb = _kernels_np.velocity_at(vgrids, dens, pts, origin, dx)
    assert np.max(np.abs(va - vb)) < 1e-12
    assert np.max(np.abs(ra - rb)) < 1e-12


def test_interp_exact_on_nodes():
    rng = np.random.default_rng(2)
    values = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    origin, dx = -10.0, 20.0 / 32
    idx = rng.integers(0, 32, size=(50, 2))
    pts = origin + dx * idx
    got = kernels.interp_periodic(values, pts, origin, dx)
    assert np.max(np.abs(got - values[idx[:, 0], idx[:, 1]])) < 1e-13


def test_interp_exact_for_linear_fields():
    # multilinear interpolation reproduces per-axis linear functions away
    # from the periodic seam
    cells, origin, dx = 64, 0.0, 1.0 / 64
    x = origin + dx * np.arange(cells)
    values = 3.0 * x
    pts = np.linspace(0.0, 1.0 - dx, 97).reshape(-1, 1)
    got = kernels.interp_periodic(values, pts, origin, dx)
    inside = pts[:, 0] <= 1.0 - dx
    assert np.max(np.abs(got[inside] - 3.0 * pts[inside, 0])) < 1e-12


def test_periodic_wrap_consistency():
    rng = np.random.default_rng(7)
    values = rng.standard_normal(16)
    origin, dx, length = -2.0, 4.0 / 16, 4.0
    pts = rng.uniform(-2.0, 2.0, size=(40, 1))
    a = kernels.interp_periodic(values, pts, origin, dx)
    b = kernels.interp_periodic(values, pts + 3 * length, origin, dx)
    assert np.max(np.abs(a - b)) < 1e-10
