"""Galilean boosts and gauge transformations acting on wave functions,
trajectories, and flash histories.

A boost by velocity v multiplies by the per-axis mass phases
exp((i/hbar) m_i (q_i v - v^2 t / 2)) and shifts the argument by v t. The
shift is spectral (a Fourier phase ramp), exact for band-limited fields at
any real v t; the q-dependent phase ramp must respect the periodic topology,
which quantizes m_i v / hbar (and the gauge slope e_k f') to the reciprocal
lattice. Construction rejects incommensurate parameters instead of silently
leaving the representable space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bohm import Trajectory
from .dynamics import HamiltonianSpec
from .grids import ComplexField, norm
from .grw import Flash, FlashHistory, _sqrt_collapse_weights

__all__ = [
    "BoostSpec",
    "boost_wavefunction",
    "boost_commutation_defect",
    "boost_flashes",
    "boost_trajectory",
    "gauge_transform",
]


@dataclass(frozen=True)
class BoostSpec:
    v: float


def _require_commensurate(ramp_wavenumber: float, grid_length: float, what: str) -> None:
    cycles = ramp_wavenumber * grid_length / (2.0 * np.pi)
    if abs(cycles - round(cycles)) > 1e-9:
        raise ValueError(
            f"{what} phase ramp is not periodic on the grid "
            f"(needs an integer number of cycles per period, got {cycles!r})"
        )


def boost_wavefunction(
    psi: ComplexField, v: float, t: float, h: HamiltonianSpec
) -> ComplexField:
    """Galilean-boosted wave function at time ``t``.

    Requires m_i v / hbar on the reciprocal lattice so the mass phases stay
    single-valued on the periodic domain.
    """
    g = psi.grid
    for ax in range(g.n_particles):
        _require_commensurate(h.masses[ax] * v / h.hbar, g.length, f"boost (axis {ax + 1})")
    out = psi.values
    if v * t != 0.0:
        k = g.wavenumbers()
        out_k = np.fft.fftn(out)
        for ax in range(g.n_particles):
            shape = [1] * g.n_particles
            shape[ax] = g.cells
            out_k = out_k * np.exp(-1j * k * v * t).reshape(shape)
        out = np.fft.ifftn(out_k)
    coords = g.axis_coords()
    for ax in range(g.n_particles):
        shape = [1] * g.n_particles
        shape[ax] = g.cells
        phase = np.exp(1j / h.hbar * h.masses[ax] * (coords * v - 0.5 * v**2 * t))
        out = out * phase.reshape(shape)
    return psi.with_values(out)


def boost_commutation_defect(
    phi: ComplexField,
    v: float,
    t: float,
    x: float,
    label: int,
    sigma: float,
    h: HamiltonianSpec,
) -> float:
    """Norm of [collapse-sqrt at x+vt] G_t phi - G_t [collapse-sqrt at x] phi."""
    boosted = boost_wavefunction(phi, v, t, h)
    lhs = boosted.with_values(
        boosted.values * _sqrt_collapse_weights(boosted, label, x + v * t, sigma)
    )
    hit = phi.with_values(phi.values * _sqrt_collapse_weights(phi, label, x, sigma))
    rhs = boost_wavefunction(hit, v, t, h)
    return norm(lhs.with_values(lhs.values - rhs.values))


def boost_flashes(fh: FlashHistory, v: float) -> FlashHistory:
    """Shift every flash by v*t; times and labels unchanged."""
    return FlashHistory(tuple(Flash(f.t, f.x + v * f.t, f.label) for f in fh))


def boost_trajectory(tr: Trajectory, v: float) -> Trajectory:
    return Trajectory(tr.times, tr.configs + v * tr.times[:, None])


def gauge_transform(
    psi: ComplexField, f_slope: float, h: HamiltonianSpec
) -> tuple[ComplexField, HamiltonianSpec]:
    """Gauge transformation with linear gauge function f(q) = f_slope * q.

    Returns the re-phased field exp(i sum_k e_k f(q_k)) psi together with the
    Hamiltonian whose vector potential is shifted by the constant gradient
    f_slope. |psi| is unchanged pointwise; trajectories and flash laws are
    unchanged altogether.
    """
    g = psi.grid
    for ax in range(g.n_particles):
        _require_commensurate(h.charge(ax) * f_slope, g.length, f"gauge (axis {ax + 1})")
    coords = g.axis_coords()
    out = psi.values
    for ax in range(g.n_particles):
        shape = [1] * g.n_particles
        shape[ax] = g.cells
        out = out * np.exp(1j * h.charge(ax) * f_slope * coords).reshape(shape)
    base_a = h.vector_potential or tuple(0.0 for _ in h.masses)
    new_h = HamiltonianSpec(
        masses=h.masses,
        hbar=h.hbar,
        potential=h.potential,
        vector_potential=tuple(a + f_slope for a in base_a),
        charges=h.charges,
    )
    return psi.with_values(out), new_h
