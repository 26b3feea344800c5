"""Built-in experiment presets: grid, initial state, Hamiltonian, collapse
constants, and (where meaningful) a two-region readout.

All presets use dimensionless units with hbar = 1. The cat preset puts its
bumps five collapse widths from the center so that a single resolving
collapse suppresses the far branch below 1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DoubleWellPotential,
    FreePotential,
    HamiltonianSpec,
    HarmonicPotential,
)
from .grids import ComplexField, GridSpec, normalize
from .grw import TheoryParams
from .ontology import ReadoutSpec

__all__ = ["Preset", "build_preset", "PRESET_NAMES", "gaussian_packet"]


@dataclass(frozen=True)
class Preset:
    name: str
    grid: GridSpec
    psi0: ComplexField
    hamiltonian: HamiltonianSpec
    params: TheoryParams
    t_max: float
    readout: ReadoutSpec | None = None


def gaussian_packet(
    grid: GridSpec, center: float, width: float, momentum: float = 0.0
) -> np.ndarray:
    """Unnormalized Gaussian bump exp(-(x-c)^2/(4 w^2) + i k x) with the
    minimal-image distance (w is the standard deviation of |psi|^2)."""
    x = grid.axis_coords()
    d = np.mod(x - center + grid.length / 2, grid.length) - grid.length / 2
    return np.exp(-(d**2) / (4.0 * width**2) + 1j * momentum * x)


def _free_packet() -> Preset:
    grid = GridSpec(1, 64, 20.0, -10.0)
    k0 = 2.0 * np.pi * 2 / grid.length  # lattice-commensurate drift
    psi0 = normalize(ComplexField(grid, gaussian_packet(grid, -2.0, 1.0, k0)))
    h = HamiltonianSpec(masses=(1.0,), potential=FreePotential())
    return Preset("free_packet", grid, psi0, h, TheoryParams(1.0, 0.8), t_max=4.0)


def _cat() -> Preset:
    grid = GridSpec(1, 64, 20.0, -10.0)
    sigma = 0.8
    sep = 5.0 * sigma  # bumps at +/- 5 sigma
    vals = gaussian_packet(grid, sep, 0.5) + gaussian_packet(grid, -sep, 0.5)
    psi0 = normalize(ComplexField(grid, vals))
    # heavy pointer: collapses barely move it, so readouts stay decisive
    h = HamiltonianSpec(masses=(16.0,), potential=FreePotential())
    readout = ReadoutSpec(
        regions=(("A", 0.0, 10.0), ("B", -10.0, 0.0)),
        window=(1.0, 4.0),
    )
    return Preset("cat", grid, psi0, h, TheoryParams(2.0, sigma), t_max=4.0, readout=readout)


def _harmonic() -> Preset:
    grid = GridSpec(1, 64, 20.0, -10.0)
    h = HamiltonianSpec(masses=(1.0,), potential=HarmonicPotential(omegas=(1.0,), centers=(0.0,)))
    # coherent state: displaced ground state
    psi0 = normalize(ComplexField(grid, gaussian_packet(grid, 1.5, np.sqrt(0.5))))
    return Preset("harmonic", grid, psi0, h, TheoryParams(1.0, 0.8), t_max=4.0)


def _double_well() -> Preset:
    grid = GridSpec(1, 64, 20.0, -10.0)
    pot = DoubleWellPotential(height=2.0, separation=10.0)
    h = HamiltonianSpec(masses=(1.0,), potential=pot)
    psi0 = normalize(ComplexField(grid, gaussian_packet(grid, -9.0, 1.0)))
    return Preset("double_well", grid, psi0, h, TheoryParams(1.0, 0.8), t_max=4.0)


def _entangled_pair() -> Preset:
    grid = GridSpec(2, 32, 20.0, -10.0)
    x = grid.axis_coords()
    q1 = x[:, None]
    q2 = x[None, :]
    rel = np.mod(q1 - q2 + grid.length / 2, grid.length) - grid.length / 2
    com = np.mod(q1 + q2 + grid.length / 2, grid.length) - grid.length / 2
    vals = np.exp(-(rel**2) / (4.0 * 1.0**2) - (com**2) / (4.0 * 2.0**2))
    psi0 = normalize(ComplexField(grid, vals))
    h = HamiltonianSpec(masses=(1.0, 1.0), potential=FreePotential())
    return Preset("entangled_pair", grid, psi0, h, TheoryParams(1.0, 1.2), t_max=2.0)


_BUILDERS = {
    "free_packet": _free_packet,
    "cat": _cat,
    "harmonic": _harmonic,
    "double_well": _double_well,
    "entangled_pair": _entangled_pair,
}

PRESET_NAMES = tuple(sorted(_BUILDERS))


def build_preset(name: str) -> Preset:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    return builder()
