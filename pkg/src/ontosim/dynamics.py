"""Hamiltonians and unitary propagation.

Propagation is second-order Strang split-step with the kinetic factor applied
exactly in momentum space, so the norm is preserved to rounding and a free
Hamiltonian is propagated exactly for any step size. A constant per-axis
vector potential enters through the minimal-coupling shift of the kinetic
factor. Noninteracting Hamiltonians additionally support multi-time
propagation (a separate duration along each configuration axis), which the
flash theories built on multi-time wave functions need.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grids import ComplexField, GridSpec

__all__ = [
    "FreePotential",
    "HarmonicPotential",
    "DoubleWellPotential",
    "TabulatedPotential",
    "HamiltonianSpec",
    "evolve",
    "multi_time_evolve",
    "expected_energy",
    "recommended_step",
    "WavePath",
    "DensePropagator",
]


@dataclass(frozen=True)
class FreePotential:
    kind: str = "free"

    def axis_values(self, grid: GridSpec, axis: int) -> np.ndarray:
        return np.zeros(grid.cells)

    separable = True


@dataclass(frozen=True)
class HarmonicPotential:
    """Per-axis harmonic wells 0.5*m*omega^2*(q-center)^2 with the periodic
    minimal-image distance."""

    omegas: tuple[float, ...]
    centers: tuple[float, ...] | None = None
    kind: str = "harmonic"
    separable = True

    def axis_values(self, grid: GridSpec, axis: int, mass: float = 1.0) -> np.ndarray:
        q = grid.axis_coords()
        c = self.centers[axis] if self.centers is not None else grid.origin + grid.length / 2
        d = np.mod(q - c + grid.length / 2, grid.length) - grid.length / 2
        return 0.5 * mass * self.omegas[axis] ** 2 * d**2


@dataclass(frozen=True)
class DoubleWellPotential:
    """Periodic multi-well potential 0.5*height*(1 - cos(2*pi*n*(q-origin)/L)).

    ``separation`` fixes the well spacing L/n (rounded to the nearest integer
    number of wells, at least two); ``height`` is the barrier height.
    """

    height: float
    separation: float
    kind: str = "double_well"
    separable = True

    def n_wells(self, grid: GridSpec) -> int:
        return max(2, int(round(grid.length / self.separation)))

    def axis_values(self, grid: GridSpec, axis: int) -> np.ndarray:
        q = grid.axis_coords() - grid.origin
        n = self.n_wells(grid)
        return 0.5 * self.height * (1.0 - np.cos(2.0 * np.pi * n * q / grid.length))


@dataclass(frozen=True)
class TabulatedPotential:
    """Arbitrary real potential on the full configuration grid; separable only
    for a single particle."""

    values: np.ndarray = field(repr=False)
    kind: str = "tabulated"
    separable = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("tabulated potential must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


Potential = FreePotential | HarmonicPotential | DoubleWellPotential | TabulatedPotential


@dataclass(frozen=True)
class HamiltonianSpec:
    """Masses, potential, and optional constant vector potential / charges."""

    masses: tuple[float, ...]
    hbar: float = 1.0
    potential: Potential = FreePotential()
    vector_potential: tuple[float, ...] | None = None
    charges: tuple[float, ...] | None = None

    def __post_init__(self):
        if any(m <= 0 for m in self.masses):
            raise ValueError("masses must be positive")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        for name in ("vector_potential", "charges"):
            v = getattr(self, name)
            if v is not None and len(v) != len(self.masses):
                raise ValueError(f"{name} must have one entry per particle")

    @property
    def n_particles(self) -> int:
        return len(self.masses)

    def charge(self, axis: int) -> float:
        return self.charges[axis] if self.charges is not None else 1.0

    def axis_momentum_shift(self, axis: int) -> float:
        """Minimal-coupling shift e_k*A_k of the wavenumber along one axis."""
        if self.vector_potential is None:
            return 0.0
        return self.charge(axis) * self.vector_potential[axis]

    def is_noninteracting(self, grid: GridSpec) -> bool:
        if self.potential.separable:
            return True
        return grid.n_particles == 1

    def axis_potential(self, grid: GridSpec, axis: int) -> np.ndarray:
        """Single-axis potential term V_i(q_i) for separable Hamiltonians."""
        pot = self.potential
        if isinstance(pot, HarmonicPotential):
            return pot.axis_values(grid, axis, mass=self.masses[axis])
        if isinstance(pot, TabulatedPotential):
            if grid.n_particles != 1:
                raise ValueError("tabulated potential is not separable for N > 1")
            return pot.values
        return pot.axis_values(grid, axis)

    def potential_grid(self, grid: GridSpec) -> np.ndarray:
        """Full potential on the configuration grid, V = sum_i V_i for the
        separable families."""
        if grid.n_particles != self.n_particles:
            raise ValueError("grid particle count does not match Hamiltonian")
        pot = self.potential
        if isinstance(pot, TabulatedPotential):
            if pot.values.shape != grid.shape:
                raise ValueError("tabulated potential shape does not match grid")
            return pot.values
        out = np.zeros(grid.shape)
        for ax in range(grid.n_particles):
            col = self.axis_potential(grid, ax)
            shape = [1] * grid.n_particles
            shape[ax] = grid.cells
            out = out + col.reshape(shape)
        return out

    def digest(self) -> str:
        """Short stable digest for run records."""
        import hashlib

        pot = self.potential
        desc: dict = {"kind": pot.kind}
        if isinstance(pot, HarmonicPotential):
            desc["omegas"] = list(pot.omegas)
            desc["centers"] = list(pot.centers) if pot.centers else None
        elif isinstance(pot, DoubleWellPotential):
            desc["height"] = pot.height
            desc["separation"] = pot.separation
        elif isinstance(pot, TabulatedPotential):
            desc["sha"] = hashlib.sha256(pot.values.tobytes()).hexdigest()[:12]
        payload = {
            "masses": list(self.masses),
            "hbar": self.hbar,
            "potential": desc,
            "vector_potential": list(self.vector_potential) if self.vector_potential else None,
            "charges": list(self.charges) if self.charges else None,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def recommended_step(h: HamiltonianSpec, grid: GridSpec, safety: float = 0.05) -> float:
    """Largest substep honoring max|V|*dt/hbar <= safety (inf for V = 0)."""
    vmax = float(np.max(np.abs(h.potential_grid(grid))))
    if vmax == 0.0:
        return np.inf
    return safety * h.hbar / vmax


def _n_substeps(duration: float, max_step: float | None) -> int:
    if max_step is None or not np.isfinite(max_step) or abs(duration) <= max_step:
        return 1
    n = int(np.ceil(abs(duration) / max_step))
    if n > 10_000_000:
        raise ValueError("substep count exploded; check max_step")
    return n


class _Plan:
    """Cached phase factors for one (grid, hamiltonian) pair."""

    def __init__(self, grid: GridSpec, h: HamiltonianSpec):
        if grid.n_particles != h.n_particles:
            raise ValueError("grid and Hamiltonian disagree on particle count")
        self.grid = grid
        self.h = h
        self.v_grid = h.potential_grid(grid)
        k = grid.wavenumbers()
        self.kin = np.zeros(grid.shape)
        for ax in range(grid.n_particles):
            shape = [1] * grid.n_particles
            shape[ax] = grid.cells
            shift = h.axis_momentum_shift(ax)
            self.kin = self.kin + (h.hbar**2 * (k - shift) ** 2 / (2.0 * h.masses[ax])).reshape(
                shape
            )
        self._phase_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def _phases(self, dt: float) -> tuple[np.ndarray, np.ndarray]:
        got = self._phase_cache.get(dt)
        if got is None:
            half_v = np.exp(-0.5j * dt / self.h.hbar * self.v_grid)
            kin = np.exp(-1j * dt / self.h.hbar * self.kin)
            if len(self._phase_cache) > 32:
                self._phase_cache.clear()
            got = self._phase_cache[dt] = (half_v, kin)
        return got

    def propagate(self, values: np.ndarray, duration: float, max_step: float | None) -> np.ndarray:
        if duration == 0.0:
            return values.copy()
        n = _n_substeps(duration, max_step)
        dt = duration / n
        half_v, kin = self._phases(dt)
        out = values * half_v
        full_v = None
        for step in range(n):
            out = np.fft.ifftn(np.fft.fftn(out) * kin)
            if step < n - 1:
                if full_v is None:
                    full_v = half_v * half_v
                out = out * full_v
        out = out * half_v
        return out


_plan_cache: dict[tuple, _Plan] = {}


def _plan_for(grid: GridSpec, h: HamiltonianSpec) -> _Plan:
    key = (grid, h) if not isinstance(h.potential, TabulatedPotential) else None
    if key is None:
        return _Plan(grid, h)
    plan = _plan_cache.get(key)
    if plan is None:
        if len(_plan_cache) > 16:
            _plan_cache.clear()
        plan = _plan_cache[key] = _Plan(grid, h)
    return plan


def evolve(
    psi: ComplexField, h: HamiltonianSpec, dt: float, max_step: float | None = None
) -> ComplexField:
    """Propagate by ``dt`` (either sign) with Strang splitting.

    When ``max_step`` is given the interval is cut into equal substeps no
    longer than it; one substep otherwise.
    """
    plan = _plan_for(psi.grid, h)
    return psi.with_values(plan.propagate(psi.values, dt, max_step))


class _AxisPlan:
    """Single-axis propagator for noninteracting Hamiltonians."""

    def __init__(self, grid: GridSpec, h: HamiltonianSpec, axis: int):
        self.grid, self.h, self.axis = grid, h, axis
        self.v = h.axis_potential(grid, axis)
        k = grid.wavenumbers()
        self.kin = h.hbar**2 * (k - h.axis_momentum_shift(axis)) ** 2 / (2.0 * h.masses[axis])

    def propagate(self, values: np.ndarray, duration: float, max_step: float | None) -> np.ndarray:
        if duration == 0.0:
            return values.copy()
        n = _n_substeps(duration, max_step)
        dt = duration / n
        shape = [1] * self.grid.n_particles
        shape[self.axis] = self.grid.cells
        half_v = np.exp(-0.5j * dt / self.h.hbar * self.v).reshape(shape)
        kin = np.exp(-1j * dt / self.h.hbar * self.kin).reshape(shape)
        out = values * half_v
        for step in range(n):
            out = np.fft.ifft(np.fft.fft(out, axis=self.axis) * kin, axis=self.axis)
            if step < n - 1:
                out = out * (half_v * half_v)
        return out * half_v


def multi_time_evolve(
    psi0: ComplexField,
    h: HamiltonianSpec,
    times: Sequence[float],
    max_step: float | None = None,
) -> ComplexField:
    """Propagate axis ``i`` by ``times[i]`` under the single-particle part of a
    noninteracting Hamiltonian. Axis propagators commute, so the application
    order is irrelevant."""
    grid = psi0.grid
    if len(times) != grid.n_particles:
        raise ValueError("need one duration per particle")
    if not h.is_noninteracting(grid):
        raise ValueError("multi-time evolution requires a noninteracting Hamiltonian")
    out = psi0.values
    for ax in range(grid.n_particles):
        out = _AxisPlan(grid, h, ax).propagate(out, float(times[ax]), max_step)
    return psi0.with_values(out)


def expected_energy(psi: ComplexField, h: HamiltonianSpec) -> float:
    """<psi|H|psi> via the spectral kinetic term plus potential quadrature."""
    plan = _plan_for(psi.grid, h)
    g = psi.grid
    psi_k = np.fft.fftn(psi.values)
    w = g.dx**g.n_particles / g.size
    kinetic = float(np.sum(plan.kin * np.abs(psi_k) ** 2)) * w
    potential = float(np.sum(plan.v_grid * np.abs(psi.values) ** 2)) * g.dx**g.n_particles
    return kinetic + potential


class WavePath:
    """Time-ordered checkpoints of a wave function, linearly interpolated.

    The trajectory integrator consumes this through per-checkpoint velocity
    tables (see :mod:`ontosim.bohm`); ``field_at`` gives the raw lerped field.
    """

    def __init__(self, times: Sequence[float], fields: Sequence[ComplexField]):
        t = np.asarray(times, dtype=np.float64)
        if t.ndim != 1 or len(fields) != t.size or t.size < 1:
            raise ValueError("times and fields must align and be nonempty")
        if np.any(np.diff(t) <= 0):
            raise ValueError("checkpoint times must be strictly increasing")
        grid = fields[0].grid
        if any(f.grid != grid for f in fields):
            raise ValueError("checkpoints live on different grids")
        self.times = t
        self.fields = list(fields)
        self.grid = grid

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def _bracket(self, t: float) -> tuple[int, float]:
        eps = 1e-12 * max(1.0, abs(self.t1))
        if t < self.times[0] - eps or t > self.times[-1] + eps:
            raise ValueError(f"time {t} outside checkpointed range")
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        j = min(max(j, 0), len(self.fields) - 2) if len(self.fields) > 1 else 0
        if len(self.fields) == 1:
            return 0, 0.0
        span = self.times[j + 1] - self.times[j]
        w = (t - self.times[j]) / span
        return j, float(min(max(w, 0.0), 1.0))

    def field_at(self, t: float) -> ComplexField:
        j, w = self._bracket(t)
        if w == 0.0:
            return self.fields[j]
        a, b = self.fields[j].values, self.fields[j + 1].values
        return self.fields[j].with_values((1.0 - w) * a + w * b)


class DensePropagator:
    """Exact propagation by eigendecomposition of the dense Hamiltonian matrix.

    Independent of the split-step path; used as the reference propagator in
    the flash-law density oracle. Limited to small grids.
    """

    MAX_SIZE = 2048

    def __init__(self, grid: GridSpec, h: HamiltonianSpec):
        if grid.size > self.MAX_SIZE:
            raise ValueError(f"dense propagation capped at {self.MAX_SIZE} grid points")
        self.grid, self.h = grid, h
        n, m = grid.size, grid.cells
        f = np.fft.fft(np.eye(m), axis=0)
        finv = np.conj(f.T) / m
        k = grid.wavenumbers()
        ham = np.zeros((n, n), dtype=np.complex128)
        for ax in range(grid.n_particles):
            t_ax = h.hbar**2 * (k - h.axis_momentum_shift(ax)) ** 2 / (2.0 * h.masses[ax])
            k1 = finv @ np.diag(t_ax) @ f
            op = np.array([[1.0]])
            for j in range(grid.n_particles):
                op = np.kron(op, k1 if j == ax else np.eye(m))
            ham += op
        ham += np.diag(h.potential_grid(grid).reshape(-1))
        ham = 0.5 * (ham + np.conj(ham.T))
        self.energies, self.modes = np.linalg.eigh(ham)

    def propagate(self, psi: ComplexField, duration: float) -> ComplexField:
        coeff = np.conj(self.modes.T) @ psi.values.reshape(-1)
        coeff = coeff * np.exp(-1j * self.energies * duration / self.h.hbar)
        return psi.with_values((self.modes @ coeff).reshape(self.grid.shape))
