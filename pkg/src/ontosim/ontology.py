"""Primitive-ontology extraction and the variant theories.

Each theory's output is the stuff the theory is about: a matter-density
field, a flash record, or a trajectory. The wave function is internal. The
variants differ only in which pieces of the jump machinery they keep:

* ``run_grwm`` / ``run_sm``: mass-density field driven by the collapsing,
  respectively purely unitary, wave function;
* ``run_sf``: flashes at the collapse rate of the unitarily evolved state,
  with no back-action on it (optionally with the zero-width kernel);
* ``run_sf_prime``: flashes drawn from a multi-time wave function conditioned
  on every other label's last flash (noninteracting dynamics only);
* ``run_grwp``: Bohmian trajectory whose collapses are centered on the
  tracked position;
* ``run_bmw``: independent equilibrium draws at each sample time, no pairing
  across times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bohm import Trajectory, VelocityPath, integrate_trajectories, sample_equilibrium, velocity_table
from .dynamics import HamiltonianSpec, WavePath, evolve, multi_time_evolve
from .errors import SimulationError
from .grids import ComplexField, RealField1D, marginal, sample_density
from .grw import Flash, FlashHistory, GrwRun, TheoryParams, _JumpClock, apply_collapse, collapse_rate_density, run_grw_collapse, unitary_path

__all__ = [
    "MatterDensity",
    "ReadoutSpec",
    "Readout",
    "ABSTAIN",
    "matter_density",
    "run_grwm",
    "run_sm",
    "run_sf",
    "run_sf_prime",
    "run_grwp",
    "run_bmw",
    "pointer_readout",
]


@dataclass(frozen=True)
class MatterDensity:
    """Mass density m(x, t) on physical space, time-major layout."""

    times: np.ndarray = field(repr=False)
    cells: int = 0
    length: float = 0.0
    origin: float = 0.0
    values: np.ndarray = field(repr=False, default=None)  # (T, cells)
    total_mass: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (t.size, self.cells):
            raise ValueError("values must be (n_times, cells)")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(v < -1e-12 * self.total_mass):
            raise ValueError("matter density must be nonnegative")
        dx = self.length / self.cells
        sums = v.sum(axis=1) * dx
        if np.any(np.abs(sums - self.total_mass) > 1e-8 * max(1.0, self.total_mass)):
            raise ValueError("matter density does not integrate to the total mass")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", np.maximum(v, 0.0))

    @property
    def dx(self) -> float:
        return self.length / self.cells

    def slice_at(self, t: float) -> RealField1D:
        j = int(np.argmin(np.abs(self.times - t)))
        return RealField1D(self.cells, self.length, self.values[j], origin=self.origin)


ABSTAIN = "abstain"


@dataclass(frozen=True)
class Readout:
    region: str  # region name or ABSTAIN
    fraction: float  # dominance fraction of the winning region

    @property
    def abstained(self) -> bool:
        return self.region == ABSTAIN


@dataclass(frozen=True)
class ReadoutSpec:
    """Named disjoint spatial intervals plus the flash-counting time window."""

    regions: tuple[tuple[str, float, float], ...]  # (name, lo, hi), lo < hi
    window: tuple[float, float]
    dominance: float = 0.6

    def __post_init__(self):
        spans = sorted((lo, hi, name) for name, lo, hi in self.regions)
        for (lo, hi, name) in spans:
            if hi <= lo:
                raise ValueError(f"region {name} is empty")
        for (l1, h1, n1), (l2, h2, n2) in zip(spans, spans[1:]):
            if l2 < h1:
                raise ValueError(f"regions {n1} and {n2} overlap")
        if self.window[1] < self.window[0]:
            raise ValueError("window must be nonempty")

    def locate(self, x: np.ndarray) -> np.ndarray:
        """Region index per position (-1 when outside all regions)."""
        x = np.asarray(x)
        out = np.full(x.shape, -1, dtype=np.intp)
        for i, (_, lo, hi) in enumerate(self.regions):
            out = np.where((x >= lo) & (x < hi), i, out)
        return out


def matter_density(psi: ComplexField, masses: Sequence[float]) -> RealField1D:
    """Mass-weighted sum of single-axis marginals of |psi|^2."""
    g = psi.grid
    if len(masses) != g.n_particles:
        raise ValueError("need one mass per particle")
    vals = np.zeros(g.cells)
    for ax in range(g.n_particles):
        vals += masses[ax] * marginal(psi, ax + 1).values
    return RealField1D(
        g.cells, g.length, vals, origin=g.origin, declared_total=float(np.sum(masses))
    )


def _density_from_path(path: WavePath, masses: Sequence[float]) -> MatterDensity:
    g = path.grid
    rows = np.stack([matter_density(f, masses).values for f in path.fields])
    return MatterDensity(
        times=path.times,
        cells=g.cells,
        length=g.length,
        origin=g.origin,
        values=rows,
        total_mass=float(np.sum(masses)),
    )


def run_grwm(
    psi0: ComplexField,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    rng: np.random.Generator,
    *,
    cadence: int = 20,
    max_step: float | None = None,
) -> tuple[MatterDensity, GrwRun]:
    """Matter-density ontology over one collapse realization.

    Returns the density together with the underlying run so that shared-
    realization comparisons (same flashes, different ontology) are possible.
    """
    run = run_grw_collapse(
        psi0, t0, t_max, h, params, rng, cadence=cadence, max_step=max_step
    )
    return _density_from_path(run.checkpoints, h.masses), run


def run_sm(
    psi0: ComplexField,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    *,
    cadence: int = 20,
    max_step: float | None = None,
) -> MatterDensity:
    """Deterministic matter density under pure Schroedinger evolution."""
    path = unitary_path(psi0, t0, t_max, h, cadence=cadence, max_step=max_step)
    return _density_from_path(path, h.masses)


def run_sf(
    psi0: ComplexField,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    rng: np.random.Generator,
    *,
    sigma_zero: bool = False,
    max_step: float | None = None,
) -> FlashHistory:
    """Flashes at the collapse rate of the unitary state, no back-action.

    With ``sigma_zero`` the smoothing kernel degenerates to a point and
    centers are drawn from the bare marginal. The output is a Poisson process
    in space-time with the state-determined intensity.
    """
    if t_max < t0:
        raise ValueError("t_max must be >= t0")
    clock = _JumpClock(params, psi0.grid.n_particles, rng)
    flashes: list[Flash] = []
    state = psi0
    t = t0
    while True:
        gap = clock.next_gap()
        t_next = t + gap
        if t_next > t_max:
            break
        state = evolve(state, h, t_next - t, max_step=max_step)
        label = clock.next_label()
        if sigma_zero:
            base = marginal(state, label)
            rate = float(params.rates(psi0.grid.n_particles)[label - 1])
            density = RealField1D(
                base.cells, base.length, base.values * rate, origin=base.origin
            )
        else:
            density = collapse_rate_density(state, label, params)
        x = clock.next_center(density)
        flashes.append(Flash(t_next, x, label))
        t = t_next
    return FlashHistory(tuple(flashes))


def _conditional_line(
    psi: ComplexField, positions: np.ndarray, free_axis: int
) -> np.ndarray:
    """Complex amplitudes along ``free_axis`` with every other axis pinned to a
    continuum position by periodic linear interpolation."""
    g = psi.grid
    vals = psi.values
    for ax in range(g.n_particles - 1, -1, -1):
        if ax == free_axis:
            continue
        s = (positions[ax] - g.origin) / g.dx
        i0 = int(np.floor(s))
        frac = s - i0
        i0 %= g.cells
        i1 = (i0 + 1) % g.cells
        vals = (1.0 - frac) * np.take(vals, i0, axis=ax) + frac * np.take(vals, i1, axis=ax)
    return vals


def run_sf_prime(
    psi0: ComplexField,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    rng: np.random.Generator,
    *,
    max_step: float | None = None,
    return_seeds: bool = False,
):
    """Multi-time flash theory for noninteracting dynamics.

    Each flash is located by the squared multi-time amplitude with the other
    labels pinned to their last flash. Labels with no flash yet are seeded
    with a virtual flash at t0 drawn from their initial marginal (consumed in
    label order, excluded from the output; ``return_seeds`` exposes them for
    verification). The clock is global: waiting times are exponential in the
    summed rate, labels uniform under equal rates.
    """
    g = psi0.grid
    if not h.is_noninteracting(g):
        raise ValueError("the multi-time flash theory needs a noninteracting Hamiltonian")
    if t_max < t0:
        raise ValueError("t_max must be >= t0")
    n = g.n_particles
    last_t = np.full(n, t0)
    last_x = np.empty(n)
    for ax in range(n):
        last_x[ax] = sample_density(marginal(psi0, ax + 1), rng)
    seeds = last_x.copy()
    clock = _JumpClock(params, n, rng)
    flashes: list[Flash] = []
    t = t0
    while True:
        gap = clock.next_gap()
        t_next = t + gap
        if t_next > t_max:
            break
        label = clock.next_label()
        ax = label - 1
        times = last_t.copy()
        times[ax] = t_next
        multi = multi_time_evolve(psi0, h, times - t0, max_step=max_step)
        line = _conditional_line(multi, last_x, ax)
        weights = np.abs(line) ** 2
        if not float(np.sum(weights)) > 0:
            raise SimulationError("conditional flash density vanished")
        density = RealField1D(g.cells, g.length, weights, origin=g.origin)
        x = clock.next_center(density)
        flashes.append(Flash(t_next, x, label))
        last_t[ax] = t_next
        last_x[ax] = x
        t = t_next
    history = FlashHistory(tuple(flashes))
    if return_seeds:
        return history, seeds
    return history


def run_grwp(
    psi0: ComplexField,
    q0: np.ndarray,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    rng: np.random.Generator,
    *,
    dt: float = 0.01,
    max_step: float | None = None,
) -> tuple[Trajectory, FlashHistory]:
    """Particle variant: Bohmian flow under the collapsing wave function, with
    each collapse centered at the tracked position of the chosen label.

    Between jumps the trajectory follows the current (collapsed) state; at a
    jump the collapse is applied instantaneously and the velocity recomputed
    from the new state.
    """
    g = psi0.grid
    if t_max < t0:
        raise ValueError("t_max must be >= t0")
    q = np.asarray(q0, dtype=np.float64).reshape(1, g.n_particles).copy()
    clock = _JumpClock(params, g.n_particles, rng)
    state = psi0
    t = t0
    times = [t0]
    configs = [q[0].copy()]
    flashes: list[Flash] = []
    while t < t_max - 1e-15:
        gap = clock.next_gap()
        t_jump = t + gap
        seg_end = min(t_jump, t_max)
        # advance flow and state together on the integrator grid
        seg_t = t
        while seg_t < seg_end - 1e-15:
            step = min(dt, seg_end - seg_t)
            nxt = evolve(state, h, step, max_step=max_step)
            vpath = VelocityPath(
                [seg_t, seg_t + step],
                [velocity_table(state, h), velocity_table(nxt, h)],
            )
            _, qq = integrate_trajectories(vpath, q, seg_t, seg_t + step, step)
            q = qq[-1]
            state = nxt
            seg_t += step
            times.append(seg_t)
            configs.append(q[0].copy())
        if t_jump > t_max:
            break
        label = clock.next_label()
        center = float(q[0, label - 1])
        state = apply_collapse(state, label, center, params.sigma)
        flashes.append(Flash(t_jump, center, label))
        t = t_jump
    return Trajectory(np.asarray(times), np.asarray(configs)), FlashHistory(tuple(flashes))


def run_bmw(
    psi0: ComplexField,
    sample_times: Sequence[float],
    h: HamiltonianSpec,
    rng: np.random.Generator,
    *,
    max_step: float | None = None,
) -> np.ndarray:
    """Independent equilibrium draw at each sample time; no pairing of
    configurations across times. Returns (n_times, n_particles)."""
    ts = np.asarray(sample_times, dtype=np.float64)
    if np.any(np.diff(ts) < 0):
        raise ValueError("sample times must be nondecreasing")
    out = np.empty((ts.size, psi0.grid.n_particles))
    for j, t in enumerate(ts):
        state = evolve(psi0, h, float(t - ts[0]), max_step=max_step) if t != ts[0] else psi0
        out[j] = sample_equilibrium(state, rng)
    return out


def pointer_readout(
    po_output: FlashHistory | MatterDensity | Trajectory,
    spec: ReadoutSpec,
) -> Readout:
    """Macroscopic readout: map a primitive-ontology record to a region name.

    Flashes vote by count inside the window; matter density by integrated
    mass at the window end; a trajectory by the region containing the
    configuration at the window end (all coordinates must agree). Abstains on
    ties, on dominance below the threshold, and on empty flash windows.
    """
    if isinstance(po_output, FlashHistory):
        if len(po_output) == 0:
            return Readout(ABSTAIN, 0.0)
        ts = po_output.times()
        xs = po_output.positions()
        in_window = (ts >= spec.window[0]) & (ts <= spec.window[1])
        if not np.any(in_window):
            return Readout(ABSTAIN, 0.0)
        regions = spec.locate(xs[in_window])
        total = int(regions.size)
        counts = np.bincount(regions[regions >= 0], minlength=len(spec.regions))
        return _dominant(counts.astype(float), float(total), spec)
    if isinstance(po_output, MatterDensity):
        sl = po_output.slice_at(spec.window[1])
        xs = sl.axis_coords()
        regions = spec.locate(xs)
        masses = np.array(
            [float(np.sum(sl.values[regions == i])) * sl.dx for i in range(len(spec.regions))]
        )
        return _dominant(masses, po_output.total_mass, spec)
    if isinstance(po_output, Trajectory):
        q = po_output.at(spec.window[1])
        regions = spec.locate(q)
        if np.any(regions < 0) or not np.all(regions == regions[0]):
            return Readout(ABSTAIN, 0.0)
        return Readout(spec.regions[int(regions[0])][0], 1.0)
    raise TypeError(f"no readout rule for {type(po_output).__name__}")


def _dominant(weights: np.ndarray, total: float, spec: ReadoutSpec) -> Readout:
    if total <= 0 or float(np.max(weights, initial=0.0)) <= 0.0:
        return Readout(ABSTAIN, 0.0)
    best = int(np.argmax(weights))
    frac = float(weights[best]) / total
    tied = np.sum(weights == weights[best]) > 1
    if tied or frac < spec.dominance:
        return Readout(ABSTAIN, frac)
    return Readout(spec.regions[best][0], frac)
