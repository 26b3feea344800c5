"""The spontaneous-collapse jump process, in both of its formulations.

The collapse formulation keeps a collapsing wave function: unitary evolution
interrupted at exponential times by instantaneous Gaussian collapses whose
centers are drawn from the smoothed position density. The linear (no-collapse)
formulation keeps only the linearly evolved wave function and the flash
history, and samples each next flash from the history-conditioned rate,
evaluated by rebuilding the conditioned state from the recorded flashes at
every jump.

Both samplers consume randomness in the normative order (waiting time, label,
center), one uniform each, and derive every evolution interval as a
difference of stored absolute times. Driven by the same stream they therefore
produce bit-identical flash sequences, which is the coupling construction the
equivalence tests rely on. To keep that exact, the state that the center
sampler sees is always advanced event-to-event in one shot; checkpoints at
intermediate times are computed from copies and never perturb the sampling
path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import DensePropagator, HamiltonianSpec, WavePath, evolve
from .errors import CollapseAnnihilation
from .grids import (
    ComplexField,
    RealField1D,
    gaussian_smooth,
    marginal,
    norm,
    sample_density,
    wrapped_gaussian,
)

__all__ = [
    "TheoryParams",
    "Flash",
    "FlashHistory",
    "apply_collapse",
    "collapse_rate_density",
    "run_grw_collapse",
    "run_grw_linear",
    "flash_joint_density",
    "heisenberg_collapse_sqrt",
    "reconstruct_collapsed",
    "GrwRun",
    "unitary_path",
]

ANNIHILATION_THRESHOLD = 1e-12


@dataclass(frozen=True)
class TheoryParams:
    """Collapse-law constants: rate per label and spatial width."""

    lambda_rate: float
    sigma: float
    per_label_rates: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.lambda_rate > 0:
            raise ValueError("lambda_rate must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.per_label_rates is not None and any(r <= 0 for r in self.per_label_rates):
            raise ValueError("per-label rates must be positive")

    def rates(self, n_particles: int) -> np.ndarray:
        if self.per_label_rates is not None:
            if len(self.per_label_rates) != n_particles:
                raise ValueError("per_label_rates length must equal the particle count")
            return np.asarray(self.per_label_rates, dtype=np.float64)
        return np.full(n_particles, self.lambda_rate)


@dataclass(frozen=True)
class Flash:
    """A labeled space-time point (the primitive event of the flash theories)."""

    t: float
    x: float
    label: int  # 1-based particle label


@dataclass(frozen=True)
class FlashHistory:
    flashes: tuple[Flash, ...]

    def __post_init__(self):
        ts = [f.t for f in self.flashes]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("flash times must be strictly increasing (ties rejected)")

    def __len__(self) -> int:
        return len(self.flashes)

    def __iter__(self):
        return iter(self.flashes)

    def __getitem__(self, i):
        return self.flashes[i]

    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.flashes])

    def positions(self) -> np.ndarray:
        return np.array([f.x for f in self.flashes])

    def labels(self) -> np.ndarray:
        return np.array([f.label for f in self.flashes], dtype=np.intp)


def _sqrt_collapse_weights(psi: ComplexField, label: int, center: float, sigma: float):
    """Square root of the collapse operator's Gaussian, broadcast along one axis."""
    g = psi.grid
    if not 1 <= label <= g.n_particles:
        raise ValueError(f"label must be in 1..{g.n_particles}")
    line = np.sqrt(wrapped_gaussian(g.axis_coords(), center, sigma, g.length))
    shape = [1] * g.n_particles
    shape[label - 1] = g.cells
    return line.reshape(shape)


def apply_collapse(psi: ComplexField, label: int, center: float, sigma: float) -> ComplexField:
    """Instantaneous collapse: multiply by the Gaussian square root along the
    labeled axis and renormalize."""
    weighted = psi.with_values(psi.values * _sqrt_collapse_weights(psi, label, center, sigma))
    n = norm(weighted)
    if n <= ANNIHILATION_THRESHOLD:
        raise CollapseAnnihilation(
            f"collapse at x = {center!r} on label {label} annihilated the state (norm {n:.3e})"
        )
    return weighted.with_values(weighted.values / n)


def collapse_rate_density(psi: ComplexField, label: int, params: TheoryParams) -> RealField1D:
    """Rate density of collapse centers for one label.

    Projective by construction: the field is normalized internally, so any
    nonzero complex rescaling of psi leaves the density unchanged. Integrates
    to the label's rate.
    """
    n = norm(psi)
    if n <= 0:
        raise ValueError("zero field has no collapse rate density")
    rate = float(params.rates(psi.grid.n_particles)[label - 1])
    m = marginal(psi.with_values(psi.values / n), label)
    sm = gaussian_smooth(m, params.sigma)
    return RealField1D(
        sm.cells, sm.length, sm.values * rate, origin=sm.origin, declared_total=rate
    )


@dataclass(frozen=True)
class GrwRun:
    """Output envelope of one stochastic run."""

    flashes: FlashHistory
    checkpoints: WavePath
    preflash: tuple[ComplexField, ...] = ()
    linear_checkpoints: WavePath | None = None


def _checkpoint_times(t0: float, t_max: float, cadence: int) -> list[float]:
    if cadence <= 0:
        return []
    return [t0 + (t_max - t0) * j / cadence for j in range(1, cadence + 1)]


class _JumpClock:
    """Shared jump sampling: normative draw order (waiting time, label, center)."""

    def __init__(self, params: TheoryParams, n_particles: int, rng: np.random.Generator):
        self.rates = params.rates(n_particles)
        self.total_rate = float(np.sum(self.rates))
        self.cum = np.cumsum(self.rates)
        self.rng = rng

    def next_gap(self) -> float:
        if self.total_rate <= 0:
            return np.inf
        return -np.log1p(-self.rng.random()) / self.total_rate

    def next_label(self) -> int:
        u = self.rng.random() * self.total_rate
        return int(np.searchsorted(self.cum, u, side="right")) + 1

    def next_center(self, density: RealField1D) -> float:
        return float(sample_density(density, self.rng))


def run_grw_collapse(
    psi0: ComplexField,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    rng: np.random.Generator,
    *,
    cadence: int = 20,
    max_step: float | None = None,
    keep_preflash: bool = False,
    max_flashes: int | None = None,
) -> GrwRun:
    """Sample the collapse-formulation jump process on [t0, t_max].

    Checkpoints are recorded at ``cadence`` uniform times plus immediately
    after each flash; they are computed from copies so the sampling path sees
    event-to-event evolution only. ``max_flashes`` stops the run early once
    that many flashes have been recorded (first-flash studies).
    """
    if t_max < t0:
        raise ValueError("t_max must be >= t0")
    _require_normalized(psi0)
    clock = _JumpClock(params, psi0.grid.n_particles, rng)
    cp_times = _checkpoint_times(t0, t_max, cadence)
    chk_t: list[float] = [t0]
    chk_f: list[ComplexField] = [psi0]
    preflash: list[ComplexField] = []
    flashes: list[Flash] = []
    state = psi0
    t_event = t0
    while True:
        gap = clock.next_gap()
        t_next = t_event + gap
        horizon = min(t_next, t_max)
        for tc in [c for c in cp_times if t_event < c < horizon]:
            chk_t.append(tc)
            chk_f.append(evolve(state, h, tc - t_event, max_step=max_step))
        if t_next > t_max:
            if t_max > t_event:
                chk_t.append(t_max)
                chk_f.append(evolve(state, h, t_max - t_event, max_step=max_step))
            break
        state = evolve(state, h, t_next - t_event, max_step=max_step)
        label = clock.next_label()
        density = collapse_rate_density(state, label, params)
        x = clock.next_center(density)
        if keep_preflash:
            preflash.append(state)
        state = apply_collapse(state, label, x, params.sigma)
        flashes.append(Flash(t_next, x, label))
        chk_t.append(t_next)
        chk_f.append(state)
        t_event = t_next
        if max_flashes is not None and len(flashes) >= max_flashes:
            break
    order = np.argsort(chk_t, kind="stable")
    dedup_t, dedup_f = _dedup_times([chk_t[i] for i in order], [chk_f[i] for i in order])
    return GrwRun(
        FlashHistory(tuple(flashes)),
        WavePath(dedup_t, dedup_f),
        tuple(preflash),
    )


def _dedup_times(times: list[float], fields: list[ComplexField]):
    out_t: list[float] = []
    out_f: list[ComplexField] = []
    for t, f in zip(times, fields):
        if out_t and t <= out_t[-1]:
            out_f[-1] = f  # keep the later record (post-flash state at a flash time)
            continue
        out_t.append(t)
        out_f.append(f)
    return out_t, out_f


def _require_normalized(psi: ComplexField, tol: float = 1e-8) -> None:
    n = norm(psi)
    if abs(n - 1.0) > tol:
        raise ValueError(f"initial state must be normalized, got norm {n!r}")


def run_grw_linear(
    psi0: ComplexField,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    rng: np.random.Generator,
    *,
    cadence: int = 20,
    max_step: float | None = None,
) -> GrwRun:
    """Sample the same flash process from the no-collapse formulation.

    Only the linearly evolved wave function and the flash history are
    maintained. At every jump the history-conditioned center density is
    recomputed from scratch by applying the recorded collapse factors in time
    order (one Heisenberg factor per past flash, telescoped into an
    evolve/collapse chain seeded at the first flash's linear state), so the
    cost per jump grows with the number of prior flashes.
    """
    if t_max < t0:
        raise ValueError("t_max must be >= t0")
    _require_normalized(psi0)
    clock = _JumpClock(params, psi0.grid.n_particles, rng)
    cp_times = _checkpoint_times(t0, t_max, cadence)
    chk_t: list[float] = [t0]
    chk_f: list[ComplexField] = [psi0]
    flashes: list[Flash] = []
    psi_l = psi0
    psi_l_first: ComplexField | None = None  # linear state at the first flash time
    t_event = t0
    while True:
        gap = clock.next_gap()
        t_next = t_event + gap
        horizon = min(t_next, t_max)
        for tc in [c for c in cp_times if t_event < c < horizon]:
            chk_t.append(tc)
            chk_f.append(evolve(psi_l, h, tc - t_event, max_step=max_step))
        if t_next > t_max:
            if t_max > t_event:
                chk_t.append(t_max)
                chk_f.append(evolve(psi_l, h, t_max - t_event, max_step=max_step))
            break
        psi_l = evolve(psi_l, h, t_next - t_event, max_step=max_step)
        label = clock.next_label()
        if not flashes:
            conditioned = psi_l
        else:
            conditioned = _conditioned_state(
                psi_l_first, flashes, t_next, params, h, max_step=max_step
            )
        density = collapse_rate_density(conditioned, label, params)
        x = clock.next_center(density)
        if psi_l_first is None:
            psi_l_first = psi_l
        flashes.append(Flash(t_next, x, label))
        chk_t.append(t_next)
        chk_f.append(psi_l)
        t_event = t_next
    order = np.argsort(chk_t, kind="stable")
    dedup_t, dedup_f = _dedup_times([chk_t[i] for i in order], [chk_f[i] for i in order])
    return GrwRun(FlashHistory(tuple(flashes)), WavePath(dedup_t, dedup_f))


def _conditioned_state(
    psi_l_first: ComplexField,
    flashes: Sequence[Flash],
    t: float,
    params: TheoryParams,
    h: HamiltonianSpec,
    *,
    max_step: float | None,
) -> ComplexField:
    """State conditioned on the recorded flashes, rebuilt from the linear
    state at the first flash time (O(len(flashes)) operator applications)."""
    state = apply_collapse(psi_l_first, flashes[0].label, flashes[0].x, params.sigma)
    prev_t = flashes[0].t
    for fl in flashes[1:]:
        state = evolve(state, h, fl.t - prev_t, max_step=max_step)
        state = apply_collapse(state, fl.label, fl.x, params.sigma)
        prev_t = fl.t
    return evolve(state, h, t - prev_t, max_step=max_step)


def heisenberg_collapse_sqrt(
    psi: ComplexField,
    label: int,
    center: float,
    flash_time: float,
    eval_time: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    *,
    max_step: float | None = None,
) -> ComplexField:
    """Apply the collapse square root conjugated to ``eval_time``: evolve back
    to the flash time, multiply by the Gaussian square root, evolve forward.
    Unnormalized."""
    back = evolve(psi, h, flash_time - eval_time, max_step=max_step)
    hit = back.with_values(back.values * _sqrt_collapse_weights(back, label, center, params.sigma))
    return evolve(hit, h, eval_time - flash_time, max_step=max_step)


def reconstruct_collapsed(
    psi_l: ComplexField,
    history: FlashHistory | Sequence[Flash],
    t: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    *,
    max_step: float | None = None,
) -> ComplexField:
    """Recover the collapsed state at ``t`` from the linearly evolved state and
    the flash record: apply one Heisenberg collapse factor per flash, earliest
    innermost, then normalize. Per-factor normalization only guards against
    underflow; it drops out of the final state."""
    flashes = list(history)
    if any(b.t <= a.t for a, b in zip(flashes, flashes[1:])):
        raise ValueError("history must be strictly time-ordered")
    if flashes and flashes[-1].t > t + 1e-12:
        raise ValueError("history extends past the evaluation time")
    state = psi_l
    for fl in flashes:
        state = heisenberg_collapse_sqrt(
            state, fl.label, fl.x, fl.t, t, h, params, max_step=max_step
        )
        n = norm(state)
        if n <= ANNIHILATION_THRESHOLD:
            raise CollapseAnnihilation("reconstruction annihilated the state")
        state = state.with_values(state.values / n)
    return state


def flash_joint_density(
    history: FlashHistory | Sequence[Flash],
    psi0: ComplexField,
    t0: float,
    h: HamiltonianSpec,
    params: TheoryParams,
    *,
    t_end: float | None = None,
    propagator: DensePropagator | None = None,
) -> float:
    """Exact joint density of the first n flashes after t0.

    Evaluates (prod_k rate_{i_k}) * exp(-R (t_n - t0)) * ||L psi0||^2 with L
    the time-ordered product of unitary steps and Gaussian square roots, and
    R the total rate. Propagation uses the dense eigendecomposition
    propagator, independent of the split-step sampler path. With ``t_end``
    the survival factor exp(-R (t_end - t_n)) for a flash-free tail is
    included; an empty history then gives the pure survival probability.
    """
    flashes = list(history)
    if any(b.t <= a.t for a, b in zip(flashes, flashes[1:])):
        raise ValueError("history must be strictly time-ordered")
    if flashes and flashes[0].t < t0:
        raise ValueError("history starts before t0")
    rates = params.rates(psi0.grid.n_particles)
    total_rate = float(np.sum(rates))
    if not flashes:
        if t_end is None:
            raise ValueError("empty history needs t_end to define the survival interval")
        return float(np.exp(-total_rate * (t_end - t0)))
    prop = propagator if propagator is not None else DensePropagator(psi0.grid, h)
    state = psi0
    prev_t = t0
    log_density = 0.0
    for fl in flashes:
        state = prop.propagate(state, fl.t - prev_t)
        state = state.with_values(
            state.values * _sqrt_collapse_weights(state, fl.label, fl.x, params.sigma)
        )
        n2 = float(np.real(np.vdot(state.values, state.values))) * (
            psi0.grid.dx**psi0.grid.n_particles
        )
        if n2 <= 0.0:
            return 0.0
        log_density += np.log(n2) + np.log(rates[fl.label - 1])
        state = state.with_values(state.values / np.sqrt(n2))
        prev_t = fl.t
    log_density += -total_rate * (flashes[-1].t - t0)
    if t_end is not None:
        if t_end < flashes[-1].t:
            raise ValueError("t_end precedes the last flash")
        log_density += -total_rate * (t_end - flashes[-1].t)
    return float(np.exp(log_density))


def unitary_path(
    psi0: ComplexField,
    t0: float,
    t_max: float,
    h: HamiltonianSpec,
    *,
    cadence: int = 20,
    max_step: float | None = None,
) -> WavePath:
    """Checkpointed pure Schroedinger evolution (the lambda -> 0 skeleton that
    the stochastic engines share)."""
    times = [t0] + _checkpoint_times(t0, t_max, cadence)
    fields = [psi0]
    for tc in times[1:]:
        fields.append(evolve(psi0, h, tc - t0, max_step=max_step))
    return WavePath(times, fields)
