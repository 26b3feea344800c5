"""Distributional test battery and the named equivalence experiments.

Every check returns a :class:`TestReport` that records the statistic, the
p-value (or distance), the verdict against its declared threshold, sample
sizes, and the seed, so that re-running with the recorded seed reproduces the
statistic bit-identically. Indistinguishability verdicts mean "consistent
with equality", never proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np
from scipy import stats as sps

from .bohm import VelocityPath, integrate_trajectories, sample_equilibrium
from .dynamics import HamiltonianSpec, evolve
from .grids import ComplexField, RealField1D, density_cdf, marginal
from .grw import GrwRun, TheoryParams, run_grw_collapse, unitary_path
from .ontology import ReadoutSpec, matter_density, pointer_readout, run_grwm
from .rngs import derive_rng

__all__ = [
    "TestReport",
    "EnsembleSpec",
    "ks_two_sample",
    "ks_vs_gridded_density",
    "chi_square_vs_density",
    "chi_square_counts",
    "check_bm_equivariance",
    "check_generalized_equivariance",
    "density_matrix_discrimination",
    "check_grwm_grwf_empirical_equivalence",
    "calibrate_rejection_rate",
]

ALPHA = 0.01
MIN_POWERED_N = 30


@dataclass(frozen=True)
class TestReport:
    """Self-contained record of one statistical check."""

    name: str
    statistic: float
    verdict: Literal["pass", "fail", "inconclusive"]
    p_value: float | None = None
    distance: float | None = None
    alpha: float | None = None
    n_samples: tuple[int, ...] = ()
    seed: int | None = None
    details: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "distance": self.distance,
            "alpha": self.alpha,
            "verdict": self.verdict,
            "n_samples": list(self.n_samples),
            "seed": self.seed,
            "details": self.details,
        }


@dataclass(frozen=True)
class EnsembleSpec:
    """Weighted ensemble of normalized wave functions on a common grid."""

    members: tuple[tuple[float, ComplexField], ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        weights = np.array([w for w, _ in self.members])
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        grid = self.members[0][1].grid
        for _, psi in self.members:
            if psi.grid != grid:
                raise ValueError("ensemble members live on different grids")
            total = float(np.sum(np.abs(psi.values) ** 2)) * grid.dx**grid.n_particles
            if abs(total - 1.0) > 1e-8:
                raise ValueError("ensemble members must be normalized")

    @property
    def grid(self):
        return self.members[0][1].grid

    def density_matrix(self) -> np.ndarray:
        g = self.grid
        if g.size > 4096:
            raise ValueError("dense density matrix capped at 4096 grid points")
        rho = np.zeros((g.size, g.size), dtype=np.complex128)
        for w, psi in self.members:
            v = psi.values.reshape(-1)
            rho += w * np.outer(v, np.conj(v))
        return rho * g.dx**g.n_particles

    def draw(self, rng: np.random.Generator) -> ComplexField:
        weights = np.array([w for w, _ in self.members])
        j = int(np.searchsorted(np.cumsum(weights), rng.random(), side="right"))
        return self.members[min(j, len(self.members) - 1)][1]


def _verdict(p: float, alpha: float, n_min: int | None = None, n: int | None = None) -> str:
    if n_min is not None and n is not None and n < n_min:
        return "inconclusive"
    return "pass" if p > alpha else "fail"


def ks_two_sample(
    a: np.ndarray,
    b: np.ndarray,
    *,
    alpha: float = ALPHA,
    name: str = "ks_two_sample",
    seed: int | None = None,
) -> TestReport:
    """Two-sample Kolmogorov-Smirnov with the asymptotic p-value."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    res = sps.ks_2samp(a, b, method="asymp")
    return TestReport(
        name=name,
        statistic=float(res.statistic),
        p_value=float(res.pvalue),
        alpha=alpha,
        verdict=_verdict(float(res.pvalue), alpha),
        n_samples=(a.size, b.size),
        seed=seed,
    )


def ks_vs_gridded_density(
    samples: np.ndarray,
    density: RealField1D,
    *,
    alpha: float = ALPHA,
    name: str = "ks_vs_density",
    seed: int | None = None,
) -> TestReport:
    """One-sample KS of positions against a gridded cell density."""
    samples = np.asarray(samples, dtype=np.float64)
    res = sps.kstest(samples, lambda x: density_cdf(density, x))
    return TestReport(
        name=name,
        statistic=float(res.statistic),
        p_value=float(res.pvalue),
        alpha=alpha,
        verdict=_verdict(float(res.pvalue), alpha),
        n_samples=(samples.size,),
        seed=seed,
    )


def _merge_small_bins(observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0):
    """Left-to-right merge so that every chi-square cell has enough mass."""
    obs_out: list[float] = []
    exp_out: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        if exp_out:
            obs_out[-1] += acc_o
            exp_out[-1] += acc_e
        else:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
    return np.asarray(obs_out), np.asarray(exp_out)


def chi_square_counts(
    observed: np.ndarray,
    expected: np.ndarray,
    *,
    alpha: float = ALPHA,
    name: str = "chi_square",
    seed: int | None = None,
    dof_reduction: int = 1,
) -> TestReport:
    """Binned chi-square of observed counts against expected counts."""
    observed = np.asarray(observed, dtype=np.float64).reshape(-1)
    expected = np.asarray(expected, dtype=np.float64).reshape(-1)
    if observed.shape != expected.shape:
        raise ValueError("observed and expected must align")
    obs, exp = _merge_small_bins(observed, expected)
    if exp.size < 2:
        raise ValueError("too few populated bins for a chi-square test")
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = exp.size - dof_reduction
    p = float(sps.chi2.sf(stat, dof))
    return TestReport(
        name=name,
        statistic=stat,
        p_value=p,
        alpha=alpha,
        verdict=_verdict(p, alpha),
        n_samples=(int(observed.sum()),),
        seed=seed,
        details={"dof": dof, "bins": int(exp.size)},
    )


def chi_square_vs_density(
    samples: np.ndarray,
    density: RealField1D,
    bins: int,
    *,
    alpha: float = ALPHA,
    name: str = "chi_square_vs_density",
    seed: int | None = None,
) -> TestReport:
    """Binned chi-square of positions against a gridded cell density."""
    samples = np.asarray(samples, dtype=np.float64)
    lo = density.origin
    edges = lo + density.length * np.arange(bins + 1) / bins
    counts, _ = np.histogram(samples, bins=edges)
    cdf_vals = density_cdf(density, edges)
    cdf_vals[-1] = 1.0
    expected = np.diff(cdf_vals) * samples.size
    rep = chi_square_counts(counts, expected, alpha=alpha, name=name, seed=seed)
    return rep


def check_bm_equivariance(
    psi0: ComplexField,
    h: HamiltonianSpec,
    t: float,
    n: int,
    seed: int,
    *,
    dt: float = 0.005,
    alpha: float = ALPHA,
    max_step: float | None = None,
    name: str = "bm_equivariance",
) -> TestReport:
    """Transport n equilibrium samples to time t and KS-test each axis of the
    empirical distribution against the evolved |psi_t|^2 marginal."""
    rng = derive_rng(seed)
    g = psi0.grid
    if t < 0:
        raise ValueError("t must be nonnegative")
    q0 = np.atleast_2d(sample_equilibrium(psi0, rng, size=n))
    if t == 0.0:
        endpoints = q0
        psi_t = psi0
    else:
        cadence = max(2, int(np.ceil(t / (5.0 * dt))))
        path = unitary_path(psi0, 0.0, t, h, cadence=cadence, max_step=max_step)
        vpath = VelocityPath.from_wavepath(path, h)
        _, configs = integrate_trajectories(vpath, q0, 0.0, t, dt)
        endpoints = configs[-1]
        psi_t = path.fields[-1]
    p_axes = []
    stats_axes = []
    for ax in range(g.n_particles):
        rep = ks_vs_gridded_density(endpoints[:, ax], marginal(psi_t, ax + 1), alpha=alpha)
        p_axes.append(rep.p_value)
        stats_axes.append(rep.statistic)
    worst = int(np.argmin(p_axes))
    return TestReport(
        name=name,
        statistic=stats_axes[worst],
        p_value=float(p_axes[worst]),
        alpha=alpha,
        verdict=_verdict(float(p_axes[worst]), alpha, MIN_POWERED_N, n),
        n_samples=(n,),
        seed=seed,
        details={"p_per_axis": [float(p) for p in p_axes], "t": t},
    )


def _first_flash_after(run: GrwRun, t_shift: float):
    for fl in run.flashes:
        if fl.t > t_shift:
            return fl
    return None


def check_generalized_equivariance(
    theory: Literal["grwf", "grwm"],
    psi0: ComplexField,
    h: HamiltonianSpec,
    params: TheoryParams,
    t_shift: float,
    n: int,
    seed: int,
    *,
    horizon: float = None,
    alpha: float = ALPHA,
    max_step: float | None = None,
    negative_control: bool = False,
    name: str = "generalized_equivariance",
) -> TestReport:
    """Compare time-shifted flash futures against futures restarted from
    harvested evolved states.

    Group A: full runs from psi0, first flash after t_shift, shifted by
    -t_shift. Group B: fresh runs started from the collapsed state at t_shift
    harvested from independent runs. The two laws agree exactly for the
    collapse formulation (its state is Markov), so the KS tests must pass.
    With ``negative_control`` the harvested states are replaced by the
    uncollapsed linearly evolved state, which ignores the pre-shift history
    and must be detectably wrong.
    """
    if horizon is None:
        horizon = t_shift if t_shift > 0 else 1.0
    rates = params.rates(psi0.grid.n_particles)
    total_rate = float(np.sum(rates))
    a_t, a_x = [], []
    for j in range(n):
        run = run_grw_collapse(
            psi0, 0.0, t_shift + horizon, h, params, derive_rng(seed, j),
            cadence=0, max_step=max_step,
        )
        fl = _first_flash_after(run, t_shift)
        if fl is not None:
            a_t.append(fl.t - t_shift)
            a_x.append(fl.x)
    b_t, b_x = [], []
    psi_l_shift = evolve(psi0, h, t_shift, max_step=max_step)
    for j in range(n):
        if negative_control:
            start = psi_l_shift
        else:
            harvest = run_grw_collapse(
                psi0, 0.0, t_shift, h, params, derive_rng(seed, 2_000_000 + j),
                cadence=1, max_step=max_step,
            )
            start = harvest.checkpoints.fields[-1]
        fresh = run_grw_collapse(
            start, 0.0, horizon, h, params, derive_rng(seed, 4_000_000 + j),
            cadence=0, max_step=max_step, max_flashes=1,
        )
        if len(fresh.flashes):
            b_t.append(fresh.flashes[0].t)
            b_x.append(fresh.flashes[0].x)
    rep_t = ks_two_sample(np.array(a_t), np.array(b_t), alpha=alpha)
    rep_x = ks_two_sample(np.array(a_x), np.array(b_x), alpha=alpha)
    p = min(rep_t.p_value, rep_x.p_value)
    stat = rep_t.statistic if rep_t.p_value <= rep_x.p_value else rep_x.statistic
    return TestReport(
        name=name + ("_negative_control" if negative_control else ""),
        statistic=stat,
        p_value=p,
        alpha=alpha,
        verdict=_verdict(p, alpha, MIN_POWERED_N, min(len(a_t), len(b_t))),
        n_samples=(len(a_t), len(b_t)),
        seed=seed,
        details={
            "theory": theory,
            "p_time": rep_t.p_value,
            "p_location": rep_x.p_value,
            "t_shift": t_shift,
        },
    )


def density_matrix_discrimination(
    mu: EnsembleSpec,
    mu_prime: EnsembleSpec,
    theory: Literal["grwf", "grwm_single_time"],
    h: HamiltonianSpec,
    params: TheoryParams,
    n: int,
    seed: int,
    *,
    region: tuple[float, float] | None = None,
    t_max: float | None = None,
    alpha: float = ALPHA,
    max_step: float | None = None,
) -> TestReport:
    """Try to tell two equal-density-matrix ensembles apart.

    The flash law is a quadratic functional of the state, so the GRWf branch
    must FAIL to distinguish them (pass = consistent with equality). The
    single-time matter density is not, so the GRWm branch must separate them
    perfectly (pass = accuracy 1.0).
    """
    rho = mu.density_matrix()
    rho_p = mu_prime.density_matrix()
    scale = max(float(np.max(np.abs(rho))), 1e-300)
    if float(np.max(np.abs(rho - rho_p))) > 1e-10 * scale:
        raise ValueError("ensembles do not share a density matrix; no verdict defined")
    if theory == "grwf":
        rates = params.rates(mu.grid.n_particles)
        if t_max is None:
            t_max = 8.0 / float(np.sum(rates))
        samples = {}
        for tag, ens, base in (("mu", mu, 0), ("mu_prime", mu_prime, 10_000_000)):
            ts, xs = [], []
            for j in range(n):
                rng = derive_rng(seed, base + j)
                psi = ens.draw(rng)
                run = run_grw_collapse(
                    psi, 0.0, t_max, h, params, rng,
                    cadence=0, max_step=max_step, max_flashes=1,
                )
                if len(run.flashes):
                    ts.append(run.flashes[0].t)
                    xs.append(run.flashes[0].x)
            samples[tag] = (np.array(ts), np.array(xs))
        rep_t = ks_two_sample(samples["mu"][0], samples["mu_prime"][0], alpha=alpha)
        rep_x = ks_two_sample(samples["mu"][1], samples["mu_prime"][1], alpha=alpha)
        p = min(rep_t.p_value, rep_x.p_value)
        return TestReport(
            name="density_matrix_grwf_indistinguishable",
            statistic=max(rep_t.statistic, rep_x.statistic),
            p_value=p,
            alpha=alpha,
            verdict=_verdict(p, alpha, MIN_POWERED_N, n),
            n_samples=(n, n),
            seed=seed,
            details={"p_time": rep_t.p_value, "p_location": rep_x.p_value,
                     "meaning": "pass = consistent with equality"},
        )
    if theory != "grwm_single_time":
        raise ValueError(f"unknown theory branch {theory!r}")
    if region is None:
        raise ValueError("the matter-density branch needs a readout region")
    total = float(np.sum(h.masses))
    lo, hi = region

    def region_mass(psi: ComplexField) -> float:
        m = matter_density(psi, h.masses)
        xs = m.axis_coords()
        return float(np.sum(m.values[(xs >= lo) & (xs < hi)])) * m.dx

    correct = 0
    for tag, ens, base, truth in (("mu", mu, 0, True), ("mu_prime", mu_prime, 10_000_000, False)):
        for j in range(n):
            rng = derive_rng(seed, 20_000_000 + base + j)
            mass = region_mass(ens.draw(rng))
            looks_mixed = abs(mass - 0.5 * total) < 0.25 * total
            correct += int(looks_mixed == truth)
    accuracy = correct / (2 * n)
    return TestReport(
        name="density_matrix_grwm_separates",
        statistic=accuracy,
        distance=1.0 - accuracy,
        alpha=None,
        verdict="pass" if accuracy == 1.0 else "fail",
        n_samples=(n, n),
        seed=seed,
        details={"meaning": "pass = single-time matter density separates the ensembles"},
    )


def check_grwm_grwf_empirical_equivalence(
    psi0: ComplexField,
    h: HamiltonianSpec,
    params: TheoryParams,
    readout: ReadoutSpec,
    n_runs: int,
    seed: int,
    *,
    t0: float = 0.0,
    t_max: float | None = None,
    min_agreement: float = 0.99,
    cadence: int = 20,
    max_step: float | None = None,
) -> TestReport:
    """Shared-realization comparison of the flash and matter-density readouts.

    One collapse realization per run feeds both ontologies; the two pointer
    readouts must agree (identical region, or both abstain) in at least
    ``min_agreement`` of the runs, and committed readouts must never
    conflict.
    """
    if t_max is None:
        t_max = readout.window[1]
    agree = 0
    conflicts = 0
    abstain_only = 0
    for j in range(n_runs):
        density, run = run_grwm(
            psi0, t0, t_max, h, params, derive_rng(seed, j),
            cadence=cadence, max_step=max_step,
        )
        r_f = pointer_readout(run.flashes, readout)
        r_m = pointer_readout(density, readout)
        if r_f.region == r_m.region:
            agree += 1
        elif r_f.abstained or r_m.abstained:
            abstain_only += 1
        else:
            conflicts += 1
    frac = agree / n_runs
    ok = frac >= min_agreement and conflicts == 0
    return TestReport(
        name="grwm_grwf_empirical_equivalence",
        statistic=frac,
        distance=1.0 - frac,
        verdict="pass" if ok else "fail",
        n_samples=(n_runs,),
        seed=seed,
        details={
            "committed_conflicts": conflicts,
            "abstain_disagreements": abstain_only,
            "min_agreement": min_agreement,
        },
    )


def calibrate_rejection_rate(
    kind: Literal["ks", "chi2"],
    reps: int,
    seed: int,
    *,
    n: int = 400,
    alpha: float = ALPHA,
    tolerance: float = 0.01,
) -> TestReport:
    """Null-stream calibration: the rejection rate at level alpha over
    ``reps`` repetitions must sit within alpha +/- tolerance."""
    rejects = 0
    uniform = RealField1D(16, 1.0, np.full(16, 1.0))
    for j in range(reps):
        rng = derive_rng(seed, 30_000_000 + j)
        if kind == "ks":
            rep = ks_two_sample(rng.random(n), rng.random(n), alpha=alpha)
        else:
            rep = chi_square_vs_density(rng.random(n), uniform, 8, alpha=alpha)
        rejects += int(rep.verdict == "fail")
    rate = rejects / reps
    ok = abs(rate - alpha) <= tolerance
    return TestReport(
        name=f"calibration_{kind}",
        statistic=rate,
        distance=abs(rate - alpha),
        alpha=alpha,
        verdict="pass" if ok else "fail",
        n_samples=(reps, n),
        seed=seed,
        details={"tolerance": tolerance},
    )
