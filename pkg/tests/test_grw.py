import numpy as np
import pytest

from ontosim.dynamics import HamiltonianSpec, evolve
from ontosim.errors import CollapseAnnihilation
from ontosim.grids import (
    ComplexField,
    GridSpec,
    gaussian_smooth,
    inner,
    marginal,
    norm,
    normalize,
    wrapped_gaussian,
)
from ontosim.grw import (
    Flash,
    FlashHistory,
    TheoryParams,
    apply_collapse,
    collapse_rate_density,
    flash_joint_density,
    heisenberg_collapse_sqrt,
    reconstruct_collapsed,
    run_grw_collapse,
    run_grw_linear,
)
from ontosim.presets import gaussian_packet
from ontosim.rngs import derive_rng


@pytest.fixture
def params():
    return TheoryParams(lambda_rate=1.0, sigma=0.8)


class TestApplyCollapse:
    def test_narrow_bump_high_fidelity(self, grid64, params):
        # oracle: fidelity of a collapsed narrow state is the Gaussian overlap,
        # computed here by direct quadrature
        width = 0.05 * params.sigma
        psi = normalize(ComplexField(grid64, gaussian_packet(grid64, 1.0, width)))
        out = apply_collapse(psi, 1, 1.0, params.sigma)
        fid = abs(inner(psi, out))
        assert fid >= 0.999
        x = grid64.axis_coords()
        kern = np.sqrt(wrapped_gaussian(x, 1.0, params.sigma, grid64.length))
        direct = np.abs(psi.values) * kern
        direct /= np.sqrt(np.sum(direct**2) * grid64.dx)
        overlap = np.sum(np.abs(psi.values) * direct) * grid64.dx
        assert fid == pytest.approx(overlap, abs=1e-9)

    def test_cat_far_branch_killed(self, grid64, cat_state, params):
        a = 5 * params.sigma
        out = apply_collapse(cat_state, 1, a, params.sigma)
        x = grid64.axis_coords()
        far_mass = np.sum(np.abs(out.values[x < -a + 2.0]) ** 2) * grid64.dx
        assert far_mass <= 1e-8

    def test_repeated_sqrt_equals_full_operator(self, grid64, cat_state, params):
        x = grid64.axis_coords()
        kern = wrapped_gaussian(x, 2.0, params.sigma, grid64.length)
        twice = cat_state.values * np.sqrt(kern) * np.sqrt(kern)
        full = cat_state.values * kern
        assert np.max(np.abs(twice - full)) <= 1e-12 * np.max(np.abs(full))

    def test_annihilation_raises(self, grid64, params):
        psi = normalize(ComplexField(grid64, gaussian_packet(grid64, 8.0, 0.2)))
        with pytest.raises(CollapseAnnihilation):
            apply_collapse(psi, 1, -8.0, 0.2)


class TestRateDensity:
    def test_projective_invariance(self, grid64, cat_state, params):
        base = collapse_rate_density(cat_state, 1, params)
        for c in (2.0, 1j, -0.3 + 0.4j):
            scaled = cat_state.with_values(cat_state.values * c)
            d = collapse_rate_density(scaled, 1, params)
            assert np.max(np.abs(d.values - base.values)) <= 1e-12

    def test_gaussian_widens_by_convolution(self, grid64, params):
        # closed form: N(0, s^2) smoothed by N(0, sigma^2) is N(0, s^2+sigma^2)
        s = 1.2
        psi = normalize(ComplexField(grid64, gaussian_packet(grid64, 0.0, s)))
        d = collapse_rate_density(psi, 1, params)
        x = grid64.axis_coords()
        expected = params.lambda_rate * wrapped_gaussian(
            x, 0.0, np.sqrt(s**2 + params.sigma**2), grid64.length
        )
        assert np.max(np.abs(d.values - expected)) < 1e-6

    def test_uniform_state_constant_rate(self, grid64, params):
        psi = normalize(ComplexField(grid64, np.ones(64)))
        d = collapse_rate_density(psi, 1, params)
        assert np.allclose(d.values, params.lambda_rate / grid64.length, atol=1e-12)

    def test_total_rate_state_independent(self, grid64, params, cat_state, packet):
        for psi in (cat_state, packet):
            d = collapse_rate_density(psi, 1, params)
            assert d.total == pytest.approx(params.lambda_rate, abs=1e-8)

    def test_zero_field_rejected(self, grid64, params):
        psi = ComplexField(grid64, np.zeros(64))
        with pytest.raises(ValueError):
            collapse_rate_density(psi, 1, params)


class TestRunCollapse:
    def test_no_jump_limit(self, grid64, free_h, packet):
        tiny = TheoryParams(lambda_rate=1e-12, sigma=0.8)
        run = run_grw_collapse(packet, 0.0, 1.0, free_h, tiny, derive_rng(1), cadence=4)
        assert len(run.flashes) == 0
        final = run.checkpoints.fields[-1]
        pure = evolve(packet, free_h, 1.0)
        assert norm(final.with_values(final.values - pure.values)) < 1e-10

    def test_poisson_flash_count_two_particles(self):
        # total rate N*lambda independent of the state (the center density
        # integrates to lambda per label)
        g = GridSpec(2, 16, 20.0, -10.0)
        x = g.axis_coords()
        psi = normalize(
            ComplexField(g, np.exp(-(x[:, None] ** 2) / 8 - ((x[None, :] - 1) ** 2) / 6))
        )
        h = HamiltonianSpec(masses=(1.0, 1.0))
        params = TheoryParams(lambda_rate=5.0, sigma=1.9)
        n_runs, t_span = 500, 10.0
        counts = [
            len(run_grw_collapse(psi, 0.0, t_span, h, params, derive_rng(7, j), cadence=0).flashes)
            for j in range(n_runs)
        ]
        counts = np.asarray(counts, dtype=float)
        expected = 2 * params.lambda_rate * t_span
        se = np.sqrt(expected / n_runs)
        assert abs(counts.mean() - expected) <= 3 * se

    def test_flash_count_arithmetic_macroscopic(self):
        # rate-formula check only: 1e23 degrees of freedom at 1e-15 per second
        # flash per label gives 1e8 flashes per second in total
        lam, n_dof = 1e-15, 1e23
        assert n_dof * lam == pytest.approx(1e8)
        params = TheoryParams(lambda_rate=lam, sigma=1e-7)
        assert float(np.sum(params.rates(4))) == pytest.approx(4 * lam)

    def test_checkpoints_cover_flashes_and_cadence(self, grid64, free_h, cat_state, params):
        run = run_grw_collapse(cat_state, 0.0, 2.0, free_h, params, derive_rng(3), cadence=5)
        times = run.checkpoints.times
        for fl in run.flashes:
            assert np.any(np.isclose(times, fl.t))
        for frac in range(1, 6):
            assert np.any(np.isclose(times, 2.0 * frac / 5))

    def test_t_max_before_t0_rejected(self, grid64, free_h, packet, params):
        with pytest.raises(ValueError):
            run_grw_collapse(packet, 1.0, 0.0, free_h, params, derive_rng(0))


class TestJointDensity:
    def test_empty_history_survival(self, grid64, free_h, packet, params):
        p = flash_joint_density([], packet, 0.0, free_h, params, t_end=2.0)
        assert p == pytest.approx(np.exp(-params.lambda_rate * 2.0), rel=1e-12)

    def test_sampled_histories_have_positive_density(self, grid64, free_h, cat_state, params):
        for j in range(5):
            run = run_grw_collapse(cat_state, 0.0, 2.0, free_h, params, derive_rng(j), cadence=0)
            d = flash_joint_density(run.flashes, cat_state, 0.0, free_h, params, t_end=2.0)
            assert np.isfinite(d) and d > 0

    def test_label_exchange_symmetry(self):
        g = GridSpec(2, 16, 20.0, -10.0)
        x = g.axis_coords()
        sym = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / 6) * (
            1 + 0.3 * np.cos(2 * np.pi * (x[:, None] + x[None, :]) / 20)
        )
        psi = normalize(ComplexField(g, sym))
        h = HamiltonianSpec(masses=(1.0, 1.0))
        params = TheoryParams(lambda_rate=1.0, sigma=1.9)
        hist = [Flash(0.4, 1.3, 1), Flash(0.9, -2.2, 2), Flash(1.5, 0.7, 1)]
        swapped = [Flash(f.t, f.x, 3 - f.label) for f in hist]
        a = flash_joint_density(hist, psi, 0.0, h, params)
        b = flash_joint_density(swapped, psi, 0.0, h, params)
        assert a == pytest.approx(b, rel=1e-12)

    def test_unordered_history_rejected(self, grid64, free_h, packet, params):
        bad = [Flash(1.0, 0.0, 1), Flash(0.5, 0.0, 1)]
        with pytest.raises(ValueError):
            flash_joint_density(bad, packet, 0.0, free_h, params)


class TestHeisenbergFactors:
    def test_zero_evolution_is_plain_multiplication(self, grid64, free_h, cat_state, params):
        out = heisenberg_collapse_sqrt(cat_state, 1, 2.0, 0.7, 0.7, free_h, params)
        x = grid64.axis_coords()
        kern = np.sqrt(wrapped_gaussian(x, 2.0, params.sigma, grid64.length))
        assert np.max(np.abs(out.values - cat_state.values * kern)) < 1e-12

    def test_matches_interleaved_product(self, grid64, free_h, cat_state, params):
        # oracle: the interleaved evolve/multiply product applied from t0
        t0, t = 0.0, 1.2
        flashes = [Flash(0.4, 3.6, 1), Flash(0.9, 4.4, 1)]
        psi_l = evolve(cat_state, free_h, t - t0)
        rec = reconstruct_collapsed(psi_l, flashes, t, free_h, params)

        x = grid64.axis_coords()
        state = evolve(cat_state, free_h, 0.4)
        state = state.with_values(
            state.values * np.sqrt(wrapped_gaussian(x, 3.6, params.sigma, grid64.length))
        )
        state = evolve(state, free_h, 0.5)
        state = state.with_values(
            state.values * np.sqrt(wrapped_gaussian(x, 4.4, params.sigma, grid64.length))
        )
        state = evolve(state, free_h, t - 0.9)
        state = state.with_values(state.values / norm(state))
        phase = inner(state, rec)
        phase /= abs(phase)
        assert norm(rec.with_values(rec.values - phase * state.values)) < 1e-10

    def test_unitarity_sandwich(self, grid64, free_h, cat_state, params):
        hit = heisenberg_collapse_sqrt(cat_state, 1, 4.0, 0.3, 1.0, free_h, params)
        back = evolve(cat_state, free_h, 0.3 - 1.0)
        x = grid64.axis_coords()
        ref = back.with_values(
            back.values * np.sqrt(wrapped_gaussian(x, 4.0, params.sigma, grid64.length))
        )
        assert norm(hit) == pytest.approx(norm(ref), abs=1e-12)


class TestReconstruction:
    def test_empty_history_identity(self, grid64, free_h, cat_state, params):
        psi_l = evolve(cat_state, free_h, 0.8)
        rec = reconstruct_collapsed(psi_l, [], 0.8, free_h, params)
        assert norm(rec.with_values(rec.values - psi_l.values)) < 1e-12

    def test_single_flash_equals_apply_collapse(self, grid64, free_h, cat_state, params):
        psi_l = evolve(cat_state, free_h, 0.6)
        rec = reconstruct_collapsed(psi_l, [Flash(0.6, 4.0, 1)], 0.6, free_h, params)
        direct = apply_collapse(psi_l, 1, 4.0, params.sigma)
        assert norm(rec.with_values(rec.values - direct.values)) < 1e-12

    def test_matches_run_checkpoints(self, grid64, free_h, cat_state, params):
        run = run_grw_collapse(cat_state, 0.0, 2.0, free_h, params, derive_rng(11), cadence=6)
        assert len(run.flashes) >= 1
        for t, chk in zip(run.checkpoints.times, run.checkpoints.fields):
            psi_l = evolve(cat_state, free_h, float(t))
            hist = [f for f in run.flashes if f.t <= t]
            rec = reconstruct_collapsed(psi_l, hist, float(t), free_h, params)
            assert abs(inner(rec, chk)) >= 1.0 - 1e-8


class TestLinearFormulation:
    def test_coupled_streams_bit_identical(self, grid64, free_h, cat_state, params):
        rc = run_grw_collapse(cat_state, 0.0, 3.0, free_h, params, derive_rng(21), cadence=0)
        rl = run_grw_linear(cat_state, 0.0, 3.0, free_h, params, derive_rng(21), cadence=0)
        assert len(rc.flashes) == len(rl.flashes) > 0
        for fc, fl in zip(rc.flashes, rl.flashes):
            assert (fc.t, fc.x, fc.label) == (fl.t, fl.x, fl.label)

    def test_no_jump_limit_empty(self, grid64, free_h, packet):
        tiny = TheoryParams(lambda_rate=1e-12, sigma=0.8)
        run = run_grw_linear(packet, 0.0, 1.0, free_h, tiny, derive_rng(5), cadence=0)
        assert len(run.flashes) == 0

    def test_linear_checkpoints_stay_uncollapsed(self, grid64, free_h, cat_state, params):
        run = run_grw_linear(cat_state, 0.0, 2.0, free_h, params, derive_rng(22), cadence=4)
        for t, f in zip(run.checkpoints.times, run.checkpoints.fields):
            pure = evolve(cat_state, free_h, float(t))
            assert norm(f.with_values(f.values - pure.values)) < 1e-9


def _predictive_location_density(state, t_from, h, params, horizon, n_nodes=25):
    """Location density of the first flash after t_from, by quadrature over
    its exponential arrival time."""
    ts = np.linspace(t_from, t_from + horizon, n_nodes)
    weights = params.lambda_rate * np.exp(-params.lambda_rate * (ts - t_from))
    acc = None
    for t, w in zip(ts, weights):
        st = evolve(state, h, float(t - t_from))
        dens = gaussian_smooth(marginal(st, 1), params.sigma)
        acc = w * dens.values if acc is None else acc + w * dens.values
    acc /= acc.sum() * state.grid.dx
    return acc


def test_flash_process_non_markov(grid64, free_h):
    """Conditioning on a flash-free strip is measurably different from
    conditioning on the full past: the strip forgets which branch collapsed.
    Total-variation distance of the two predictive densities must exceed
    0.05."""
    params = TheoryParams(lambda_rate=2.0, sigma=0.8)
    h = HamiltonianSpec(masses=(16.0,))
    vals = gaussian_packet(grid64, 4.0, 0.5) + gaussian_packet(grid64, -4.0, 0.5)
    cat = normalize(ComplexField(grid64, vals))
    t1, t2, horizon = 0.5, 0.75, 1.5

    # full past: a single resolving flash on the + branch before the strip
    past = [Flash(0.3, 4.0, 1)]
    state_b = evolve(apply_collapse(evolve(cat, h, 0.3), 1, 4.0, params.sigma), h, t2 - 0.3)
    dens_b = _predictive_location_density(state_b, t2, h, params, horizon)

    # strip only: average the predictive density over pasts consistent with
    # "no flash in (t1, t2)" (Rao-Blackwellized Monte Carlo mixture)
    acc = np.zeros(grid64.cells)
    kept = 0
    j = 0
    while kept < 120 and j < 2000:
        run = run_grw_collapse(cat, 0.0, t2, h, params, derive_rng(31, j), cadence=1)
        j += 1
        if any(t1 < fl.t < t2 for fl in run.flashes):
            continue
        state = run.checkpoints.fields[-1]
        acc += _predictive_location_density(state, t2, h, params, horizon)
        kept += 1
    assert kept >= 100
    dens_a = acc / (acc.sum() * grid64.dx)
    tv = 0.5 * np.sum(np.abs(dens_a - dens_b)) * grid64.dx
    assert tv > 0.05


def test_flash_history_validation():
    with pytest.raises(ValueError):
        FlashHistory((Flash(1.0, 0.0, 1), Flash(1.0, 0.5, 1)))  # tie
    hist = FlashHistory((Flash(0.0, 0.0, 1), Flash(1.0, 0.5, 2)))
    assert np.array_equal(hist.labels(), [1, 2])


def test_theory_params_validation():
    with pytest.raises(ValueError):
        TheoryParams(lambda_rate=0.0, sigma=1.0)
    with pytest.raises(ValueError):
        TheoryParams(lambda_rate=1.0, sigma=-1.0)
    p = TheoryParams(lambda_rate=1.0, sigma=1.0, per_label_rates=(1.0, 2.0))
    assert np.allclose(p.rates(2), [1.0, 2.0])
    with pytest.raises(ValueError):
        p.rates(3)


def test_collapse_linear_joint_law_coarse_chi_square(grid64, free_h, cat_state, params):
    """Joint law of the first two flashes agrees between the formulations:
    coarse 2x2x2x2 binning of (t1, sign x1, t2, sign x2) and a two-sample
    contingency chi-square at alpha = 0.01."""
    from scipy.stats import chi2_contingency

    t_max = 3.0
    n = 1500

    def joint_cells(runner, base):
        cells = []
        for j in range(n):
            run = runner(cat_state, 0.0, t_max, free_h, params, derive_rng(61, base + j),
                         cadence=0)
            fls = list(run.flashes)[:2]
            if len(fls) < 2:
                continue
            cell = (
                int(fls[0].t > 0.5),
                int(fls[0].x > 0),
                int(fls[1].t - fls[0].t > 0.5),
                int(fls[1].x > 0),
            )
            cells.append(cell)
        return cells

    a = joint_cells(run_grw_collapse, 0)
    b = joint_cells(run_grw_linear, 500_000)
    table = np.zeros((2, 16))
    for row, cells in enumerate((a, b)):
        for c in cells:
            table[row, c[0] * 8 + c[1] * 4 + c[2] * 2 + c[3]] += 1
    # drop cells empty in both samples
    table = table[:, table.sum(axis=0) > 0]
    _, p, _, _ = chi2_contingency(table)
    assert p > 0.01
