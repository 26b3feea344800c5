import numpy as np
import pytest

from ontosim.bohm import (
    Trajectory,
    VelocityPath,
    bmc_pde_residual,
    bmc_transform,
    bmc_velocity,
    bohm_velocity,
    integrate_trajectory,
    sample_equilibrium,
)
from ontosim.dynamics import WavePath, evolve
from ontosim.errors import NodeStall
from ontosim.grids import ComplexField, GridSpec, marginal, norm, normalize
from ontosim.grw import unitary_path
from ontosim.presets import gaussian_packet
from ontosim.stats import ks_vs_gridded_density
from ontosim.symmetry import boost_wavefunction


class TestVelocity:
    def test_real_field_zero_velocity(self, grid64, free_h, packet):
        v = bohm_velocity(packet, np.array([0.7]), free_h)
        assert abs(v[0]) < 1e-12

    def test_plane_wave_velocity(self, grid64, free_h):
        k = 2 * np.pi * 3 / grid64.length
        pw = normalize(ComplexField(grid64, np.exp(1j * k * grid64.axis_coords())))
        for q in (-7.3, 0.0, 4.111):
            v = bohm_velocity(pw, np.array([q]), free_h)
            assert v[0] == pytest.approx(k, abs=1e-6)

    def test_boost_covariance(self, grid64, free_h):
        # velocity from the boosted state at q + v t equals the velocity from
        # the original state at q, plus the boost velocity
        vb = 2 * np.pi * 2 / grid64.length
        t = 0.6
        psi = normalize(ComplexField(grid64, gaussian_packet(grid64, -1.0, 1.2, vb)))
        psi_t = evolve(psi, free_h, t)
        boosted = boost_wavefunction(psi_t, vb, t, free_h)
        for q in (-1.0, 0.4):
            v_plain = bohm_velocity(psi_t, np.array([q]), free_h)
            v_boost = bohm_velocity(boosted, np.array([q + vb * t]), free_h)
            assert v_boost[0] == pytest.approx(v_plain[0] + vb, abs=1e-6)

    def test_node_stall(self, grid64, free_h):
        vals = gaussian_packet(grid64, 5.0, 0.3)
        psi = normalize(ComplexField(grid64, vals))
        with pytest.raises(NodeStall):
            bohm_velocity(psi, np.array([-5.0]), free_h)


class TestIntegration:
    def test_plane_wave_straight_line(self, grid64, free_h):
        k = 2 * np.pi * 2 / grid64.length
        pw = normalize(ComplexField(grid64, np.exp(1j * k * grid64.axis_coords())))
        path = WavePath([0.0, 1.0], [pw, evolve(pw, free_h, 1.0)])
        tr = integrate_trajectory(path, np.array([-3.0]), 0.0, 1.0, 0.01, free_h)
        endpoint = tr.endpoint()[0]
        expected = -3.0 + k * 1.0
        assert abs(endpoint - expected) <= 1e-4 * grid64.length

    def test_real_stationary_state_is_static(self, grid64, harmonic_h):
        psi = normalize(ComplexField(grid64, gaussian_packet(grid64, 0.0, np.sqrt(0.5))))
        path = unitary_path(psi, 0.0, 1.0, harmonic_h, cadence=20, max_step=0.002)
        tr = integrate_trajectory(path, np.array([0.9]), 0.0, 1.0, 0.01, harmonic_h)
        drift = np.max(np.abs(tr.configs - 0.9))
        assert drift < 1e-6

    def test_rk4_fourth_order_convergence(self, grid64, harmonic_h):
        # analytic coherent-state path sampled exactly at every stage time, so
        # the only integrator error is the RK4 truncation term
        x0 = 1.0
        w = np.sqrt(0.5)

        def coherent(t):
            c = x0 * np.cos(t)
            p = -x0 * np.sin(t)
            vals = gaussian_packet(grid64, c, w, p)
            return normalize(ComplexField(grid64, vals))

        t_max = 1.0
        endpoints = {}
        for dt in (0.1, 0.05, 0.1 / 16):
            times = np.arange(0.0, t_max + dt / 4, dt / 2)
            vp = VelocityPath.from_callable(coherent, times, harmonic_h)
            tr = integrate_trajectory(vp, np.array([1.8]), 0.0, t_max, dt)
            endpoints[dt] = tr.endpoint()[0]
        ref = endpoints[0.1 / 16]
        ratio = abs(endpoints[0.1] - ref) / abs(endpoints[0.05] - ref)
        assert ratio > 10.0  # ~16x for a 4th-order scheme

    def test_single_trajectory_determinism(self, grid64, free_h, packet):
        path = unitary_path(packet, 0.0, 1.0, free_h, cadence=10)
        a = integrate_trajectory(path, np.array([0.3]), 0.0, 1.0, 0.01, free_h)
        b = integrate_trajectory(path, np.array([0.3]), 0.0, 1.0, 0.01, free_h)
        assert np.array_equal(a.configs, b.configs)


class TestSampleEquilibrium:
    def test_product_state_marginals(self, grid2d):
        f1 = gaussian_packet(GridSpec(1, 32, 20.0, -10.0), -2.0, 1.0)
        f2 = gaussian_packet(GridSpec(1, 32, 20.0, -10.0), 3.0, 0.7)
        psi = normalize(ComplexField(grid2d, np.outer(f1, f2)))
        qs = sample_equilibrium(psi, np.random.default_rng(0), size=4000)
        for ax in range(2):
            rep = ks_vs_gridded_density(qs[:, ax], marginal(psi, ax + 1))
            assert rep.p_value > 0.01

    def test_concentrated_state(self, grid64):
        vals = np.zeros(64)
        vals[20] = 1.0
        psi = normalize(ComplexField(grid64, vals))
        qs = sample_equilibrium(psi, np.random.default_rng(1), size=100)
        center = grid64.axis_coords()[20]
        assert np.all(np.abs(qs - center) <= grid64.dx / 2 + 1e-12)

    def test_uniform_state(self, grid64):
        from scipy import stats as sps

        psi = normalize(ComplexField(grid64, np.ones(64)))
        qs = sample_equilibrium(psi, np.random.default_rng(2), size=8000)[:, 0]
        res = sps.kstest(qs, sps.uniform(loc=-10.0, scale=20.0).cdf)
        assert res.pvalue > 0.01


class TestBmc:
    def test_large_sigma_is_identity_up_to_scale(self, grid64, packet):
        # the ratio deviates by exactly (q-Q)^2/(2 sigma^2); at sigma = 100 L
        # the domain-edge bound is 1.25e-5, and 1e-8 needs sigma ~ 4000 L
        sigma = 100.0 * grid64.length
        damped = bmc_transform(packet, np.array([1.0]), sigma)
        ratio = damped.values / packet.values
        edge_bound = (grid64.length / 2 + 1.0) ** 2 / (2 * sigma**2)
        assert np.max(np.abs(ratio - ratio.flat[0])) < edge_bound
        huge = 1e4 * grid64.length
        damped = bmc_transform(packet, np.array([1.0]), huge)
        ratio = damped.values / packet.values
        assert np.max(np.abs(ratio - ratio.flat[0])) < 1e-8

    def test_cat_far_bump_suppressed(self, grid64, cat_state):
        sigma = 0.8
        damped = bmc_transform(cat_state, np.array([4.0]), sigma)
        far = np.abs(damped.values[grid64.axis_coords() < -2.0])
        near = np.abs(damped.values).max()
        assert far.max() / near < np.exp(-30.0)

    def test_norm_never_increases(self, grid64, cat_state):
        damped = bmc_transform(cat_state, np.array([2.0]), 1.0)
        assert norm(damped) <= norm(cat_state) + 1e-12

    def test_velocity_matches_undamped(self, free_h):
        # the damped field must resolve the window-times-state product, so
        # this runs on a grid fine enough that the product stays band-limited
        g = GridSpec(1, 128, 20.0, -10.0)
        cat = normalize(
            ComplexField(g, gaussian_packet(g, 4.0, 0.5) + gaussian_packet(g, -4.0, 0.5))
        )
        psi_t = evolve(cat, free_h, 0.3)
        for q in (3.4, 4.0, 4.9):
            damped = bmc_transform(psi_t, np.array([q]), 0.8)
            v_c = bmc_velocity(damped, np.array([q]), free_h)
            v = bohm_velocity(psi_t, np.array([q]), free_h)
            assert v_c[0] == pytest.approx(v[0], abs=1e-8)

    def test_damped_plane_wave_velocity(self, grid64, free_h):
        k = 2 * np.pi * 3 / grid64.length
        pw = normalize(ComplexField(grid64, np.exp(1j * k * grid64.axis_coords())))
        damped = bmc_transform(pw, np.array([1.0]), 0.8)
        v = bmc_velocity(damped, np.array([1.0]), free_h)
        assert v[0] == pytest.approx(k, abs=1e-6)

    def test_real_damped_field_zero_velocity(self, grid64, free_h, packet):
        damped = bmc_transform(packet, np.array([0.5]), 0.8)
        assert abs(bmc_velocity(damped, np.array([0.5]), free_h)[0]) < 1e-10


class TestResidual:
    def test_residual_second_order(self, free_h):
        resids = []
        for cells, dt in ((64, 0.02), (128, 0.01)):
            g = GridSpec(1, cells, 20.0, -10.0)
            psi0 = normalize(ComplexField(g, gaussian_packet(g, 0.0, 1.0, 2 * np.pi * 2 / 20)))
            path = unitary_path(psi0, 0.0, 1.0, free_h, cadence=int(1.0 / (dt / 2)))
            tr = integrate_trajectory(path, np.array([1.0]), 0.0, 1.0, dt / 4, free_h)
            resids.append(bmc_pde_residual(path, tr, 0.5, dt, 0.8, free_h))
        assert resids[0] / resids[1] >= 3.5

    def test_large_sigma_reduces_to_schroedinger_residual(self, grid64, free_h):
        psi0 = normalize(ComplexField(grid64, gaussian_packet(grid64, 0.0, 1.0, 0.6283185307179586)))
        dt = 0.01
        path = unitary_path(psi0, 0.0, 0.5, free_h, cadence=100)
        tr = integrate_trajectory(path, np.array([0.5]), 0.0, 0.5, dt, free_h)
        big_sigma = 50.0 * grid64.length
        res_big = bmc_pde_residual(path, tr, 0.25, dt, big_sigma, free_h)

        # plain Schroedinger residual with the same central difference
        f_minus, f_mid, f_plus = (path.field_at(t) for t in (0.25 - dt, 0.25, 0.25 + dt))
        d_dt = (f_plus.values - f_minus.values) / (2 * dt)
        k = grid64.wavenumbers()
        lap = np.fft.ifft(np.fft.fft(f_mid.values) * (1j * k) ** 2)
        resid = 1j * d_dt + 0.5 * lap
        res_plain = norm(f_mid.with_values(resid))
        assert abs(res_big - res_plain) < 1e-8


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)))
    tr = Trajectory(np.array([0.0, 1.0, 2.0]), np.array([[0.0], [1.0], [4.0]]))
    assert tr.at(0.5)[0] == pytest.approx(0.5)
    assert tr.at(1.5)[0] == pytest.approx(2.5)
