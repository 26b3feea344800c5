import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ontosim.bohm import Trajectory, integrate_trajectory
from ontosim.dynamics import HamiltonianSpec, evolve
from ontosim.grids import ComplexField, norm, normalize
from ontosim.grw import Flash, FlashHistory, unitary_path
from ontosim.presets import gaussian_packet
from ontosim.symmetry import (
    boost_commutation_defect,
    boost_flashes,
    boost_trajectory,
    boost_wavefunction,
    gauge_transform,
)

COMMENSURATE_V = 2 * np.pi * 2 / 20.0  # two reciprocal-lattice cycles at m=1


class TestBoostWavefunction:
    def test_zero_velocity_identity(self, grid64, free_h, packet):
        out = boost_wavefunction(packet, 0.0, 1.3, free_h)
        assert np.max(np.abs(out.values - packet.values)) < 1e-12

    def test_norm_preserved(self, grid64, free_h, packet):
        out = boost_wavefunction(packet, COMMENSURATE_V, 0.7, free_h)
        assert abs(norm(out) - 1.0) < 1e-12

    def test_plane_wave_momentum_shift(self, grid64, free_h):
        k = 2 * np.pi * 3 / grid64.length
        x = grid64.axis_coords()
        pw = normalize(ComplexField(grid64, np.exp(1j * k * x)))
        out = boost_wavefunction(pw, COMMENSURATE_V, 0.0, free_h)
        expected = normalize(ComplexField(grid64, np.exp(1j * (k + COMMENSURATE_V) * x)))
        phase = np.vdot(expected.values, out.values)
        phase /= abs(phase)
        assert np.max(np.abs(out.values - phase * expected.values)) < 1e-12

    def test_incommensurate_rejected(self, grid64, free_h, packet):
        with pytest.raises(ValueError, match="not periodic"):
            boost_wavefunction(packet, 0.77, 0.0, free_h)

    def test_boost_commutes_with_free_evolution(self, grid64, free_h, packet):
        # boost of the evolved state equals evolution of the boosted state
        t = 0.9
        a = boost_wavefunction(evolve(packet, free_h, t), COMMENSURATE_V, t, free_h)
        b = evolve(boost_wavefunction(packet, COMMENSURATE_V, 0.0, free_h), free_h, t)
        assert norm(a.with_values(a.values - b.values)) < 1e-10


class TestCommutationDefect:
    def test_zero_time_or_velocity(self, grid64, free_h, packet):
        assert boost_commutation_defect(packet, COMMENSURATE_V, 0.0, 1.0, 1, 0.8, free_h) < 1e-12
        assert boost_commutation_defect(packet, 0.0, 1.5, 1.0, 1, 0.8, free_h) < 1e-12

    def test_lattice_commensurate_shift(self, grid2d):
        h = HamiltonianSpec(masses=(1.0, 2.0))
        v = 2 * np.pi * 2 / 20.0
        t = 4 * grid2d.dx / v  # v*t = 4 cells
        rng = np.random.default_rng(0)
        coeff = np.zeros(grid2d.shape, dtype=complex)
        for i in range(-5, 6):
            for j in range(-5, 6):
                coeff[i % 32, j % 32] = rng.standard_normal() + 1j * rng.standard_normal()
        phi = normalize(ComplexField(grid2d, np.fft.ifftn(coeff)))
        for label in (1, 2):
            assert boost_commutation_defect(phi, v, t, 1.3, label, 0.9, h) <= 1e-10


class TestEventTransforms:
    def test_flash_boost_arithmetic(self):
        fh = FlashHistory((Flash(2.0, 1.0, 1),))
        out = boost_flashes(fh, 0.5)
        assert out[0].x == pytest.approx(2.0)
        assert out[0].t == 2.0
        assert out[0].label == 1

    @settings(max_examples=30, deadline=None)
    @given(v=st.floats(-3, 3), t1=st.floats(0.1, 5), x1=st.floats(-8, 8))
    def test_boost_round_trip(self, v, t1, x1):
        fh = FlashHistory((Flash(t1, x1, 1),))
        back = boost_flashes(boost_flashes(fh, v), -v)
        assert back[0].x == pytest.approx(x1, abs=1e-9)

    def test_trajectory_boost(self):
        tr = Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [1.0]]))
        out = boost_trajectory(tr, 2.0)
        assert np.allclose(out.configs, [[0.0], [3.0]])
        ident = boost_trajectory(out, -2.0)
        assert np.allclose(ident.configs, tr.configs)


class TestGauge:
    def test_zero_slope_identity(self, grid64, free_h, packet):
        psi2, h2 = gauge_transform(packet, 0.0, free_h)
        assert np.max(np.abs(psi2.values - packet.values)) < 1e-15
        assert h2.vector_potential == (0.0,)

    def test_modulus_unchanged(self, grid64, free_h, packet):
        slope = 2 * np.pi * 3 / grid64.length
        psi2, _ = gauge_transform(packet, slope, free_h)
        assert np.max(np.abs(np.abs(psi2.values) - np.abs(packet.values))) < 1e-12

    def test_incommensurate_slope_rejected(self, grid64, free_h, packet):
        with pytest.raises(ValueError, match="not periodic"):
            gauge_transform(packet, 0.123, free_h)

    def test_trajectories_gauge_invariant(self, grid64, free_h):
        # transformed pair (psi~, A + grad f) retraces the original trajectory
        slope = 2 * np.pi * 2 / grid64.length
        k0 = 2 * np.pi * 1 / grid64.length
        psi0 = normalize(ComplexField(grid64, gaussian_packet(grid64, -2.0, 1.2, k0)))
        t_max, dt = 1.0, 0.005
        cadence = int(np.ceil(t_max / (5 * dt)))

        path_a = unitary_path(psi0, 0.0, t_max, free_h, cadence=cadence)
        tr_a = integrate_trajectory(path_a, np.array([-2.3]), 0.0, t_max, dt, free_h)

        psi_g, h_g = gauge_transform(psi0, slope, free_h)
        path_b = unitary_path(psi_g, 0.0, t_max, h_g, cadence=cadence)
        tr_b = integrate_trajectory(path_b, np.array([-2.3]), 0.0, t_max, dt, h_g)

        dev = np.max(np.abs(tr_a.configs - tr_b.configs))
        assert dev <= 1e-6 * grid64.length


def test_bm_boost_covariance_full(grid64, free_h):
    """Independently integrated boosted trajectories equal the boosted
    originals for a free Hamiltonian."""
    v = COMMENSURATE_V
    k0 = 2 * np.pi * 1 / grid64.length
    psi0 = normalize(ComplexField(grid64, gaussian_packet(grid64, -2.0, 1.0, k0)))
    t_max, dt = 1.0, 0.005
    cadence = int(np.ceil(t_max / (5 * dt)))
    path = unitary_path(psi0, 0.0, t_max, free_h, cadence=cadence)
    tr = integrate_trajectory(path, np.array([-1.5]), 0.0, t_max, dt, free_h)

    boosted0 = boost_wavefunction(psi0, v, 0.0, free_h)
    path_b = unitary_path(boosted0, 0.0, t_max, free_h, cadence=cadence)
    tr_b = integrate_trajectory(path_b, np.array([-1.5]), 0.0, t_max, dt, free_h)

    shifted = grid64.wrap(tr.configs + v * tr.times[:, None])
    dev = np.abs(grid64.wrap(tr_b.configs) - shifted)
    dev = np.minimum(dev, grid64.length - dev)
    assert np.max(dev) <= 1e-5 * grid64.length
