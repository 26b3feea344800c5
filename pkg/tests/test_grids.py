import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ontosim.grids import (
    ComplexField,
    GridSpec,
    RealField1D,
    density_cdf,
    gaussian_smooth,
    inner,
    marginal,
    mixture_density,
    norm,
    normalize,
    sample_density,
    wrapped_gaussian,
)
from ontosim.presets import gaussian_packet


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(5, 16, 1.0)
    with pytest.raises(ValueError):
        GridSpec(1, 48, 1.0)  # not a power of two
    with pytest.raises(ValueError):
        GridSpec(1, 16, -1.0)
    g = GridSpec(2, 16, 4.0, -2.0)
    assert g.size == 256
    assert g.dx == pytest.approx(0.25)


def test_field_shape_and_finite(grid64):
    with pytest.raises(ValueError):
        ComplexField(grid64, np.zeros(32))
    bad = np.zeros(64, dtype=complex)
    bad[0] = np.nan
    with pytest.raises(ValueError):
        ComplexField(grid64, bad)


def test_real_field_declared_total():
    vals = np.full(16, 0.5)
    f = RealField1D(16, 8.0, vals, declared_total=4.0)
    assert f.total == pytest.approx(4.0)
    with pytest.raises(ValueError):
        RealField1D(16, 8.0, vals, declared_total=1.0)
    with pytest.raises(ValueError):
        RealField1D(16, 8.0, -vals)


class TestInner:
    def test_normalized_self_inner(self, packet):
        assert inner(packet, packet) == pytest.approx(1.0, abs=1e-10)

    def test_conjugate_symmetry(self, grid64):
        r = np.random.default_rng(3)
        a = ComplexField(grid64, r.standard_normal(64) + 1j * r.standard_normal(64))
        b = ComplexField(grid64, r.standard_normal(64) + 1j * r.standard_normal(64))
        assert inner(a, b) == pytest.approx(np.conj(inner(b, a)), abs=1e-12)

    def test_disjoint_bumps_orthogonal(self, grid64):
        a = normalize(ComplexField(grid64, gaussian_packet(grid64, -6.0, 0.3)))
        b = normalize(ComplexField(grid64, gaussian_packet(grid64, 6.0, 0.3)))
        assert abs(inner(a, b)) <= 1e-12

    def test_grid_mismatch(self, grid64):
        other = GridSpec(1, 32, 20.0, -10.0)
        a = ComplexField(grid64, np.ones(64))
        b = ComplexField(other, np.ones(32))
        with pytest.raises(ValueError):
            inner(a, b)


class TestMarginal:
    def test_product_state_factorizes(self, grid2d):
        x = grid2d.axis_coords()
        f1 = gaussian_packet_1d(grid2d, -2.0, 1.0)
        f2 = gaussian_packet_1d(grid2d, 3.0, 0.7)
        prod = np.outer(f1, f2)
        psi = normalize(ComplexField(grid2d, prod))
        m1 = marginal(psi, 1)
        expected = np.abs(f1) ** 2
        expected /= expected.sum() * grid2d.dx
        assert np.max(np.abs(m1.values - expected)) < 1e-10

    def test_uniform_state(self, grid2d):
        psi = normalize(ComplexField(grid2d, np.ones(grid2d.shape)))
        m2 = marginal(psi, 2)
        assert np.allclose(m2.values, 1.0 / grid2d.length, atol=1e-12)

    def test_entangled_vs_bruteforce(self, grid2d):
        # independent oracle: nested-loop summation over all cells
        x = grid2d.axis_coords()
        vals = np.zeros(grid2d.shape, dtype=complex)
        for i in range(grid2d.cells):
            for j in range(grid2d.cells):
                vals[i, j] = np.exp(-((x[i] - 2) ** 2 + (x[j] + 2) ** 2) / 4.0) + 0.5 * np.exp(
                    -((x[i] + 2) ** 2 + (x[j] - 2) ** 2) / 2.0
                )
        psi = normalize(ComplexField(grid2d, vals))
        m1 = marginal(psi, 1)
        dens = np.abs(psi.values) ** 2
        brute = np.array(
            [sum(dens[i, j] for j in range(grid2d.cells)) * grid2d.dx for i in range(grid2d.cells)]
        )
        assert np.max(np.abs(m1.values - brute)) < 1e-10
        assert m1.total == pytest.approx(1.0, abs=1e-8)

    def test_axis_range_and_normalization_errors(self, grid2d, packet):
        psi = normalize(ComplexField(grid2d, np.ones(grid2d.shape)))
        with pytest.raises(ValueError):
            marginal(psi, 3)
        unnorm = psi.with_values(psi.values * 2.0)
        with pytest.raises(ValueError, match="normalized"):
            marginal(unnorm, 1)

    def test_mixture_linearity(self, grid64):
        a = normalize(ComplexField(grid64, gaussian_packet(grid64, -3.0, 1.0)))
        b = normalize(ComplexField(grid64, gaussian_packet(grid64, 3.0, 0.5)))
        mix = mixture_density([marginal(a, 1), marginal(b, 1)], [0.3, 0.7])
        dens = 0.3 * np.abs(a.values) ** 2 + 0.7 * np.abs(b.values) ** 2
        assert np.allclose(mix.values, dens, atol=1e-12)


def gaussian_packet_1d(grid, center, width):
    x = grid.axis_coords()
    d = np.mod(x - center + grid.length / 2, grid.length) - grid.length / 2
    return np.exp(-(d**2) / (4 * width**2))


class TestGaussianSmooth:
    def test_impulse_response(self):
        f = RealField1D(64, 20.0, np.eye(64)[10] / (20.0 / 64), origin=-10.0)
        sm = gaussian_smooth(f, 0.8)
        x = f.axis_coords()
        expected = wrapped_gaussian(x, x[10], 0.8, 20.0)
        assert np.max(np.abs(sm.values - expected)) < 1e-6

    def test_constant_preserved(self):
        f = RealField1D(32, 10.0, np.full(32, 0.37))
        sm = gaussian_smooth(f, 1.1)
        assert np.allclose(sm.values, 0.37, atol=1e-12)

    def test_two_delta_vs_direct_convolution(self):
        # independent oracle: direct O(n^2) periodic convolution
        cells, length, sigma = 64, 20.0, 0.9
        dx = length / cells
        vals = np.zeros(cells)
        vals[5], vals[40] = 2.0 / dx, 1.0 / dx
        f = RealField1D(cells, length, vals, origin=0.0)
        sm = gaussian_smooth(f, sigma)
        kern = wrapped_gaussian(dx * np.arange(cells), 0.0, sigma, length)
        kern = kern / (kern.sum() * dx)
        direct = np.zeros(cells)
        for n in range(cells):
            for m in range(cells):
                direct[n] += vals[m] * kern[(n - m) % cells] * dx
        assert np.max(np.abs(sm.values - direct)) < 1e-10

    def test_mass_preserved(self):
        r = np.random.default_rng(5)
        f = RealField1D(128, 7.0, r.random(128))
        sm = gaussian_smooth(f, 0.3)
        assert sm.total == pytest.approx(f.total, abs=1e-10)

    def test_sigma_validation(self):
        f = RealField1D(16, 1.0, np.ones(16))
        with pytest.raises(ValueError):
            gaussian_smooth(f, 0.0)


class TestSampleDensity:
    def test_delta_density(self):
        cells, length = 32, 8.0
        vals = np.zeros(cells)
        vals[7] = 1.0
        f = RealField1D(cells, length, vals, origin=0.0)
        xs = sample_density(f, np.random.default_rng(0), size=200)
        center = f.axis_coords()[7]
        d = np.abs(np.mod(xs - center + length / 2, length) - length / 2)
        assert np.all(d <= f.dx / 2 + 1e-12)

    def test_uniform_ks(self):
        from scipy import stats as sps

        f = RealField1D(16, 4.0, np.ones(16), origin=1.0)
        xs = sample_density(f, np.random.default_rng(1), size=10_000)
        assert np.all((xs >= 1.0) & (xs < 5.0))
        res = sps.kstest(xs, sps.uniform(loc=1.0, scale=4.0).cdf)
        assert res.pvalue > 0.01

    def test_gaussian_mean(self):
        cells, length = 64, 20.0
        f_vals = wrapped_gaussian(np.arange(cells) * (length / cells) - 10.0, 1.5, 1.0, length)
        f = RealField1D(cells, length, f_vals, origin=-10.0)
        xs = sample_density(f, np.random.default_rng(2), size=10_000)
        se = 1.0 / np.sqrt(xs.size)
        assert abs(xs.mean() - 1.5) < 3 * se

    def test_zero_density_rejected(self):
        f = RealField1D(8, 1.0, np.zeros(8))
        with pytest.raises(ValueError):
            sample_density(f, np.random.default_rng(0))

    def test_histogram_chi_square(self):
        # sampled histograms converge to the density
        from ontosim.stats import chi_square_vs_density

        cells = 16
        r = np.random.default_rng(7)
        vals = r.random(cells) + 0.1
        f = RealField1D(cells, 4.0, vals, origin=0.0)
        xs = sample_density(f, np.random.default_rng(8), size=100_000)
        rep = chi_square_vs_density(xs, f, bins=16)
        assert rep.p_value > 0.01


def test_density_cdf_endpoints_and_monotone():
    r = np.random.default_rng(11)
    f = RealField1D(32, 5.0, r.random(32) + 0.05, origin=-2.5)
    xs = np.linspace(-2.5, 2.5, 301)
    cdf = density_cdf(f, xs)
    assert cdf[0] == pytest.approx(0.0, abs=1e-12)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(cdf) >= -1e-12)


def test_smooth_of_marginal_matches_direct_quadrature(grid2d):
    """Smoothing the marginal equals the collapse-operator expectation
    computed by direct quadrature on the full grid."""
    x = grid2d.axis_coords()
    vals = np.exp(-((x[:, None] - 1.0) ** 2) / 4 - ((x[None, :] + 1.0) ** 2) / 2) + 0.3 * np.exp(
        -((x[:, None] + 3.0) ** 2) / 2 - ((x[None, :] - 2.0) ** 2) / 3
    )
    psi = normalize(ComplexField(grid2d, vals))
    sigma = 1.1
    sm = gaussian_smooth(marginal(psi, 1), sigma)
    dens = np.abs(psi.values) ** 2
    direct = np.empty(grid2d.cells)
    for k in range(grid2d.cells):
        kern = wrapped_gaussian(x, x[k], sigma, grid2d.length)  # over q1
        direct[k] = np.sum(kern[:, None] * dens) * grid2d.dx**2
    assert np.max(np.abs(sm.values - direct)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(
    w=st.floats(0.3, 3.0),
    c=st.floats(-9.0, 9.0),
    scale=st.complex_numbers(min_magnitude=0.1, max_magnitude=5.0),
)
def test_norm_scales_linearly(w, c, scale):
    g = GridSpec(1, 64, 20.0, -10.0)
    psi = ComplexField(g, gaussian_packet(g, c, w))
    assert norm(psi.with_values(psi.values * scale)) == pytest.approx(
        abs(scale) * norm(psi), rel=1e-12
    )
