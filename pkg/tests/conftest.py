import numpy as np
import pytest

from ontosim.dynamics import FreePotential, HamiltonianSpec, HarmonicPotential
from ontosim.grids import ComplexField, GridSpec, normalize
from ontosim.presets import gaussian_packet


@pytest.fixture
def grid64():
    return GridSpec(1, 64, 20.0, -10.0)


@pytest.fixture
def grid2d():
    return GridSpec(2, 32, 20.0, -10.0)


@pytest.fixture
def free_h():
    return HamiltonianSpec(masses=(1.0,), potential=FreePotential())


@pytest.fixture
def harmonic_h():
    return HamiltonianSpec(masses=(1.0,), potential=HarmonicPotential(omegas=(1.0,), centers=(0.0,)))


@pytest.fixture
def packet(grid64):
    return normalize(ComplexField(grid64, gaussian_packet(grid64, 0.0, 1.0)))


@pytest.fixture
def cat_state(grid64):
    vals = gaussian_packet(grid64, 4.0, 0.5) + gaussian_packet(grid64, -4.0, 0.5)
    return normalize(ComplexField(grid64, vals))


def rng(seed=0):
    return np.random.default_rng(seed)
