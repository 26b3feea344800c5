"""Desk-scale simulator and verification harness for quantum theories whose
output is matter in space-time: Bohmian trajectories, spontaneous-collapse
flash processes, and matter-density fields, together with the statistical
checks of their asserted equivalences and symmetries."""

from .grids import ComplexField, GridSpec, RealField1D, gaussian_smooth, inner, marginal, norm, normalize, sample_density
from .dynamics import HamiltonianSpec, evolve, expected_energy, multi_time_evolve
from .grw import Flash, FlashHistory, TheoryParams, apply_collapse, collapse_rate_density, flash_joint_density, run_grw_collapse, run_grw_linear
from .bohm import Trajectory, bohm_velocity, integrate_trajectory, sample_equilibrium
from .ontology import MatterDensity, ReadoutSpec, matter_density, pointer_readout
from .presets import build_preset

__version__ = "0.1.0"
