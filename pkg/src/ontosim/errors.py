"""Exception types for numerical failure modes that abort a run."""


class SimulationError(RuntimeError):
    """A run hit a numerically impossible or unresolvable state."""


class CollapseAnnihilation(SimulationError):
    """A collapse center annihilated the state (post-collapse norm below threshold).

    Probability zero in exact arithmetic; reachable through rounding when the
    proposed center sits far outside the support of the wave function.
    """


class NodeStall(SimulationError):
    """Trajectory integration reached a region where |psi|^2 is below the node floor."""
