"""Reproducible stream derivation.

Every stochastic run owns a generator derived from (master seed, stream
index) through the counter-based Philox construction: the two 64-bit words
form the Philox key, so streams are independent, stable across library
versions, and reproducible from the run record alone.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_rng"]


def derive_rng(master_seed: int, stream: int = 0) -> np.random.Generator:
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
