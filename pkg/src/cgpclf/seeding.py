"""Seed derivation.

Every stochastic draw in an experiment descends from a single master seed.
Child seeds are derived with :class:`numpy.random.SeedSequence`, keyed by a
path of non-negative integers (run index, fold index, stream id, ...), so the
stream for e.g. repetition 3 / rotation 7 never depends on scheduling order.
"""

import numpy as np


def derive_seed(master_seed: int, *path: int) -> int:
    """Return a 63-bit integer seed for ``(master_seed, *path)``."""
    if master_seed < 0 or any(p < 0 for p in path):
        raise ValueError("seeds and seed paths must be non-negative")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    hi, lo = ss.generate_state(2, dtype=np.uint32)
    return ((int(hi) << 32) | int(lo)) & ((1 << 63) - 1)


def rng_for(master_seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *path))
