"""Deterministic seed derivation.

Every stochastic component takes a 64-bit integer seed.  Sub-seeds are
derived through ``numpy.random.SeedSequence`` spawn keys, so independent
components get statistically independent streams while the whole pipeline
stays reproducible from a single root seed.
"""

import numpy as np

__all__ = ["derive_seed", "rng_from"]


def derive_seed(seed: int, *key: int) -> int:
    """Derive a child seed from ``seed`` along a tuple of integer keys."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_from(seed: int, *key: int) -> np.random.Generator:
    """A fresh PCG64 generator seeded from ``derive_seed(seed, *key)``."""
    if key:
        seed = derive_seed(seed, *key)
    return np.random.default_rng(int(seed))
