"""Hierarchical seed derivation.

Every random stream in the package is keyed by ``(seed, *keys)`` so that
independent components (repeats, resampling steps, trees) never share state
and results do not depend on execution order.
"""

import numpy as np


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def derive_seed(seed: int, *keys: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
