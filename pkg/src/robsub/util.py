"""Seed-derivation helpers.

Every stochastic entry point takes an integer seed; nested components derive
child seeds through SeedSequence so replicates are independent of execution
order and reproducible across platforms.
"""

import numpy as np


def rng_from(seed):
    return np.random.default_rng(seed)


def spawn_seeds(seed, count):
    """Derive `count` independent child seeds (uint64) from one integer seed."""
    return np.random.SeedSequence(seed).generate_state(count, np.uint64)


def derive_seed(seed, *keys):
    """Deterministic child seed keyed by extra integers (order-independent use)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])
