"""Influence maximization on a fixed sample of attempt coins.

Pregenerating the coin tables turns the Monte Carlo spread estimate into a
deterministic average of coverage functions (reachability in the
time-expanded attempt graph), which is submodular. That makes lazy greedy
(CELF) exact with respect to the sampled objective and lets marginal gains
reuse cached arrival times of the current seed set.
"""

import heapq

import numpy as np

from . import kernels
from .graphs import CascadeConfig
from .util import rng_from, spawn_seeds


def sample_coins(graph, params, horizon, replicates, rng_seed):
    """uint8 (replicates, m, horizon) attempt coins with per-replicate child seeds."""
    seeds = spawn_seeds(rng_seed, replicates)
    coins3 = np.empty((replicates, graph.m, horizon), dtype=np.uint8)
    for r in range(replicates):
        rng = rng_from(int(seeds[r]))
        coins3[r] = rng.random((graph.m, horizon)) < params.values[:, None]
    return coins3


def saa_spread(graph, coins3, horizon, seeds):
    """Mean activated count of seed set `seeds` over the sampled coins."""
    seeds = sorted(set(int(v) for v in seeds))
    if not seeds:
        return 0.0
    indptr, indices, eids = graph.csr()
    cfg = CascadeConfig.single(seeds, horizon)
    nodes, steps = cfg.flat()
    counts = np.empty(coins3.shape[0], dtype=np.int64)
    arrivals = np.empty((coins3.shape[0], graph.n), dtype=np.int32)
    kernels.fill_batch(indptr, indices, eids, coins3, nodes, steps, horizon,
                       arrivals, counts)
    return float(counts.mean())


def saa_greedy(graph, coins3, horizon, k, candidates=None):
    """Lazy greedy seed selection against the sampled spread; returns (seeds, value).

    Ties break toward the lowest node id. `candidates` restricts the ground
    set (defaults to all nodes).
    """
    n = graph.n
    reps = coins3.shape[0]
    indptr, indices, eids = graph.csr()
    if candidates is None:
        candidates = range(n)
    base = np.full((reps, n), horizon + 2, dtype=np.int32)
    heap = []
    for v in candidates:
        g = kernels.gain_batch(indptr, indices, eids, coins3, v, horizon, base)
        heap.append((-g / reps, v, 0))
    heapq.heapify(heap)
    chosen = []
    value = 0.0
    counts = np.empty(reps, dtype=np.int64)
    while heap and len(chosen) < k:
        neg, v, tag = heapq.heappop(heap)
        if tag != len(chosen):
            g = kernels.gain_batch(indptr, indices, eids, coins3, v, horizon, base)
            heapq.heappush(heap, (-g / reps, v, len(chosen)))
            continue
        chosen.append(v)
        value -= neg
        cfg = CascadeConfig.single(chosen, horizon)
        nodes, steps = cfg.flat()
        kernels.fill_batch(indptr, indices, eids, coins3, nodes, steps,
                           horizon, base, counts)
    return chosen, value


def greedy_influence(graph, params, horizon, k, replicates, rng_seed,
                     candidates=None):
    """Convenience wrapper: sample coins, run lazy greedy."""
    coins3 = sample_coins(graph, params, horizon, replicates, rng_seed)
    return saa_greedy(graph, coins3, horizon, k, candidates=candidates)
