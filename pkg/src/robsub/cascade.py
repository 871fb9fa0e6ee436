"""Time-horizon independent-cascade simulation and its exact oracle.

The model: once active, a node attempts each still-inactive neighbor once
per step, each attempt succeeding independently with the edge probability,
until the neighbor activates or the horizon is reached. Activations from
step t take effect at the start of step t+1; seeds scheduled for step t are
active at the start of step t.
"""

import numpy as np

from . import kernels
from .errors import SizeCapError
from .util import rng_from, spawn_seeds

EXACT_SPREAD_CAP = 24


def draw_coins(graph, params, horizon, rng_seed):
    """One attempt-coin table: uint8 (m, horizon), entry 1 = attempt succeeds.

    Fixing the table fixes every potential attempt outcome, which is the
    common-random-numbers coupling: adding seeds can only add activations.
    """
    rng = rng_from(rng_seed)
    u = rng.random((graph.m, horizon))
    return (u < params.values[:, None]).astype(np.uint8)


def cascade_from_coins(graph, coins, cfg):
    """Deterministic propagation of one coin table; returns bool mask of final actives."""
    cfg.validate_for(graph.n)
    indptr, indices, eids = graph.csr()
    nodes, steps = cfg.flat()
    arrival = np.full(graph.n, cfg.horizon + 2, dtype=np.int32)
    queue = np.empty(graph.n, dtype=np.int32)
    kernels.cascade_fill(indptr, indices, eids, coins, nodes, steps,
                         cfg.horizon, arrival, queue)
    return arrival < cfg.horizon + 2


def simulate_icm(graph, params, cfg, rng_seed):
    """Simulate one cascade; returns the set of activated nodes."""
    coins = draw_coins(graph, params, cfg.horizon, rng_seed)
    active = cascade_from_coins(graph, coins, cfg)
    return set(int(v) for v in np.nonzero(active)[0])


def spread_counts(graph, params, cfg, samples, rng_seed, chunk=256):
    """Activated-set sizes for `samples` independent replicates.

    Replicate r uses a child seed derived from rng_seed, so results do not
    depend on evaluation order or chunking.
    """
    cfg.validate_for(graph.n)
    indptr, indices, eids = graph.csr()
    nodes, steps = cfg.flat()
    seeds = spawn_seeds(rng_seed, samples)
    counts = np.empty(samples, dtype=np.int64)
    arrivals = None
    for start in range(0, samples, chunk):
        stop = min(start + chunk, samples)
        coins3 = np.empty((stop - start, graph.m, cfg.horizon), dtype=np.uint8)
        for r in range(start, stop):
            rng = rng_from(int(seeds[r]))
            coins3[r - start] = rng.random((graph.m, cfg.horizon)) < params.values[:, None]
        if arrivals is None or arrivals.shape[0] != stop - start:
            arrivals = np.empty((stop - start, graph.n), dtype=np.int32)
        kernels.fill_batch(indptr, indices, eids, coins3, nodes, steps,
                           cfg.horizon, arrivals, counts[start:stop])
    return counts


def expected_spread(graph, params, cfg, samples, rng_seed):
    """Monte Carlo estimate of the expected activated count: (mean, stderr)."""
    if samples < 1:
        raise SizeCapError("samples must be >= 1")
    counts = spread_counts(graph, params, cfg, samples, rng_seed)
    est = float(counts.mean())
    stderr = float(counts.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return est, stderr


def exact_spread(graph, params, cfg, cap=EXACT_SPREAD_CAP):
    """Exact expected activated count by enumerating attempt outcomes.

    Branches on the per-step attempt coins (grouped per target node: edges
    into distinct inactive nodes are disjoint, so their success events are
    independent). Refuses when m * horizon exceeds `cap` since the outcome
    space is 2**(m*horizon).
    """
    cfg.validate_for(graph.n)
    if graph.m * cfg.horizon > cap:
        raise SizeCapError(
            f"m*horizon = {graph.m * cfg.horizon} exceeds exact enumeration cap {cap}")
    T = cfg.horizon
    sched = {t + 1: frozenset(s) for t, s in enumerate(cfg.seed_schedule)}
    adj = {v: [] for v in range(graph.n)}
    for (u, v), p in zip(graph.edges, params.values):
        adj[int(u)].append((int(v), float(p)))
        adj[int(v)].append((int(u), float(p)))
    memo = {}

    def value(active, t):
        active = active | sched.get(t, frozenset())
        if t > T:
            return float(len(active))
        key = (active, t)
        if key in memo:
            return memo[key]
        cands = []
        for v in range(graph.n):
            if v in active:
                continue
            stay = 1.0
            touched = False
            for u, p in adj[v]:
                if u in active:
                    stay *= 1.0 - p
                    touched = True
            if touched and stay < 1.0:
                cands.append((v, 1.0 - stay))
        total = 0.0
        for mask in range(1 << len(cands)):
            prob = 1.0
            newly = []
            for i, (v, q) in enumerate(cands):
                if mask >> i & 1:
                    prob *= q
                    newly.append(v)
                else:
                    prob *= 1.0 - q
            if prob > 0.0:
                total += prob * value(active | frozenset(newly), t + 1)
        memo[key] = total
        return total

    return value(frozenset(), 1)
