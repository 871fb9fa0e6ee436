"""Cascade propagation kernels.

These are the hot loops of the package. Attempt randomness is handed in as
coin tables indexed (edge_id, step), pregenerated by the caller, so the
kernels themselves are fully deterministic: the numba and numpy backends
produce bit-identical results, and fixing a coin table gives the
common-random-numbers coupling used by the monotonicity tests.

Cascade semantics: seeds scheduled for step t are active at the start of
step t; during each step t = 1..horizon every active node attempts each
neighbor that was inactive at the start of the step, and a success (coin
for that edge at that step) activates the neighbor at the start of step
t+1. Arrival times use horizon+2 as "never activated".
"""

import numpy as np

from .backend import HAVE_NUMBA, USE_NUMBA

if HAVE_NUMBA:
    import numba


def _cascade_fill_impl(indptr, indices, eids, coins, sched_nodes, sched_steps,
                       horizon, arrival, queue):
    # arrival must be prefilled with horizon + 2; queue is scratch of size n.
    inf = horizon + 2
    total = 0
    for i in range(sched_nodes.shape[0]):
        if sched_steps[i] == 1:
            v = sched_nodes[i]
            if arrival[v] == inf:
                arrival[v] = 1
                queue[total] = v
                total += 1
    for t in range(1, horizon + 1):
        n_active = total
        for qi in range(n_active):
            u = queue[qi]
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if arrival[v] <= t:
                    continue
                if coins[eids[j], t - 1]:
                    if arrival[v] == inf:
                        arrival[v] = t + 1
                        queue[total] = v
                        total += 1
        for i in range(sched_nodes.shape[0]):
            if sched_steps[i] == t + 1:
                v = sched_nodes[i]
                if arrival[v] == inf:
                    arrival[v] = t + 1
                    queue[total] = v
                    total += 1
    return total


def _gain_from_impl(indptr, indices, eids, coins, source, horizon,
                    base_arrival, arrival, queue):
    # Count of nodes reached from `source` (seeded at step 1) that the base
    # cascade never reached. A node reached here at step a with
    # base_arrival <= a is pruned: an earlier-or-equal arrival reaches a
    # superset, so nothing new lies beyond it. arrival scratch must be
    # prefilled with inf and is restored before returning.
    inf = horizon + 2
    gain = 0
    total = 0
    if base_arrival[source] > 1:
        arrival[source] = 1
        queue[total] = source
        total += 1
        if base_arrival[source] == inf:
            gain += 1
    for t in range(1, horizon + 1):
        n_active = total
        for qi in range(n_active):
            u = queue[qi]
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if arrival[v] <= t:
                    continue
                if coins[eids[j], t - 1] and arrival[v] == inf and base_arrival[v] > t + 1:
                    arrival[v] = t + 1
                    queue[total] = v
                    total += 1
                    if base_arrival[v] == inf:
                        gain += 1
    for qi in range(total):
        arrival[queue[qi]] = inf
    return gain


def _make_batch_kernels(cascade_single, gain_single):
    """Batch-over-replicates wrappers bound to one single-replicate impl."""

    def fill_batch(indptr, indices, eids, coins3, sched_nodes, sched_steps,
                   horizon, arrivals2, counts):
        n = arrivals2.shape[1]
        inf = horizon + 2
        queue = np.empty(n, np.int32)
        for r in range(coins3.shape[0]):
            for v in range(n):
                arrivals2[r, v] = inf
            counts[r] = cascade_single(indptr, indices, eids, coins3[r],
                                       sched_nodes, sched_steps, horizon,
                                       arrivals2[r], queue)

    def gain_batch(indptr, indices, eids, coins3, source, horizon,
                   base_arrivals2):
        n = base_arrivals2.shape[1]
        inf = horizon + 2
        arrival = np.full(n, inf, np.int32)
        queue = np.empty(n, np.int32)
        total = 0
        for r in range(coins3.shape[0]):
            total += gain_single(indptr, indices, eids, coins3[r], source,
                                 horizon, base_arrivals2[r], arrival, queue)
        return total

    return fill_batch, gain_batch


# Plain-python implementations (always available; used by the numpy backend
# and by the backend benchmark).
cascade_fill_py = _cascade_fill_impl
gain_from_py = _gain_from_impl
fill_batch_py, gain_batch_py = _make_batch_kernels(cascade_fill_py, gain_from_py)

if HAVE_NUMBA:
    cascade_fill_nb = numba.njit(cache=True)(_cascade_fill_impl)
    gain_from_nb = numba.njit(cache=True)(_gain_from_impl)
    _fb, _gb = _make_batch_kernels(cascade_fill_nb, gain_from_nb)
    fill_batch_nb = numba.njit(cache=True)(_fb)
    gain_batch_nb = numba.njit(cache=True)(_gb)
else:  # pragma: no cover - numba is a declared dependency
    cascade_fill_nb = gain_from_nb = fill_batch_nb = gain_batch_nb = None

if USE_NUMBA:
    cascade_fill = cascade_fill_nb
    gain_from = gain_from_nb
    fill_batch = fill_batch_nb
    gain_batch = gain_batch_nb
else:
    cascade_fill = cascade_fill_py
    gain_from = gain_from_py
    fill_batch = fill_batch_py
    gain_batch = gain_batch_py
