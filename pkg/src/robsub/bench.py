"""Benchmark of the numba cascade kernels against the pure-Python fallback.

Both implementations run the same workload on identical coin tables; the
checksum column proves they computed the same thing, the timing sidecar
carries the wall-clock comparison.
"""

import time

import numpy as np

from . import kernels
from .backend import HAVE_NUMBA
from .graphs import CascadeConfig, EdgeParams, SbmParams, generate_sbm
from .imax import sample_coins
from .util import derive_seed


def _run_fill(fill, graph, coins3, horizon, seeds):
    indptr, indices, eids = graph.csr()
    cfg = CascadeConfig.single(seeds, horizon)
    nodes, steps = cfg.flat()
    counts = np.empty(coins3.shape[0], dtype=np.int64)
    arrivals = np.empty((coins3.shape[0], graph.n), dtype=np.int32)
    fill(indptr, indices, eids, coins3, nodes, steps, horizon, arrivals, counts)
    return counts


def backend_benchmark(sizes=(400, 800), horizon=4, replicates=64, p=0.08,
                      rng_seed=0, repeats=3):
    """Time fill_batch on SBM workloads for both backends.

    Returns (result_rows, timing_rows): results carry a checksum per
    (workload, backend) so equality is visible; timings go to the sidecar.
    """
    impls = [("numpy", kernels.fill_batch_py)]
    if HAVE_NUMBA:
        impls.append(("numba", kernels.fill_batch_nb))
    rows = []
    timing = [["workload", "backend", "wall_time_ms"]]
    for n in sizes:
        communities = max(2, n // 100)
        size = n // communities
        params = SbmParams((size,) * communities, min(1.0, p), p / 20)
        g = generate_sbm(params, derive_seed(rng_seed, 151, n))
        ep = EdgeParams.uniform(g, 0.1)
        coins3 = sample_coins(g, ep, horizon, replicates,
                              derive_seed(rng_seed, 157, n))
        seeds = list(range(0, g.n, max(1, g.n // 8)))[:8]
        name = f"sbm-n{g.n}"
        for backend, fill in impls:
            if backend == "numba":
                _run_fill(fill, g, coins3, horizon, seeds)  # compile outside timing
            best = np.inf
            counts = None
            for _ in range(repeats):
                t0 = time.perf_counter()
                counts = _run_fill(fill, g, coins3, horizon, seeds)
                best = min(best, (time.perf_counter() - t0) * 1000.0)
            checksum = int(counts.sum())
            rows.append([name, g.n, g.m, replicates, backend, checksum,
                         rng_seed])
            timing.append([name, backend, best])
    return rows, timing
