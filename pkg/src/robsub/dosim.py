"""Robust influence maximization under edge-probability uncertainty.

Nature picks propagation probabilities inside per-edge intervals; the
influencer picks seed sets. The payoff (default) is the ratio of the seed
set's expected spread to the best achievable spread at those parameters.
Nature's continuous strategy space is discretized to a grid and the
equilibrium is computed by a double oracle.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cascade import EXACT_SPREAD_CAP, exact_spread
from .errors import InputError, ParameterError, SizeCapError
from .graphs import CascadeConfig, EdgeParams
from .lpgame import solve_zero_sum
from .submod import CardinalityConstraint, SetObjective, exhaustive_opt, greedy_maximize
from .util import rng_from, spawn_seeds


class IntervalUncertainty:
    """Per-edge intervals [lo_e, hi_e] for the propagation probabilities."""

    def __init__(self, graph, lo, hi):
        self.graph = graph
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if lo.ndim == 0:
            lo = np.full(graph.m, float(lo))
        if hi.ndim == 0:
            hi = np.full(graph.m, float(hi))
        if lo.shape != (graph.m,) or hi.shape != (graph.m,):
            raise ParameterError("interval arrays must cover every edge")
        if np.any(lo < 0) or np.any(hi > 1) or np.any(lo > hi):
            raise ParameterError("intervals must satisfy 0 <= lo <= hi <= 1")
        self.lo = lo
        self.hi = hi

    @property
    def is_uniform(self):
        return (np.allclose(self.lo, self.lo[0] if self.lo.size else 0)
                and np.allclose(self.hi, self.hi[0] if self.hi.size else 0))


@dataclass
class ParamGrid:
    """Nature's pure strategies: a finite list of edge-parameter points."""

    points: list
    spacing: float


@dataclass(frozen=True)
class InfluenceGame:
    graph: object
    intervals: IntervalUncertainty
    k: int
    horizon: int
    payoff: str = "ratio"  # or "spread"

    def __post_init__(self):
        if not 1 <= self.k <= self.graph.n:
            raise ParameterError("seed budget must satisfy 1 <= k <= n")
        if self.horizon < 1:
            raise ParameterError("horizon must be >= 1")
        if self.payoff not in ("ratio", "spread"):
            raise ParameterError("payoff must be 'ratio' or 'spread'")


def _axis_grid(lo, hi, delta):
    if hi - lo < 1e-15:
        return [float(lo)]
    vals = list(np.arange(lo, hi, delta))
    if not vals or abs(vals[-1] - hi) > 1e-12:
        vals.append(hi)
    # make sure hi itself is the last point even if arange overshoots slightly
    vals = [min(v, hi) for v in vals]
    out = []
    for v in vals:
        if not out or v - out[-1] > 1e-12:
            out.append(float(v))
    return out


def discretize_params(intervals, delta, shared=True, cap=4096):
    """Grid over nature's strategy space.

    shared=True (a single global probability, the field-protocol setting)
    requires identical intervals on every edge and returns the 1-d grid
    {lo, lo+delta, ..., hi}. shared=False takes the cross product of
    per-edge grids, capped at `cap` points.
    """
    if delta <= 0:
        raise ParameterError("grid spacing must be positive")
    g = intervals.graph
    if shared:
        if not intervals.is_uniform:
            raise ParameterError("shared grid requires identical intervals on all edges")
        lo = float(intervals.lo[0]) if g.m else 0.0
        hi = float(intervals.hi[0]) if g.m else 0.0
        pts = [EdgeParams.uniform(g, v) for v in _axis_grid(lo, hi, delta)]
        return ParamGrid(pts, delta)
    axes = [_axis_grid(intervals.lo[e], intervals.hi[e], delta) for e in range(g.m)]
    size = 1
    for a in axes:
        size *= len(a)
        if size > cap:
            raise SizeCapError(f"uncoupled grid has {size}+ points, cap {cap}")
    points = [EdgeParams(g, np.array(combo))
              for combo in _cartesian(axes)]
    return ParamGrid(points, delta)


def _cartesian(axes):
    if not axes:
        yield ()
        return
    for head in axes[0]:
        for rest in _cartesian(axes[1:]):
            yield (head,) + tuple(rest)


class SpreadEvaluator:
    """Spread evaluation shared across a run.

    exact=True uses the enumeration oracle (small instances). Otherwise a
    fixed table of uniform draws is thresholded per parameter point: the
    same uniforms serve every (seed set, theta) pair, the common-random-
    numbers scheme that makes payoff comparisons well-coupled and the whole
    run deterministic.
    """

    def __init__(self, graph, horizon, exact=True, samples=None, rng_seed=0,
                 cap=EXACT_SPREAD_CAP):
        self.graph = graph
        self.horizon = horizon
        self.exact = exact
        self.cap = cap
        if not exact:
            if not samples or samples < 1:
                raise ParameterError("Monte Carlo evaluator needs samples >= 1")
            seeds = spawn_seeds(rng_seed, samples)
            self.uniforms = np.empty((samples, graph.m, horizon), dtype=np.float64)
            for r in range(samples):
                self.uniforms[r] = rng_from(int(seeds[r])).random((graph.m, horizon))
            self._coins_cache = {}
        self._spread_cache = {}

    def _coins(self, theta):
        key = theta.values.tobytes()
        if key not in self._coins_cache:
            self._coins_cache[key] = (
                self.uniforms < theta.values[None, :, None]).astype(np.uint8)
        return self._coins_cache[key]

    def spread(self, seeds, theta):
        key = (tuple(sorted(seeds)), theta.values.tobytes())
        if key in self._spread_cache:
            return self._spread_cache[key]
        if not seeds:
            val = 0.0
        elif self.exact:
            cfg = CascadeConfig.single(sorted(seeds), self.horizon)
            val = exact_spread(self.graph, theta, cfg, cap=self.cap)
        else:
            coins3 = self._coins(theta)
            indptr, indices, eids = self.graph.csr()
            cfg = CascadeConfig.single(sorted(seeds), self.horizon)
            nodes, steps = cfg.flat()
            counts = np.empty(coins3.shape[0], dtype=np.int64)
            arrivals = np.empty((coins3.shape[0], self.graph.n), dtype=np.int32)
            kernels.fill_batch(indptr, indices, eids, coins3, nodes, steps,
                               self.horizon, arrivals, counts)
            val = float(counts.mean())
        self._spread_cache[key] = val
        return val

    def spread_objective(self, theta):
        return SetObjective(self.graph.n, lambda S: self.spread(S, theta),
                            monotone=True, name="spread")


def optimal_spread(evaluator, theta, k, mode="exact"):
    """OPT(theta): exhaustive over k-sets when exact, greedy value otherwise."""
    if mode == "exact":
        _, val = exhaustive_opt(evaluator.spread_objective(theta),
                                CardinalityConstraint(k))
        return val, True
    sel = greedy_maximize(evaluator.spread_objective(theta), CardinalityConstraint(k))
    return evaluator.spread(sel, theta), False


def payoff_ratio(seeds, theta, game, opt_mode="exact", samples=None, rng_seed=0,
                 evaluator=None, opt_cache=None):
    """Spread(seeds; theta) / OPT(theta) in (0, 1] when OPT is exact."""
    seeds = sorted(set(int(v) for v in seeds))
    if len(seeds) > game.k:
        raise InputError(f"|seeds|={len(seeds)} exceeds budget k={game.k}")
    if evaluator is None:
        evaluator = SpreadEvaluator(game.graph, game.horizon,
                                    exact=samples is None, samples=samples,
                                    rng_seed=rng_seed)
    num = evaluator.spread(seeds, theta)
    if game.payoff == "spread":
        return num
    key = theta.values.tobytes()
    if opt_cache is not None and key in opt_cache:
        opt = opt_cache[key]
    else:
        opt, _ = optimal_spread(evaluator, theta, game.k, mode=opt_mode)
        if opt_cache is not None:
            opt_cache[key] = opt
    return num / opt


@dataclass
class DosimResult:
    strategy: list            # (seed tuple, weight)
    adversary: list           # (grid index, weight)
    value: float
    converged: bool
    warning: bool
    iterations: int
    value_trace: list = field(default_factory=list)
    support_trace: list = field(default_factory=list)
    grid: ParamGrid = None
    approx_opt: bool = False


def dosim_solve(game, delta, tol=1e-3, max_iters=60, samples=None, rng_seed=0,
                opt_mode="exact", shared=True, grid_cap=4096):
    """Equilibrium of the discretized game by incremental influencer best
    responses.

    Nature's strategy space is the (polynomial) grid, so every grid point is
    a column from the start; nature's best response to the influencer
    mixture is therefore always a column of the solved game and the
    restricted value is nondecreasing as influencer rows accumulate.
    Influencer best response: greedy on the mixture-weighted ratio.
    Terminates when the influencer best response improves by at most tol;
    hitting max_iters returns the best restricted solution with a warning
    flag."""
    grid = discretize_params(game.intervals, delta, shared=shared, cap=grid_cap)
    evaluator = SpreadEvaluator(game.graph, game.horizon, exact=samples is None,
                                samples=samples, rng_seed=rng_seed)
    opt_cache = {}
    n_grid = len(grid.points)

    def ratio(S, gi):
        return payoff_ratio(S, grid.points[gi], game, opt_mode=opt_mode,
                            evaluator=evaluator, opt_cache=opt_cache)

    mid_idx = n_grid // 2
    start = tuple(greedy_maximize(evaluator.spread_objective(grid.points[mid_idx]),
                                  CardinalityConstraint(game.k)))
    sets = [start]
    payoff_rows = [[ratio(start, gi) for gi in range(n_grid)]]
    trace, supports = [], []
    value, p, q = None, np.array([1.0]), None
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        value, p, q = solve_zero_sum(np.array(payoff_rows))
        trace.append(value)
        supports.append((int(np.sum(p > 1e-12)), int(np.sum(q > 1e-12))))
        mix = SetObjective(
            game.graph.n,
            lambda S: float(sum(w * ratio(tuple(sorted(S)), gi)
                                for gi, w in enumerate(q) if w > 0)),
            monotone=True, name="ratio-mixture")
        br_set = tuple(greedy_maximize(mix, CardinalityConstraint(game.k)))
        br_val = mix.value(br_set)
        if br_val - value <= tol or br_set in sets:
            converged = True
            break
        sets.append(br_set)
        payoff_rows.append([ratio(br_set, gi) for gi in range(n_grid)])
    strategy = [(S, float(w)) for S, w in zip(sets, p) if w > 1e-12]
    adversary = [(gi, float(w)) for gi, w in enumerate(q) if w > 1e-12]
    return DosimResult(strategy, adversary, float(value), converged,
                       warning=not converged, iterations=iters,
                       value_trace=trace, support_trace=supports, grid=grid,
                       approx_opt=(opt_mode != "exact"))
