"""Query-budgeted network exploration and field-style seeding protocols.

The hidden graph is reachable only through a QueryLedger: querying a node
reveals all of its incident edges and costs one unit of budget. Walks may
revisit already-queried nodes for free (the information is already held);
such visits still count as protocol operations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cascade import exact_spread
from .errors import BudgetError, InputError, ParameterError, ProtocolError
from .graphs import CascadeConfig, Graph
from .imax import saa_greedy, saa_spread, sample_coins
from .kernels import fill_batch, gain_batch
from .util import derive_seed, rng_from, spawn_seeds


class QueryLedger:
    """Mediates access to a hidden graph under a node-query budget."""

    @classmethod
    def from_edge_list(cls, path, budget, rng_seed, n=None):
        """Hidden-graph mode: load an edge list but expose it only through
        the query protocol."""
        from .graphs import load_edge_list
        graph, _ = load_edge_list(path, n=n)
        return cls(graph, budget, rng_seed)

    def __init__(self, graph, budget, rng_seed):
        self._graph = graph
        self.budget = int(budget)
        if self.budget < 0:
            raise ParameterError("budget must be nonnegative")
        self.queried = set()
        self.revealed_edges = set()
        self._revealed_adj = {}
        self.random_draws_used = 0
        self.ops = 0
        self._rng = rng_from(rng_seed)

    @property
    def n(self):
        return self._graph.n

    @property
    def charged(self):
        return len(self.queried)

    def revealed_neighbors(self, v):
        return sorted(self._revealed_adj.get(v, ()))

    def _reveal(self, v):
        for u in self._graph.neighbors(v):
            u = int(u)
            e = (v, u) if v < u else (u, v)
            self.revealed_edges.add(e)
            self._revealed_adj.setdefault(v, set()).add(u)
            self._revealed_adj.setdefault(u, set()).add(v)

    def query_node(self, v=None, uniform=False):
        """Query one node, revealing its incident edges.

        Either v is a neighbor of an already-queried node, or uniform=True
        and the ledger draws an unqueried node uniformly at random.
        """
        if self.budget <= 0:
            raise BudgetError("query budget exhausted")
        if uniform:
            if len(self.queried) >= self.n:
                raise ProtocolError("every node already queried")
            while True:
                v = int(self._rng.integers(self.n))
                self.random_draws_used += 1
                if v not in self.queried:
                    break
        else:
            if v is None:
                raise InputError("explicit query needs a node id")
            v = int(v)
            if not 0 <= v < self.n:
                raise InputError(f"node {v} out of range")
            if v in self.queried:
                raise ProtocolError(f"node {v} was already queried")
            if all(v not in self._revealed_adj.get(u, ()) for u in self.queried):
                raise ProtocolError(
                    f"node {v} is not a revealed neighbor of any queried node")
        self.budget -= 1
        self.ops += 1
        self.queried.add(v)
        self._reveal(v)
        incident = sorted((min(v, u), max(v, u)) for u in self._graph.neighbors(v))
        return v, incident

    def touch(self, v):
        """Record a free protocol visit to an already-queried node."""
        if v not in self.queried:
            raise ProtocolError("touch is only valid for queried nodes")
        self.ops += 1


@dataclass
class WalkEstimate:
    start: int
    visited: list                 # distinct nodes in first-visit order
    degree_estimate: float
    size_estimate: float
    steps_taken: int
    truncated: bool


def _sbm_size_estimate(d_hat, n, params):
    """Invert the SBM expected degree (s-1)*p_w + (n-s)*p_b for s."""
    if params.p_within <= params.p_between:
        return float(n)
    s = 1.0 + (d_hat - n * params.p_between) / (params.p_within - params.p_between)
    return float(min(max(s, 1.0), n))


def random_walk_estimate(ledger, start, walk_len, params):
    """Simple random walk over revealed edges; estimates the starting
    community's average degree and, via the SBM degree identity, its size.

    Revisits are free; running out of budget mid-walk returns a truncated
    partial estimate.
    """
    if start not in ledger.queried:
        raise ProtocolError("walk must start at an already-queried node")
    visited = [start]
    seen = {start}
    cur = start
    steps = 0
    truncated = False
    for _ in range(walk_len):
        nbrs = ledger.revealed_neighbors(cur)
        if not nbrs:
            truncated = True
            break
        nxt = int(nbrs[ledger._rng.integers(len(nbrs))])
        if nxt in ledger.queried:
            ledger.touch(nxt)
        else:
            if ledger.budget <= 0:
                truncated = True
                break
            ledger.query_node(nxt)
        steps += 1
        if nxt not in seen:
            seen.add(nxt)
            visited.append(nxt)
        cur = nxt
    degs = [ledger._graph.degree(v) for v in visited]
    d_hat = float(np.mean(degs))
    s_hat = _sbm_size_estimate(d_hat, ledger.n, params)
    return WalkEstimate(start, visited, d_hat, s_hat, steps, truncated)


@dataclass
class SeedDistribution:
    prospective: list
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.min() < 0 or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ParameterError("weights must be a probability vector")


def build_seed_distribution(estimates):
    """Weight each prospective seed inversely to its estimated community size;
    communities are hit proportionally to size, so this evens out the bias."""
    if not estimates:
        raise ParameterError("need at least one walk estimate")
    inv = np.array([1.0 / max(e.size_estimate, 1.0) for e in estimates])
    return SeedDistribution([e.start for e in estimates], inv / inv.sum())


@dataclass
class ArisenConfig:
    prospectives: int = None      # default ceil(3 k ln k) + k
    walk_len: int = 4
    budget: int = None            # default prospectives * (walk_len + 1)

    def resolved(self, k):
        r = self.prospectives
        if r is None:
            r = (math.ceil(3 * k * math.log(k)) + k) if k > 1 else 4
        b = self.budget if self.budget is not None else r * (self.walk_len + 1)
        if b < r * self.walk_len + r:
            raise ParameterError("budget below prospectives * (walk_len + 1)")
        if r < k:
            raise ParameterError("need at least k prospective seeds")
        return r, self.walk_len, b


@dataclass
class ArisenStats:
    queries_used: int             # protocol operations: prospectives + walk steps
    charged: int                  # distinct nodes queried (budget consumed)
    fraction_queried: float
    truncated_steps: int
    random_draws: int


def arisen_select(graph, k, params, config, rng_seed):
    """Pick k seeds from a hidden graph using random-walk size estimates.

    Samples prospective seeds uniformly, walks around each to estimate its
    community size, then draws the k seeds independently from the
    inverse-size distribution (node-level duplicates redrawn).
    """
    r, walk_len, budget = config.resolved(k)
    ledger = QueryLedger(graph, budget, derive_seed(rng_seed, 31))
    prospectives = []
    for _ in range(r):
        v, _edges = ledger.query_node(uniform=True)
        prospectives.append(v)
    estimates = [random_walk_estimate(ledger, v, walk_len, params)
                 for v in prospectives]
    dist = build_seed_distribution(estimates)
    rng = rng_from(derive_seed(rng_seed, 37))
    # k independent draws; node collisions are discarded rather than redrawn
    # so the distribution over touched communities stays exactly independent
    # (the returned set can fall short of k when draws collide).
    draws = [int(rng.choice(dist.prospective, p=dist.weights)) for _ in range(k)]
    seeds = sorted(set(draws))
    truncated = sum(walk_len - e.steps_taken for e in estimates)
    stats = ArisenStats(queries_used=ledger.ops,
                        charged=ledger.charged,
                        fraction_queried=ledger.charged / graph.n,
                        truncated_steps=truncated,
                        random_draws=ledger.random_draws_used)
    return seeds, stats


@dataclass
class ChangeStats:
    respondents: int
    neighbors_queried: int
    charged: int
    fraction_queried: float


def change_sample(graph, fraction, rng_seed):
    """Field sampling protocol: interview random nodes plus one random
    neighbor each, until round(fraction * n) distinct nodes are queried.

    Returns the observed subgraph (union of revealed incident edges) and
    accounting. fraction = 1 queries everybody and recovers the full graph.
    """
    if not 0.0 < fraction <= 1.0:
        raise ParameterError("fraction must lie in (0, 1]")
    n = graph.n
    target = min(n, max(1, round(fraction * n)))
    rng = rng_from(rng_seed)
    queried = set()
    respondents = 0
    neighbors_queried = 0
    edges = set()

    def reveal(v):
        queried.add(v)
        for u in graph.neighbors(v):
            u = int(u)
            edges.add((v, u) if v < u else (u, v))

    unqueried = list(range(n))
    while len(queried) < target:
        pool = [v for v in unqueried if v not in queried]
        if not pool:
            break
        v = int(pool[rng.integers(len(pool))])
        reveal(v)
        respondents += 1
        if len(queried) >= target:
            break
        nbrs = sorted(int(u) for u in graph.neighbors(v))
        if nbrs:
            w = int(nbrs[rng.integers(len(nbrs))])
            if w not in queried:
                reveal(w)
                neighbors_queried += 1
    observed = Graph(n, sorted(edges))
    stats = ChangeStats(respondents, neighbors_queried, len(queried),
                        len(queried) / n)
    return observed, stats


def robust_p_heuristic(observed, k, p_grid, horizon, samples, rng_seed):
    """Greedy maximization of min over p of spread(S; p) / spread(greedy_p; p).

    greedy_p is the seed set tuned to that p, so the objective is the
    normalized robustness ratio; shared uniform draws couple the grids.
    """
    if len(p_grid) == 0:
        raise ParameterError("p_grid must be nonempty")
    base_seed = derive_seed(rng_seed, 41)
    uniforms = np.empty((samples, observed.m, horizon))
    for ridx, s in enumerate(spawn_seeds(base_seed, samples)):
        uniforms[ridx] = rng_from(int(s)).random((observed.m, horizon))
    coin_sets = [(uniforms < float(p)).astype(np.uint8) for p in p_grid]
    baselines = []
    for coins3 in coin_sets:
        _, val = saa_greedy(observed, coins3, horizon, k)
        baselines.append(max(val, 1e-12))
    indptr, indices, eids = observed.csr()
    reps = samples
    base_arr = [np.full((reps, observed.n), horizon + 2, np.int32)
                for _ in p_grid]
    base_counts = [0.0 for _ in p_grid]
    chosen = []
    counts_buf = np.empty(reps, dtype=np.int64)
    for _ in range(k):
        best_v, best_ratio = None, -np.inf
        for v in range(observed.n):
            if v in chosen:
                continue
            ratio = np.inf
            for gi, coins3 in enumerate(coin_sets):
                gain = gain_batch(indptr, indices, eids, coins3, v, horizon,
                                  base_arr[gi]) / reps
                ratio = min(ratio, (base_counts[gi] + gain) / baselines[gi])
            if ratio > best_ratio + 1e-12:
                best_v, best_ratio = v, ratio
        chosen.append(best_v)
        cfg = CascadeConfig.single(chosen, horizon)
        nodes, steps = cfg.flat()
        for gi, coins3 in enumerate(coin_sets):
            fill_batch(indptr, indices, eids, coins3, nodes, steps, horizon,
                       base_arr[gi], counts_buf)
            base_counts[gi] = float(counts_buf.mean())
    return sorted(chosen)


@dataclass
class AttendanceModel:
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.size and (self.probs.min() < 0 or self.probs.max() > 1):
            raise ParameterError("attendance probabilities must lie in [0, 1]")


@dataclass
class RoundRecord:
    invited: list
    attended: list
    cumulative_spread: float


def _expected_spread_exact(graph, params, horizon, seeds):
    if not seeds:
        return 0.0
    cfg = CascadeConfig.single(sorted(seeds), horizon)
    return exact_spread(graph, params, cfg)


def _expected_spread_mc(graph, params, horizon, seeds, samples, rng_seed):
    if not seeds:
        return 0.0
    coins3 = sample_coins(graph, params, horizon, samples, rng_seed)
    return saa_spread(graph, coins3, horizon, seeds)


def invitation_value(graph, params, horizon, attended, invited, attendance,
                     exact=True, samples=200, rng_seed=0):
    """Expected spread of (attended now + random attendees among invited)."""
    invited = sorted(set(invited) - set(attended))
    if exact:
        total = 0.0
        for mask in range(1 << len(invited)):
            prob = 1.0
            group = set(attended)
            for i, v in enumerate(invited):
                q = attendance.probs[v]
                if mask >> i & 1:
                    prob *= q
                    group.add(v)
                else:
                    prob *= 1.0 - q
            if prob > 0:
                total += prob * _expected_spread_exact(graph, params, horizon,
                                                       group)
        return total
    rng = rng_from(rng_seed)
    total = 0.0
    for s in range(samples):
        group = set(attended)
        for v in invited:
            if rng.random() < attendance.probs[v]:
                group.add(v)
        total += _expected_spread_mc(graph, params, horizon, group, 1,
                                     derive_seed(rng_seed, 43, s))
    return total / samples


def adaptive_round_select(graph, params, horizon, attended, k, attendance,
                          exact=True, samples=200, rng_seed=0):
    """Greedy choice of k invitees maximizing the attendance-weighted
    expected spread given already-attended seeds."""
    invited = []
    cands = [v for v in range(graph.n) if v not in attended]
    for _ in range(min(k, len(cands))):
        base = invitation_value(graph, params, horizon, attended, invited,
                                attendance, exact=exact, samples=samples,
                                rng_seed=rng_seed)
        best_v, best_gain = None, -np.inf
        for v in cands:
            if v in invited:
                continue
            gain = invitation_value(graph, params, horizon, attended,
                                    invited + [v], attendance, exact=exact,
                                    samples=samples, rng_seed=rng_seed) - base
            if gain > best_gain + 1e-12:
                best_v, best_gain = v, gain
        invited.append(best_v)
    return invited


def adaptive_greedy(graph, params, horizon, k_per_round, rounds, attendance,
                    rng_seed, exact=None, samples=200):
    """Invite greedily each round, observe who attends, replan.

    Attendance is realized by independent coin flips; all attendees so far
    seed one cascade whose expected spread is reported per round. Returns
    the per-round trace (reproducible from rng_seed).
    """
    if rounds < 1:
        raise ParameterError("rounds must be >= 1")
    if exact is None:
        exact = graph.m * horizon <= 24
    attended = set()
    trace = []
    rng = rng_from(derive_seed(rng_seed, 47))
    for r in range(rounds):
        invited = adaptive_round_select(graph, params, horizon, attended,
                                        k_per_round, attendance, exact=exact,
                                        samples=samples,
                                        rng_seed=derive_seed(rng_seed, 53, r))
        attendees = [v for v in invited if rng.random() < attendance.probs[v]]
        attended.update(attendees)
        if exact:
            spread = _expected_spread_exact(graph, params, horizon, attended)
        else:
            spread = _expected_spread_mc(graph, params, horizon, attended,
                                         samples, derive_seed(rng_seed, 59, r))
        trace.append(RoundRecord(sorted(invited), sorted(attendees), spread))
    return trace
