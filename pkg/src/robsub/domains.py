"""Concrete objective instances: budget allocation with profit uncertainty,
and influence-spread set objectives."""

from dataclasses import dataclass

import numpy as np

from .cascade import EXACT_SPREAD_CAP, exact_spread, expected_spread
from .equator import ObjectiveFamily
from .errors import ParameterError
from .graphs import CascadeConfig
from .submod import SetObjective
from .util import rng_from


@dataclass
class BudgetAllocInstance:
    """Bipartite advertising instance: channels activate customers.

    probs[u, v] is the chance channel u reaches customer v; base_weights are
    the nominal per-customer profits; budget caps how many channel units may
    be selected (granularity 1: one unit per channel).
    """

    probs: np.ndarray
    base_weights: np.ndarray
    budget: int
    granularity: int = 1

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        self.base_weights = np.asarray(self.base_weights, dtype=np.float64)
        if self.probs.ndim != 2 or self.probs.shape[0] < 1 or self.probs.shape[1] < 1:
            raise ParameterError("need at least one channel and one customer")
        if self.probs.min() < 0 or self.probs.max() > 1:
            raise ParameterError("activation probabilities must lie in [0, 1]")
        if self.base_weights.shape != (self.probs.shape[1],) or self.base_weights.min() < 0:
            raise ParameterError("weights must be nonnegative, one per customer")
        if self.granularity != 1:
            raise ParameterError("only unit granularity is implemented")

    @property
    def n_channels(self):
        return self.probs.shape[0]

    @property
    def n_customers(self):
        return self.probs.shape[1]


@dataclass
class ProfitUncertaintySet:
    """Finite family of customer-profit vectors (explicit uncertainty set)."""

    weight_vectors: list

    def __post_init__(self):
        self.weight_vectors = [np.asarray(w, dtype=np.float64)
                               for w in self.weight_vectors]
        if not self.weight_vectors:
            raise ParameterError("need at least one weight vector")
        if any(w.min() < 0 for w in self.weight_vectors):
            raise ParameterError("profits must be nonnegative")

    @property
    def m(self):
        return len(self.weight_vectors)


class BudgetAllocObjective(SetObjective):
    """Expected profit of a channel set S: sum_v w_v (1 - prod_{u in S}(1 - p_uv)).

    Monotone submodular (a coverage-style function), with closed-form
    multilinear extension used by the continuous solvers.
    """

    def __init__(self, instance, weights):
        self.instance = instance
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (instance.n_customers,):
            raise ParameterError("weight vector must cover every customer")
        self.weights = w
        P = instance.probs
        L = instance.n_channels

        def fn(S):
            if not S:
                return 0.0
            miss = np.prod(1.0 - P[sorted(S)], axis=0)
            return float(w @ (1.0 - miss))

        # log-domain matmul; sure activations (p = 1) clip to 1 - 1e-12 so the
        # batch path stays finite (relative error 1e-12, exact path above).
        log_miss = np.log1p(-np.clip(P, 0.0, 1.0 - 1e-12))

        def batch(mat):
            miss = np.exp(mat.astype(np.float64) @ log_miss)
            return (1.0 - miss) @ w

        super().__init__(L, fn, monotone=True, batch_fn=batch, name="budget-alloc")

    def exact_multilinear(self, x):
        x = np.asarray(x.x if hasattr(x, "x") else x, dtype=np.float64)
        miss = np.prod(1.0 - x[:, None] * self.instance.probs, axis=0)
        return float(self.weights @ (1.0 - miss))

    def exact_multilinear_grad(self, x):
        x = np.asarray(x.x if hasattr(x, "x") else x, dtype=np.float64)
        P = self.instance.probs
        L = self.instance.n_channels
        fail = 1.0 - x[:, None] * P
        grad = np.empty(L)
        for u in range(L):
            others = (np.prod(np.delete(fail, u, axis=0), axis=0)
                      if L > 1 else np.ones(P.shape[1]))
            grad[u] = float(self.weights @ (P[u] * others))
        return grad


def budget_objective(instance, weights, S):
    """Profit of channel set S under profit vector `weights` (exact closed form)."""
    return BudgetAllocObjective(instance, weights).value(S)


def budget_family(instance, uncertainty):
    """ObjectiveFamily over the profit uncertainty set."""
    return ObjectiveFamily([BudgetAllocObjective(instance, w)
                            for w in uncertainty.weight_vectors])


def make_random_instance(n_channels, n_customers, density, budget, members,
                         rng_seed, p_max=0.4, w_lo=0.0, w_hi=2.0):
    """Reproducible synthetic instance plus an m-member uncertainty family:
    members-2 profit vectors drawn inside per-customer intervals plus the
    two interval extreme points."""
    rng = rng_from(rng_seed)
    P = rng.random((n_channels, n_customers)) * p_max
    P *= rng.random((n_channels, n_customers)) < density
    lo = w_lo + rng.random(n_customers) * (w_hi - w_lo) * 0.5
    hi = lo + rng.random(n_customers) * (w_hi - np.asarray(lo)) * 0.999
    base = 0.5 * (lo + hi)
    inst = BudgetAllocInstance(P, base, budget)
    vectors = [lo.copy(), hi.copy()]
    for _ in range(max(members - 2, 0)):
        vectors.append(lo + rng.random(n_customers) * (hi - lo))
    return inst, ProfitUncertaintySet(vectors[:max(members, 1)])


def make_adversarial_instance(groups, customers_per_group=1, budget=None,
                              p=1.0):
    """Family where the non-robust baseline earns nothing in the worst case.

    One channel per customer group; member j values only group j. Any
    deterministic set of size < groups leaves some group uncovered, so its
    worst case is 0, while mixing over groups keeps it positive.
    """
    L = groups
    R = groups * customers_per_group
    P = np.zeros((L, R))
    for g in range(groups):
        P[g, g * customers_per_group:(g + 1) * customers_per_group] = p
    base = np.ones(R)
    if budget is None:
        budget = max(1, groups // 2)
    inst = BudgetAllocInstance(P, base, budget)
    vectors = []
    for g in range(groups):
        w = np.zeros(R)
        w[g * customers_per_group:(g + 1) * customers_per_group] = 1.0
        vectors.append(w)
    return inst, ProfitUncertaintySet(vectors)


def influence_set_objective(graph, params, horizon, samples,
                            cap=EXACT_SPREAD_CAP):
    """Wrap expected spread as a stochastic SetObjective; the exact oracle is
    attached whenever the enumeration cap allows."""
    def fn(S, rng_seed):
        if not S:
            return 0.0
        cfg = CascadeConfig.single(sorted(S), horizon)
        est, _ = expected_spread(graph, params, cfg, samples,
                                 0 if rng_seed is None else rng_seed)
        return est

    exact_fn = None
    if graph.m * horizon <= cap:
        def exact_fn(S):
            if not S:
                return 0.0
            cfg = CascadeConfig.single(sorted(S), horizon)
            return exact_spread(graph, params, cfg, cap=cap)

    return SetObjective(graph.n, fn, monotone=True, stochastic=True,
                        exact_fn=exact_fn, name="influence-spread")
