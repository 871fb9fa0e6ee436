"""Robust submodular maximization over a family of objectives.

The continuous route (EQUATOR) runs stochastic Frank-Wolfe on the pointwise
minimum of the members' multilinear extensions, querying a best-response
oracle at each iterate and rounding the final point by randomized swaps.
Baselines: double oracle over explicit members, and an exact LP over the
full payoff matrix at desk scale.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError, SizeCapError
from .lpgame import solve_zero_sum
from .submod import (FractionalPoint, SetObjective, greedy_maximize,
                     swap_round)
from .util import derive_seed, rng_from


class ObjectiveFamily:
    """Uncertainty set of monotone normalized objectives.

    Either explicit (a list of SetObjective) or implicit, exposed only
    through a best-response oracle `bri(x, samples, rng_seed) -> SetObjective`
    that returns the member minimizing the expected value under independent
    inclusion with marginals x.
    """

    def __init__(self, members=None, bri=None, n=None, M=None):
        if members is None and bri is None:
            raise ParameterError("family needs members or a BRI oracle")
        self.members = list(members) if members is not None else None
        self._bri = bri
        if self.members:
            for f in self.members:
                if not f.monotone:
                    raise ParameterError("family members must be monotone")
            self.n = self.members[0].n
            if any(f.n != self.n for f in self.members):
                raise ParameterError("members must share a ground set")
            max_single = max(f.max_singleton() for f in self.members)
            if M is None:
                M = max_single
            elif M < max_single - 1e-9:
                raise ParameterError(
                    f"M={M} below largest singleton value {max_single}")
        else:
            if n is None or M is None:
                raise ParameterError("implicit family needs n and M")
            self.n = int(n)
        self.M = float(M)

    @property
    def explicit(self):
        return self.members is not None

    @property
    def m(self):
        return len(self.members) if self.explicit else None

    def mixture_objective(self, q):
        """Weighted average of explicit members (monotone submodular)."""
        if not self.explicit:
            raise InputError("mixture objective needs explicit members")
        q = np.asarray(q, dtype=np.float64)
        members = self.members

        def fn(S):
            return float(sum(w * f.exact_value(S) for w, f in zip(q, members) if w > 0))

        def batch(mat):
            out = np.zeros(mat.shape[0])
            for w, f in zip(q, members):
                if w > 0:
                    out += w * f.value_batch(mat)
            return out

        return SetObjective(self.n, fn, monotone=True, batch_fn=batch,
                            name="mixture")

    def mean_objective(self):
        return self.mixture_objective(np.full(self.m, 1.0 / self.m))

    def best_response(self, x, samples, rng_seed):
        """Minimizing member at marginals x (common random subsets for
        explicit families; delegates to the BRI oracle otherwise)."""
        if self.explicit:
            idx = bri_enumerative(self, x, samples, rng_seed)
            return self.members[idx]
        return self._bri(x, samples, rng_seed)


def bri_enumerative(family, x, samples, rng_seed):
    """argmin over explicit members of E_{S~x}[f_i(S)], estimated on shared
    subsets; ties break toward the lowest index."""
    if not family.explicit:
        raise InputError("enumerative best response needs explicit members")
    x = x.x if isinstance(x, FractionalPoint) else np.asarray(x, dtype=np.float64)
    rng = rng_from(rng_seed)
    mat = rng.random((samples, x.size)) < x
    best, best_val = 0, np.inf
    for i, f in enumerate(family.members):
        seed = derive_seed(rng_seed, 7, i) if f.stochastic else None
        val = float(f.value_batch(mat, rng_seed=seed).mean())
        if val < best_val - 1e-15:
            best, best_val = i, val
    return best


class MixedStrategy:
    """Distribution over feasible sets: explicit support or a rounding sampler."""

    def __init__(self, support=None, sampler=None):
        if (support is None) == (sampler is None):
            raise ParameterError("exactly one of support/sampler required")
        if support is not None:
            pairs = [(frozenset(S), float(w)) for S, w in support]
            total = sum(w for _, w in pairs)
            if any(w < -1e-12 for _, w in pairs) or abs(total - 1.0) > 1e-9:
                raise ParameterError("support weights must be nonnegative and sum to 1")
            merged = {}
            for S, w in pairs:
                merged[S] = merged.get(S, 0.0) + w
            self.support = sorted(merged.items(), key=lambda t: sorted(t[0]))
        else:
            self.support = None
        self.sampler = sampler  # (x, constraint, decomposition or None)

    @classmethod
    def pure(cls, S):
        return cls(support=[(frozenset(S), 1.0)])

    @classmethod
    def from_sampler(cls, x, constraint, decomposition=None):
        return cls(sampler=(np.asarray(x, dtype=np.float64), constraint, decomposition))

    @property
    def is_sampler(self):
        return self.sampler is not None

    def sample(self, rng_seed):
        if self.is_sampler:
            x, constraint, decomposition = self.sampler
            return swap_round(x, constraint, rng_seed, decomposition=decomposition)
        rng = rng_from(rng_seed)
        r = rng.random()
        acc = 0.0
        for S, w in self.support:
            acc += w
            if r < acc:
                return set(S)
        return set(self.support[-1][0])

    def to_sparse(self, count, rng_seed):
        """Uniform distribution over `count` independent samples."""
        draws = [frozenset(self.sample(derive_seed(rng_seed, i))) for i in range(count)]
        return MixedStrategy(support=[(S, 1.0 / count) for S in draws])

    def expected_value(self, f):
        """Exact expectation of a deterministic/exact objective over the support."""
        if self.is_sampler:
            raise InputError("exact expectation needs explicit support; use to_sparse")
        return float(sum(w * f.exact_value(S) for S, w in self.support))


@dataclass
class EquatorConfig:
    epsilon: float = 0.05
    delta: float = 0.1
    iterations: int = 50
    grad_samples: int = 64
    eval_samples: int = 256
    strategy_samples: int = 200
    bri_samples: int = 32          # subsets per perturbed best-response call
    smoothing_radius: float = 0.1  # perturbation width of the smoothed minimum

    def __post_init__(self):
        if min(self.epsilon, self.delta) <= 0:
            raise ParameterError("epsilon and delta must be positive")
        if min(self.iterations, self.grad_samples, self.eval_samples,
               self.strategy_samples, self.bri_samples) <= 0:
            raise ParameterError("iteration/sample counts must be positive")
        if self.smoothing_radius <= 0:
            raise ParameterError("smoothing radius must be positive")


def _select_members(family, points, bri_samples, rng_seed):
    """Best-response member index per row of `points` (perturbed iterates),
    all estimated on shared random subsets."""
    rng = rng_from(rng_seed)
    s, n = points.shape
    mat = rng.random((s, bri_samples, n)) < points[:, None, :]
    flat = mat.reshape(s * bri_samples, n)
    est = np.empty((family.m, s))
    for j, f in enumerate(family.members):
        seed = derive_seed(rng_seed, 7, j) if f.stochastic else None
        vals = f.value_batch(flat, rng_seed=seed).reshape(s, bri_samples)
        est[j] = vals.mean(axis=1)
    return np.argmin(est, axis=0)


def _grad_rows_sum(f, mat):
    """Sum over rows of the per-component marginal difference
    f(S + i) - f(S - i); one stacked batch evaluation per objective."""
    rows, n = mat.shape
    hi = np.repeat(mat, n, axis=0)
    hi[np.arange(rows * n), np.tile(np.arange(n), rows)] = True
    lo = np.repeat(mat, n, axis=0)
    lo[np.arange(rows * n), np.tile(np.arange(n), rows)] = False
    diff = f.value_batch(hi) - f.value_batch(lo)
    return diff.reshape(rows, n).sum(axis=0)


def equator_solve(family, constraint, cfg, rng_seed):
    """Stochastic Frank-Wolfe on the smoothed pointwise minimum of the
    members' multilinear extensions.

    Each gradient sample perturbs the iterate inside a radius-u box, asks
    the best-response oracle which member attains the minimum there, and
    takes a one-subset estimate of that member's multilinear gradient;
    averaging over samples smooths the nonsmooth minimum so ties between
    members spread the ascent direction instead of collapsing it. The step
    is a linear optimization over the constraint polytope with step size
    1/iterations, so the final point is a convex combination of polytope
    vertices; that decomposition drives the swap-rounding sampler.
    """
    if cfg.epsilon > family.M + 1e-12:
        raise ParameterError("epsilon exceeds the family value bound M")
    n = family.n
    K = cfg.iterations
    u = cfg.smoothing_radius
    x = np.zeros(n)
    vertices = []
    for t in range(K):
        rng = rng_from(derive_seed(rng_seed, 11, t))
        Z = rng.uniform(-u, u, size=(cfg.grad_samples, n))
        pts = np.clip(x[None, :] + Z, 0.0, 1.0)
        if family.explicit:
            sel = _select_members(family, pts, cfg.bri_samples,
                                  derive_seed(rng_seed, 13, t))
        else:
            sel = np.array([-1] * cfg.grad_samples)
        subsets = rng.random((cfg.grad_samples, n)) < pts
        grad = np.zeros(n)
        if family.explicit:
            for j in np.unique(sel):
                rows = subsets[sel == j]
                grad += _grad_rows_sum(family.members[j], rows)
        else:
            for r in range(cfg.grad_samples):
                f_sel = family.best_response(pts[r], cfg.bri_samples,
                                             derive_seed(rng_seed, 13, t, r))
                grad += _grad_rows_sum(f_sel, subsets[r:r + 1])
        grad /= cfg.grad_samples
        v = constraint.linear_opt(grad)
        ind = np.zeros(n)
        if v:
            ind[list(v)] = 1.0
        x = x + ind / K
        vertices.append(frozenset(v))
    weights = [1.0 / K] * K
    strategy = MixedStrategy.from_sampler(x, constraint, decomposition=(vertices, weights))
    return FractionalPoint(x), strategy


def sample_pure_strategy(strategy_or_x, constraint, rng_seed):
    """Draw one feasible set (the deployment path for exponential-support
    equilibria)."""
    if isinstance(strategy_or_x, MixedStrategy):
        return strategy_or_x.sample(rng_seed)
    return swap_round(strategy_or_x, constraint, rng_seed)


def worst_case_value(strategy, family, samples=None, rng_seed=None):
    """min over members of the strategy's expected value; exact over explicit
    support, Monte Carlo (via to_sparse) for sampler strategies."""
    if not family.explicit:
        raise InputError("worst-case evaluation needs explicit members")
    if strategy.is_sampler:
        if samples is None:
            raise ParameterError("sampler strategies need a sample count")
        strategy = strategy.to_sparse(samples, rng_seed if rng_seed is not None else 0)
    return min(strategy.expected_value(f) for f in family.members)


@dataclass
class DoubleOracleResult:
    strategy: MixedStrategy
    adversary: np.ndarray
    value: float
    converged: bool
    iterations: int
    value_trace: list = field(default_factory=list)
    support_trace: list = field(default_factory=list)


def double_oracle_solve(family, constraint, tol=1e-6, max_iters=100, rng_seed=0,
                        time_cap=None):
    """Equilibrium by incremental best responses for the influencer.

    The adversary's strategies are enumerable by precondition, so every
    member is a column of the restricted game from the start; the
    influencer's exponential side grows by greedy best responses to the
    adversary's current mixture. Each LP therefore only ever gains rows and
    the restricted value is nondecreasing. Terminates when neither best
    response improves the value by more than tol (the adversary's exact best
    response is a column of the solved game, so its improvement is never
    positive)."""
    import time as _time
    if not family.explicit:
        raise InputError("double oracle needs explicit members")
    if max_iters < 1:
        raise ParameterError("max_iters must be >= 1")
    t0 = _time.perf_counter()
    start = frozenset(greedy_maximize(family.mean_objective(), constraint))
    sets = [start]
    payoff_rows = [[f.exact_value(start) for f in family.members]]
    value, p, q = None, np.array([1.0]), None
    trace, support_trace = [], []
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        value, p, q = solve_zero_sum(np.array(payoff_rows))
        trace.append(value)
        support_trace.append((int(np.sum(p > 1e-12)), int(np.sum(q > 1e-12))))
        br_set = frozenset(greedy_maximize(family.mixture_objective(q), constraint))
        br_val = float(sum(w * f.exact_value(br_set)
                           for w, f in zip(q, family.members) if w > 0))
        if br_val - value <= tol or br_set in sets:
            converged = True
            break
        sets.append(br_set)
        payoff_rows.append([f.exact_value(br_set) for f in family.members])
        if time_cap is not None and _time.perf_counter() - t0 > time_cap:
            break
    strategy = MixedStrategy(support=[(S, float(w)) for S, w in zip(sets, p)
                                      if w > 1e-12])
    return DoubleOracleResult(strategy, np.asarray(q), float(value), converged,
                              iters, trace, support_trace)


def exact_minimax_lp(family, constraint, set_cap=5000, member_cap=100):
    """Exact solution of the zero-sum objective game by full enumeration."""
    if not family.explicit:
        raise InputError("exact LP needs explicit members")
    if family.m > member_cap:
        raise SizeCapError(f"m={family.m} exceeds member cap {member_cap}")
    sets = list(constraint.enumerate_feasible(family.n, cap=set_cap))
    payoff = np.array([[f.exact_value(S) for f in family.members] for S in sets])
    value, p, q = solve_zero_sum(payoff)
    strategy = MixedStrategy(support=[(S, float(w)) for S, w in zip(sets, p)
                                      if w > 1e-12])
    return float(value), strategy, q
