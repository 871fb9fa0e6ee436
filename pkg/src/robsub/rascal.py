"""Risk-averse maximization of stochastic continuous DR-submodular objectives.

Maximizes CVaR_alpha of F(x, y) over a downward-closed polytope by
coordinate ascent: a Frank-Wolfe step in x against a smoothed gradient of
the auxiliary objective H(x, tau) = tau - (1/alpha) E[(tau - F)^+], then an
exact reset of tau by one-dimensional search. The hinge is smoothed by a
quadratic ramp of width u, which restores differentiability with O(u) bias.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError
from .submod import CardinalityConstraint, swap_round
from .util import derive_seed, rng_from


@dataclass
class SmoothnessParams:
    l1: float = 1.0       # Lipschitz constant of F
    l2: float = 1.0       # Lipschitz constant of grad F
    grad_bound: float = 1.0
    value_bound: float = 1.0

    def __post_init__(self):
        if min(self.l1, self.l2, self.grad_bound, self.value_bound) <= 0:
            raise ParameterError("smoothness constants must be positive")


@dataclass
class ScenarioSet:
    """Weighted empirical collection of random-parameter draws."""

    scenarios: list
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.scenarios) == 0:
            raise ParameterError("scenario set must be nonempty")
        if self.weights.shape != (len(self.scenarios),) or self.weights.min() < 0:
            raise ParameterError("weights must be nonnegative, one per scenario")
        s = self.weights.sum()
        if abs(s - 1.0) > 1e-9:
            raise ParameterError("weights must sum to 1")

    @classmethod
    def uniform(cls, scenarios):
        k = len(scenarios)
        return cls(list(scenarios), np.full(k, 1.0 / k))


class StochasticObjective:
    """F(x, y) with per-scenario value/gradient and a scenario sampler.

    value must be monotone DR-submodular in x for each y, normalized so
    F(0, y) = 0, and bounded in [0, value_bound].
    """

    def __init__(self, n, upper, value_fn, grad_fn, sampler_fn,
                 smoothness=None, name="", check_normalized=True):
        self.n = int(n)
        self.upper = np.asarray(upper, dtype=np.float64) * np.ones(self.n)
        self._value = value_fn
        self._grad = grad_fn
        self._sampler = sampler_fn
        self.smoothness = smoothness or SmoothnessParams()
        self.name = name
        if check_normalized:
            rng = rng_from(0)
            for _ in range(3):
                y = sampler_fn(rng)
                v0 = float(value_fn(np.zeros(self.n), y))
                if abs(v0) > 1e-9:
                    raise ParameterError(f"objective not normalized: F(0, y) = {v0}")

    @property
    def value_bound(self):
        return self.smoothness.value_bound

    def value(self, x, y):
        return float(self._value(np.asarray(x, dtype=np.float64), y))

    def grad(self, x, y):
        return np.asarray(self._grad(np.asarray(x, dtype=np.float64), y),
                          dtype=np.float64)

    def sample_scenario(self, rng):
        return self._sampler(rng)

    def sample_scenarios(self, count, rng_seed):
        rng = rng_from(rng_seed)
        return ScenarioSet.uniform([self._sampler(rng) for _ in range(count)])

    def values(self, x, scenarios):
        x = np.asarray(x, dtype=np.float64)
        return np.array([self._value(x, y) for y in scenarios.scenarios])


@dataclass
class CvarConfig:
    alpha: float
    epsilon: float = 0.02
    delta: float = 0.1
    iterations: int = 100
    scenario_samples: int = 64
    smoothing_width: float = None  # default epsilon * alpha / L1

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError("alpha must lie in (0, 1]")
        if min(self.epsilon, self.delta) <= 0:
            raise ParameterError("epsilon and delta must be positive")
        if min(self.iterations, self.scenario_samples) <= 0:
            raise ParameterError("counts must be positive")

    def width(self, smoothness):
        if self.smoothing_width is not None:
            return self.smoothing_width
        return self.epsilon * self.alpha / smoothness.l1


# ---------------------------------------------------------------- polytopes

class BoxPolytope:
    def __init__(self, upper):
        self.upper = np.asarray(upper, dtype=np.float64)
        if self.upper.min() < 0:
            raise ParameterError("box upper bounds must be nonnegative")

    @property
    def n(self):
        return self.upper.size

    def linear_opt(self, w):
        return np.where(np.asarray(w) > 0, self.upper, 0.0)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x)
        return bool(x.min() >= -tol and np.all(x <= self.upper + tol))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper))


class BudgetSimplex:
    """{x >= 0, x <= upper, sum x <= budget}."""

    def __init__(self, n, budget, upper=1.0):
        self.nn = int(n)
        self.budget = float(budget)
        self.upper = np.asarray(upper, dtype=np.float64) * np.ones(self.nn)
        if self.budget < 0:
            raise ParameterError("budget must be nonnegative")

    @property
    def n(self):
        return self.nn

    def linear_opt(self, w):
        w = np.asarray(w, dtype=np.float64)
        x = np.zeros(self.nn)
        left = self.budget
        for i in sorted(range(self.nn), key=lambda i: (-w[i], i)):
            if w[i] <= 0 or left <= 0:
                break
            take = min(self.upper[i], left)
            x[i] = take
            left -= take
        return x

    def contains(self, x, tol=1e-9):
        x = np.asarray(x)
        return bool(x.min() >= -tol and np.all(x <= self.upper + tol)
                    and x.sum() <= self.budget + tol)

    @property
    def diameter(self):
        return float(np.linalg.norm(np.minimum(self.upper, self.budget)))


class MatroidPolytope:
    """Convex hull of independent-set indicators, via the constraint's
    linear-optimization greedy."""

    def __init__(self, constraint, n):
        self.constraint = constraint
        self.nn = int(n)

    @property
    def n(self):
        return self.nn

    def linear_opt(self, w):
        S = self.constraint.linear_opt(np.asarray(w, dtype=np.float64))
        x = np.zeros(self.nn)
        if S:
            x[list(S)] = 1.0
        return x

    def contains(self, x, tol=1e-9):
        x = np.asarray(x)
        if isinstance(self.constraint, CardinalityConstraint):
            return self.constraint.contains_point(x, tol=tol)
        return bool(x.min() >= -tol and x.max() <= 1 + tol)

    @property
    def diameter(self):
        return float(np.sqrt(self.nn))


# ------------------------------------------------------- empirical risk math

def empirical_var(values, weights, alpha):
    """inf tau with Pr[V <= tau] >= alpha over a weighted empirical distribution."""
    if alpha <= 0 or alpha > 1:
        raise ParameterError("alpha must lie in (0, 1]")
    order = np.argsort(values, kind="stable")
    cum = 0.0
    for i in order:
        cum += weights[i]
        if cum >= alpha - 1e-12:
            return float(values[i])
    return float(values[order[-1]])


def empirical_cvar(values, weights, alpha):
    """Mean of the lowest exactly-alpha probability mass (boundary atom split
    proportionally, so alpha=1 gives the plain mean)."""
    if alpha <= 0 or alpha > 1:
        raise ParameterError("alpha must lie in (0, 1]")
    order = np.argsort(values, kind="stable")
    remaining = alpha
    acc = 0.0
    for i in order:
        take = min(weights[i], remaining)
        acc += take * values[i]
        remaining -= take
        if remaining <= 1e-15:
            break
    return float(acc / alpha)


def var_alpha(obj, x, scenarios, alpha):
    vals = obj.values(x, scenarios)
    return empirical_var(vals, scenarios.weights, alpha)


def cvar_alpha(obj, x, scenarios, alpha):
    vals = obj.values(x, scenarios)
    return empirical_cvar(vals, scenarios.weights, alpha)


def h_objective(obj, x, tau, scenarios, alpha):
    """tau - (1/alpha) * E[(tau - F)^+], evaluated exactly on the scenario set."""
    vals = obj.values(x, scenarios)
    hinge = np.maximum(tau - vals, 0.0)
    return float(tau - (scenarios.weights @ hinge) / alpha)


def _ramp(t, u):
    """Derivative of the quadratic-smoothed hinge: clip(t/u, 0, 1)."""
    return np.clip(t / u, 0.0, 1.0)


def smoothed_hinge(t, u):
    t = np.asarray(t, dtype=np.float64)
    out = np.where(t <= 0, 0.0, np.where(t <= u, t * t / (2 * u), t - u / 2))
    return out


def h_smoothed(obj, x, tau, scenarios, alpha, u):
    vals = obj.values(x, scenarios)
    return float(tau - (scenarios.weights @ smoothed_hinge(tau - vals, u)) / alpha)


def smooth_tau(obj, x, scenarios, alpha, u):
    """Maximizer of the hinge-smoothed H over [0, value_bound].

    dH_u/dtau = 1 - (1/alpha) E[ramp(tau - F)] is nonincreasing in tau, so a
    bisection on its sign finds the argmax to tolerance u/10.
    """
    if u <= 0:
        raise ParameterError("smoothing width must be positive")
    vals = obj.values(x, scenarios)
    w = scenarios.weights
    M = obj.value_bound

    def deriv(tau):
        return 1.0 - float(w @ _ramp(tau - vals, u)) / alpha

    if deriv(M) > 0:
        return float(M)
    lo, hi = 0.0, float(M)
    while hi - lo > u / 10:
        mid = 0.5 * (lo + hi)
        if deriv(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def smooth_grad(obj, x, tau, scenarios, alpha, u):
    """(1/alpha) E[ramp(tau - F(x,y)) * grad F(x,y)]: the smoothed gradient of
    H_u with respect to x."""
    if u <= 0:
        raise ParameterError("smoothing width must be positive")
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros(obj.n)
    for y, w in zip(scenarios.scenarios, scenarios.weights):
        r = _ramp(tau - obj.value(x, y), u)
        if r > 0:
            out += w * r * obj.grad(x, y)
    return out / alpha


def rascal_solve(obj, polytope, cfg, rng_seed, scenarios=None, trace=None):
    """Frank-Wolfe coordinate ascent on (x, tau); returns the final x in P.

    Fresh scenario batches are drawn each iteration unless a fixed empirical
    ScenarioSet is supplied. `trace`, if a list, receives per-iteration
    (tau, cvar_estimate) pairs.
    """
    u = cfg.width(obj.smoothness)
    K = cfg.iterations
    x = np.zeros(obj.n)
    for t in range(K):
        scen = scenarios if scenarios is not None else obj.sample_scenarios(
            cfg.scenario_samples, derive_seed(rng_seed, 17, t))
        tau = smooth_tau(obj, x, scen, cfg.alpha, u)
        g = smooth_grad(obj, x, tau, scen, cfg.alpha, u)
        v = polytope.linear_opt(g)
        x = x + v / K
        if trace is not None:
            trace.append((tau, cvar_alpha(obj, x, scen, cfg.alpha)))
    return x


def expectation_fw(obj, polytope, cfg, rng_seed, scenarios=None):
    """Expectation-maximizing baseline: Frank-Wolfe on E[F] (the alpha = 1
    objective without the CVaR machinery)."""
    K = cfg.iterations
    x = np.zeros(obj.n)
    for t in range(K):
        scen = scenarios if scenarios is not None else obj.sample_scenarios(
            cfg.scenario_samples, derive_seed(rng_seed, 19, t))
        g = np.zeros(obj.n)
        for y, w in zip(scen.scenarios, scen.weights):
            g += w * obj.grad(x, y)
        v = polytope.linear_opt(g)
        x = x + v / K
    return x


# --------------------------------------------------- discrete portfolio route

def portfolio_reduction(scenario_objectives, constraint, weights=None,
                        smoothness=None, enum_cap=15):
    """Lift a per-scenario family of monotone submodular set functions to a
    continuous CVaR instance over the matroid polytope.

    Coordinates are inclusion marginals; per-scenario value/gradient are the
    exact multilinear extension (closed form when the objective provides
    one, 2^n enumeration below `enum_cap` otherwise). Returns
    (StochasticObjective, MatroidPolytope); round the solution with
    `round_portfolio`.
    """
    objs = list(scenario_objectives)
    if not objs:
        raise ParameterError("need at least one scenario objective")
    n = objs[0].n
    for f in objs:
        if not f.monotone:
            raise ParameterError("scenario objectives must be monotone")
        if f.n != n:
            raise ParameterError("scenario objectives must share a ground set")
    if weights is None:
        weights = np.full(len(objs), 1.0 / len(objs))

    def _ml_value(f, x):
        if hasattr(f, "exact_multilinear"):
            return f.exact_multilinear(x)
        if f.n > enum_cap:
            raise InputError("no exact multilinear and ground set too large")
        return _enum_multilinear(f, x)

    def _ml_grad(f, x):
        if hasattr(f, "exact_multilinear_grad"):
            return f.exact_multilinear_grad(x)
        grad = np.empty(f.n)
        for i in range(f.n):
            hi = x.copy(); hi[i] = 1.0
            lo = x.copy(); lo[i] = 0.0
            grad[i] = _ml_value(f, hi) - _ml_value(f, lo)
        return grad

    m_bound = max(f.exact_value(frozenset(range(n))) for f in objs)
    sm = smoothness or SmoothnessParams(
        l1=max(m_bound, 1e-9) * np.sqrt(n), l2=max(m_bound, 1e-9) * n,
        grad_bound=max(m_bound, 1e-9) * np.sqrt(n), value_bound=m_bound)
    rng_master = np.arange(len(objs))

    cont = StochasticObjective(
        n, np.ones(n),
        value_fn=lambda x, y: _ml_value(objs[y], x),
        grad_fn=lambda x, y: _ml_grad(objs[y], x),
        sampler_fn=lambda rng: int(rng.choice(rng_master, p=weights)),
        smoothness=sm, name="portfolio")
    return cont, MatroidPolytope(constraint, n)


def _enum_multilinear(f, x):
    import itertools
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    for S in itertools.product([0, 1], repeat=f.n):
        p = float(np.prod(np.where(np.array(S, dtype=bool), x, 1 - x)))
        if p > 0:
            total += p * f.exact_value(frozenset(np.nonzero(S)[0].tolist()))
    return total


def round_portfolio(x, constraint, count, rng_seed):
    """Interpret a fractional point as a portfolio: `count` swap-rounded sets."""
    return [swap_round(x, constraint, derive_seed(rng_seed, 23, i))
            for i in range(count)]


def empirical_scenarios(obj, count, rng_seed):
    return obj.sample_scenarios(count, rng_seed)
