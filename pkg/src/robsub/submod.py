"""Monotone submodular set functions, constraints, greedy, multilinear
estimation, swap rounding, and brute-force oracles.

Ground sets are {0..n-1}. Stochastic objectives take an explicit evaluation
seed; everything here is pure given the seeds.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError, SizeCapError
from .util import derive_seed, rng_from


@dataclass
class FractionalPoint:
    """Point in [0,1]^n with marginal-probability semantics."""

    x: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 1:
            raise InputError("fractional point must be a vector")
        if self.x.size and (self.x.min() < -1e-12 or self.x.max() > 1 + 1e-12):
            raise InputError("coordinates must lie in [0, 1]")
        self.x = np.clip(self.x, 0.0, 1.0)


def _as_vector(x):
    return x.x if isinstance(x, FractionalPoint) else np.asarray(x, dtype=np.float64)


class SetObjective:
    """Set function wrapper. evaluate(frozenset, rng_seed) -> float.

    `monotone` is a declaration by the constructor (spot-checked in tests,
    trusted by the algorithms). Normalization f(empty)=0 is checked at
    construction. `exact_fn`, when given, is the noise-free evaluator used
    by enumeration oracles.
    """

    def __init__(self, n, fn, monotone=True, stochastic=False, exact_fn=None,
                 batch_fn=None, name=""):
        self.n = int(n)
        self._fn = fn
        self.monotone = bool(monotone)
        self.stochastic = bool(stochastic)
        self._exact_fn = exact_fn
        self._batch_fn = batch_fn
        self.name = name
        v0 = self.value(frozenset(), rng_seed=0)
        if abs(v0) > 1e-9:
            raise ParameterError(f"objective must be normalized: f(empty) = {v0}")

    def value(self, S, rng_seed=None):
        S = frozenset(int(v) for v in S)
        if self.stochastic:
            return float(self._fn(S, rng_seed))
        return float(self._fn(S))

    def exact_value(self, S):
        S = frozenset(int(v) for v in S)
        if self._exact_fn is not None:
            return float(self._exact_fn(S))
        if not self.stochastic:
            return float(self._fn(S))
        raise InputError("stochastic objective has no exact evaluator")

    @property
    def has_exact(self):
        return self._exact_fn is not None or not self.stochastic

    def value_batch(self, mat, rng_seed=None):
        """Evaluate rows of a (B, n) boolean membership matrix."""
        mat = np.asarray(mat, dtype=bool)
        if self._batch_fn is not None:
            return np.asarray(self._batch_fn(mat), dtype=np.float64)
        out = np.empty(mat.shape[0])
        for r in range(mat.shape[0]):
            S = frozenset(np.nonzero(mat[r])[0].tolist())
            seed = None if rng_seed is None else derive_seed(rng_seed, r)
            out[r] = self.value(S, rng_seed=seed)
        return out

    def max_singleton(self):
        return max((self.exact_value(frozenset([j])) for j in range(self.n)),
                   default=0.0)


class ModularObjective(SetObjective):
    """f(S) = sum of per-item weights (weights >= 0)."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.size and w.min() < 0:
            raise ParameterError("modular weights must be nonnegative")
        self.weights = w
        super().__init__(
            len(w),
            lambda S: float(w[list(S)].sum()) if S else 0.0,
            monotone=True,
            batch_fn=lambda mat: mat.astype(np.float64) @ w,
            name="modular",
        )


class CoverageObjective(SetObjective):
    """Weighted coverage: f(S) = total weight of universe elements covered.

    `covers[i]` is the set of universe elements item i covers.
    """

    def __init__(self, covers, element_weights):
        w = np.asarray(element_weights, dtype=np.float64)
        if w.size and w.min() < 0:
            raise ParameterError("element weights must be nonnegative")
        n = len(covers)
        inc = np.zeros((n, len(w)), dtype=bool)
        for i, cov in enumerate(covers):
            for e in cov:
                inc[i, e] = True
        self.incidence = inc
        self.element_weights = w

        def batch(mat):
            covered = mat.astype(np.float64) @ inc.astype(np.float64) > 0
            return covered @ w

        super().__init__(
            n,
            lambda S: float(w[inc[list(S)].any(axis=0)].sum()) if S else 0.0,
            monotone=True,
            batch_fn=batch,
            name="coverage",
        )

    def exact_multilinear(self, x):
        """Closed-form multilinear extension: per element, 1 - prod(1 - x_i)."""
        x = _as_vector(x)
        miss = np.ones(self.incidence.shape[1])
        for i in range(self.n):
            miss[self.incidence[i]] *= 1.0 - x[i]
        return float(self.element_weights @ (1.0 - miss))

    def exact_multilinear_grad(self, x):
        x = _as_vector(x)
        inc = self.incidence
        grad = np.zeros(self.n)
        for i in range(self.n):
            others = np.ones(inc.shape[1])
            for j in range(self.n):
                if j != i:
                    others[inc[j]] *= 1.0 - x[j]
            grad[i] = float(self.element_weights[inc[i]] @ others[inc[i]])
        return grad


class CardinalityConstraint:
    """At most k items (the uniform matroid)."""

    def __init__(self, k):
        k = int(k)
        if k < 0:
            raise ParameterError("k must be nonnegative")
        self.k = k

    def is_feasible(self, S):
        return len(set(S)) <= self.k

    def linear_opt(self, weights):
        """Vertex of the polytope maximizing a linear objective: top-k positive
        weights, ties toward lower ids."""
        w = np.asarray(weights, dtype=np.float64)
        order = sorted(range(len(w)), key=lambda i: (-w[i], i))
        return [i for i in order[:self.k] if w[i] > 0.0]

    def contains_point(self, x, tol=1e-9):
        x = _as_vector(x)
        return bool(x.min() >= -tol and x.max() <= 1 + tol and x.sum() <= self.k + tol)

    def enumerate_feasible(self, n, cap=10**6):
        total = sum(_comb(n, r) for r in range(min(self.k, n) + 1))
        if total > cap:
            raise SizeCapError(f"{total} feasible sets exceed cap {cap}")
        for r in range(min(self.k, n) + 1):
            for S in itertools.combinations(range(n), r):
                yield frozenset(S)


class MatroidConstraint:
    """Matroid given by an independence oracle over frozensets."""

    def __init__(self, n, indep_fn):
        self.n = int(n)
        self._indep = indep_fn
        if not indep_fn(frozenset()):
            raise ParameterError("independence oracle must accept the empty set")

    def is_feasible(self, S):
        return bool(self._indep(frozenset(int(v) for v in S)))

    def linear_opt(self, weights):
        """Matroid greedy on weights: descending positive weights, ties to lower id."""
        w = np.asarray(weights, dtype=np.float64)
        chosen = []
        cur = frozenset()
        for i in sorted(range(len(w)), key=lambda i: (-w[i], i)):
            if w[i] <= 0.0:
                break
            if self._indep(cur | {i}):
                chosen.append(i)
                cur = cur | {i}
        return chosen

    def contains_point(self, x, tol=1e-9):
        # Full membership needs the decomposition; only box bounds checked here.
        x = _as_vector(x)
        return bool(x.min() >= -tol and x.max() <= 1 + tol)

    def enumerate_feasible(self, n=None, cap=10**6):
        n = self.n if n is None else n
        seen = {frozenset()}
        frontier = [frozenset()]
        yield frozenset()
        while frontier:
            nxt = []
            for S in frontier:
                lo = max(S) + 1 if S else 0
                for v in range(lo, n):
                    T = S | {v}
                    if T not in seen and self._indep(T):
                        seen.add(T)
                        if len(seen) > cap:
                            raise SizeCapError(f"feasible sets exceed cap {cap}")
                        yield T
                        nxt.append(T)
            frontier = nxt


def partition_matroid(parts, caps):
    """Partition matroid: at most caps[j] items from parts[j]."""
    owner = {}
    for j, part in enumerate(parts):
        for v in part:
            owner[int(v)] = j
    caps = list(caps)
    n = max(owner) + 1 if owner else 0

    def indep(S):
        used = [0] * len(caps)
        for v in S:
            if v not in owner:
                return False
            used[owner[v]] += 1
            if used[owner[v]] > caps[owner[v]]:
                return False
        return True

    return MatroidConstraint(n, indep)


def _comb(n, r):
    from math import comb
    return comb(n, r)


def greedy_maximize(f, constraint, samples_per_eval=1, rng_seed=None):
    """Greedy: repeatedly add the feasible item of largest estimated marginal
    gain; ties break toward the lowest id. Refuses non-monotone objectives."""
    if not f.monotone:
        raise ParameterError("greedy_maximize requires a monotone objective")
    S = []
    Sset = frozenset()
    round_no = 0
    while True:
        cands = [v for v in range(f.n)
                 if v not in Sset and constraint.is_feasible(Sset | {v})]
        if not cands:
            break
        if f.stochastic:
            seeds = [derive_seed(rng_seed or 0, round_no, r)
                     for r in range(samples_per_eval)]
            base = np.mean([f.value(Sset, rng_seed=s) for s in seeds])
            best_v, best_gain = None, -np.inf
            for v in cands:
                est = np.mean([f.value(Sset | {v}, rng_seed=s) for s in seeds])
                gain = est - base
                if gain > best_gain + 1e-15:
                    best_v, best_gain = v, gain
        else:
            base = f.value(Sset)
            best_v, best_gain = None, -np.inf
            for v in cands:
                gain = f.value(Sset | {v}) - base
                if gain > best_gain + 1e-15:
                    best_v, best_gain = v, gain
        S.append(best_v)
        Sset = Sset | {best_v}
        round_no += 1
    return sorted(Sset)


def multilinear_value(f, x, samples, rng_seed):
    """Monte Carlo multilinear extension: mean of f over S ~ x."""
    x = _as_vector(x)
    rng = rng_from(rng_seed)
    mat = rng.random((samples, x.size)) < x
    seed = derive_seed(rng_seed, 1) if f.stochastic else None
    return float(f.value_batch(mat, rng_seed=seed).mean())


def multilinear_grad(f, x, samples, rng_seed):
    """Per-component E[f(S + i) - f(S - i)] using common samples across
    components."""
    x = _as_vector(x)
    rng = rng_from(rng_seed)
    mat = rng.random((samples, x.size)) < x
    grad = np.empty(x.size)
    for i in range(x.size):
        with_i = mat.copy()
        with_i[:, i] = True
        without_i = mat.copy()
        without_i[:, i] = False
        seed = derive_seed(rng_seed, 2, i) if f.stochastic else None
        grad[i] = float((f.value_batch(with_i, rng_seed=seed)
                         - f.value_batch(without_i, rng_seed=seed)).mean())
    return grad


def _merge_independent(constraint, s1, w1, s2, w2, rng):
    """Merge two weighted independent sets into one, preserving per-item
    marginals w1*1[s1] + w2*1[s2] (normalized). Needs the exchange property;
    any pair works for cardinality constraints."""
    s1, s2 = set(s1), set(s2)
    uniform = isinstance(constraint, CardinalityConstraint)
    while s1 != s2:
        d1 = sorted(s1 - s2)
        d2 = sorted(s2 - s1)
        if d1 and d2 and len(s1) == len(s2):
            if uniform:
                i, j = d1[0], d2[0]
            else:
                i = j = None
                for ci in d1:
                    for cj in d2:
                        if (constraint.is_feasible(frozenset(s1) - {ci} | {cj})
                                and constraint.is_feasible(frozenset(s2) - {cj} | {ci})):
                            i, j = ci, cj
                            break
                    if i is not None:
                        break
                if i is None:
                    raise InputError("matroid exchange failed; oracle is not a matroid")
            if rng.random() < w1 / (w1 + w2):
                s2.discard(j)
                s2.add(i)
            else:
                s1.discard(i)
                s1.add(j)
        elif len(s1) > len(s2):
            i = next((c for c in d1
                      if uniform or constraint.is_feasible(frozenset(s2) | {c})), None)
            if i is None:
                raise InputError("matroid augmentation failed")
            if rng.random() < w1 / (w1 + w2):
                s2.add(i)
            else:
                s1.discard(i)
        else:
            j = next((c for c in d2
                      if uniform or constraint.is_feasible(frozenset(s1) | {c})), None)
            if j is None:
                raise InputError("matroid augmentation failed")
            if rng.random() < w2 / (w1 + w2):
                s1.add(j)
            else:
                s2.discard(j)
    return s1


def swap_round(x, constraint, rng_seed, decomposition=None):
    """Round a polytope point to an independent set, preserving marginals.

    Cardinality constraints use pairwise dependent rounding on x directly
    (each pair move is a martingale along a convex direction of the
    multilinear extension, so marginals are exact and expected objective
    value does not drop). General matroids merge an explicit convex
    decomposition (independent sets + weights) by randomized swaps;
    Frank-Wolfe supplies that decomposition.
    """
    rng = rng_from(rng_seed)
    x = _as_vector(x)
    if decomposition is not None and not isinstance(constraint, CardinalityConstraint):
        sets, weights = decomposition
        if not sets:
            return set()
        merged = set(sets[0])
        wsum = float(weights[0])
        for S, w in zip(sets[1:], weights[1:]):
            merged = _merge_independent(constraint, merged, wsum, set(S), float(w), rng)
            wsum += float(w)
        # leftover fractional mass (sum of weights < 1) means "empty set" slack
        if wsum < 1.0 - 1e-12:
            merged = _merge_independent(constraint, merged, wsum, set(), 1.0 - wsum, rng)
        return merged
    if isinstance(constraint, CardinalityConstraint):
        if not constraint.contains_point(x):
            raise InputError("point outside the cardinality polytope")
        y = x.copy()
        frac = [i for i in range(y.size) if 1e-12 < y[i] < 1 - 1e-12]
        while len(frac) >= 2:
            i, j = frac[0], frac[1]
            up = min(1.0 - y[i], y[j])
            dn = min(y[i], 1.0 - y[j])
            if rng.random() < dn / (up + dn):
                y[i] += up
                y[j] -= up
            else:
                y[i] -= dn
                y[j] += dn
            frac = [t for t in frac if 1e-12 < y[t] < 1 - 1e-12]
        if frac:
            i = frac[0]
            y[i] = 1.0 if rng.random() < y[i] else 0.0
        return set(np.nonzero(y > 0.5)[0].tolist())
    raise InputError("general matroid rounding requires a decomposition")


def exhaustive_opt(f, constraint, cap=10**6):
    """Exact maximizer by enumerating feasible sets (exact evaluation only)."""
    if not f.has_exact:
        raise InputError("exhaustive_opt needs an exact evaluator")
    best, best_val = frozenset(), f.exact_value(frozenset())
    for S in constraint.enumerate_feasible(f.n, cap=cap):
        v = f.exact_value(S)
        if v > best_val + 1e-15:
            best, best_val = S, v
    return set(best), float(best_val)
