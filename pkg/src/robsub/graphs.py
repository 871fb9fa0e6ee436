"""Undirected graphs, stochastic block model generation, and edge-list IO.

Nodes are dense integers 0..n-1. Edges are stored as a lexicographically
sorted (m, 2) array with u < v per row; adjacency is exposed in CSR form
with a parallel array mapping each CSR slot back to its undirected edge id
(each edge appears twice in CSR, once per endpoint).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError
from .util import rng_from


class Graph:
    """Immutable undirected graph with optional community labels."""

    def __init__(self, n, edges, labels=None):
        n = int(n)
        if n < 0:
            raise ParameterError("node count must be nonnegative")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise InputError("edges must be (u, v) pairs")
        if e.size and (e.min() < 0 or e.max() >= n):
            raise InputError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise InputError("self-loops are not allowed")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        e = np.stack([lo, hi], axis=1)
        order = np.lexsort((e[:, 1], e[:, 0]))
        e = e[order]
        if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise InputError("duplicate edges are not allowed")
        self.n = n
        self.edges = e
        self.edges.setflags(write=False)
        self.m = e.shape[0]
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise InputError("labels must cover all nodes")
            labels.setflags(write=False)
        self.labels = labels
        self._csr = None
        self._edge_index = None

    def csr(self):
        """(indptr int64[n+1], indices int32[2m], eids int32[2m]), sorted adjacency."""
        if self._csr is None:
            half_u = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
            half_v = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            eid = np.concatenate([np.arange(self.m), np.arange(self.m)])
            order = np.lexsort((half_v, half_u))
            indices = half_v[order].astype(np.int32)
            eids = eid[order].astype(np.int32)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, half_u + 1, 1)
            indptr = np.cumsum(indptr)
            self._csr = (indptr, indices, eids)
        return self._csr

    def neighbors(self, v):
        indptr, indices, _ = self.csr()
        return indices[indptr[v]:indptr[v + 1]]

    def degree(self, v):
        indptr, _, _ = self.csr()
        return int(indptr[v + 1] - indptr[v])

    def degrees(self):
        indptr, _, _ = self.csr()
        return np.diff(indptr)

    def edge_index(self):
        """dict mapping (u, v) with u < v to edge id."""
        if self._edge_index is None:
            self._edge_index = {(int(u), int(v)): i
                                for i, (u, v) in enumerate(self.edges)}
        return self._edge_index

    def has_edge(self, u, v):
        a, b = (u, v) if u < v else (v, u)
        return (a, b) in self.edge_index()

    def edge_set(self):
        return set(self.edge_index().keys())

    def __repr__(self):
        lab = "" if self.labels is None else ", labeled"
        return f"Graph(n={self.n}, m={self.m}{lab})"


class EdgeParams:
    """Per-edge propagation probabilities for a specific graph."""

    def __init__(self, graph, probs):
        self.graph = graph
        if isinstance(probs, dict):
            values = np.empty(graph.m, dtype=np.float64)
            index = graph.edge_index()
            if len(probs) != graph.m:
                raise ParameterError("probability map must cover every edge exactly once")
            for (u, v), p in probs.items():
                a, b = (u, v) if u < v else (v, u)
                if (a, b) not in index:
                    raise ParameterError(f"({u}, {v}) is not an edge of the graph")
                values[index[(a, b)]] = p
        else:
            values = np.asarray(probs, dtype=np.float64)
            if values.shape != (graph.m,):
                raise ParameterError("probability array must align with graph.edges")
            values = values.copy()
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ParameterError("propagation probabilities must lie in [0, 1]")
        values.setflags(write=False)
        self.values = values

    @classmethod
    def uniform(cls, graph, p):
        return cls(graph, np.full(graph.m, float(p)))

    def prob(self, u, v):
        a, b = (u, v) if u < v else (v, u)
        return float(self.values[self.graph.edge_index()[(a, b)]])


@dataclass(frozen=True)
class SbmParams:
    """Stochastic block model: community sizes and within/between edge probabilities."""

    sizes: tuple
    p_within: float
    p_between: float
    allow_inverted: bool = False  # permit p_between > p_within

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if len(self.sizes) == 0 or any(s <= 0 for s in self.sizes):
            raise ParameterError("community sizes must be positive and nonempty")
        for p in (self.p_within, self.p_between):
            if not 0.0 <= p <= 1.0:
                raise ParameterError("edge probabilities must lie in [0, 1]")
        if self.p_between > self.p_within and not self.allow_inverted:
            raise ParameterError("p_between > p_within; pass allow_inverted=True to permit")

    @property
    def n(self):
        return sum(self.sizes)


@dataclass(frozen=True)
class CascadeConfig:
    """Time horizon and per-step seed schedule (step 1 is the first step)."""

    horizon: int
    seed_schedule: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if int(self.horizon) < 1:
            raise ParameterError("horizon must be >= 1")
        object.__setattr__(self, "horizon", int(self.horizon))
        sched = tuple(tuple(sorted(int(v) for v in step)) for step in self.seed_schedule)
        if len(sched) > self.horizon:
            raise ParameterError("seed schedule longer than horizon")
        object.__setattr__(self, "seed_schedule", sched)

    @classmethod
    def single(cls, seeds, horizon):
        """All seeds activate at step 1."""
        return cls(horizon=horizon, seed_schedule=(tuple(seeds),))

    def validate_for(self, n):
        for step in self.seed_schedule:
            for v in step:
                if not 0 <= v < n:
                    raise InputError(f"seed {v} out of range for n={n}")

    def flat(self):
        """(nodes int64[], steps int64[]) with steps 1-based."""
        nodes, steps = [], []
        for t, step in enumerate(self.seed_schedule, start=1):
            for v in step:
                nodes.append(v)
                steps.append(t)
        return (np.asarray(nodes, dtype=np.int64),
                np.asarray(steps, dtype=np.int64))

    def all_seeds(self):
        out = set()
        for step in self.seed_schedule:
            out.update(step)
        return out


def generate_sbm(params, rng_seed):
    """Draw a labeled graph from the stochastic block model.

    Every within-community pair is joined independently with probability
    p_within, every between pair with p_between.
    """
    rng = rng_from(rng_seed)
    sizes = params.sizes
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    labels = np.concatenate([np.full(s, i, dtype=np.int64)
                             for i, s in enumerate(sizes)])
    chunks = []
    for b, s in enumerate(sizes):
        if s < 2 or params.p_within == 0.0:
            continue
        iu, iv = np.triu_indices(s, k=1)
        mask = rng.random(iu.shape[0]) < params.p_within
        if mask.any():
            chunks.append(np.stack([iu[mask] + offsets[b], iv[mask] + offsets[b]], axis=1))
    for a in range(len(sizes)):
        for b in range(a + 1, len(sizes)):
            if params.p_between == 0.0:
                continue
            sa, sb = sizes[a], sizes[b]
            mask = rng.random((sa, sb)) < params.p_between
            iu, iv = np.nonzero(mask)
            if iu.size:
                chunks.append(np.stack([iu + offsets[a], iv + offsets[b]], axis=1))
    edges = np.concatenate(chunks, axis=0) if chunks else np.empty((0, 2), dtype=np.int64)
    return Graph(n, edges, labels=labels)


def save_edge_list(graph, path, params=None):
    """Write "u v [p]" lines; '#' starts a comment."""
    with open(path, "w") as fh:
        fh.write(f"# nodes {graph.n}\n")
        for i, (u, v) in enumerate(graph.edges):
            if params is not None:
                fh.write(f"{u} {v} {float(params.values[i])!r}\n")
            else:
                fh.write(f"{u} {v}\n")


def load_edge_list(path, n=None):
    """Read an edge-list file; returns (Graph, EdgeParams or None).

    A "# nodes N" comment (as written by save_edge_list) sets n unless the
    caller overrides it; otherwise n is max node id + 1.
    """
    edges, probs = [], []
    header_n = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "nodes":
                    header_n = int(parts[1])
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise InputError(f"bad edge line: {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
            if len(parts) == 3:
                probs.append(float(parts[2]))
    if probs and len(probs) != len(edges):
        raise InputError("either every edge line carries a probability or none do")
    if n is None:
        n = header_n if header_n is not None else (
            max((max(u, v) for u, v in edges), default=-1) + 1)
    graph = Graph(n, edges)
    if not probs:
        return graph, None
    prob_map = {e: p for e, p in zip(edges, probs)}
    return graph, EdgeParams(graph, prob_map)


def save_labels(graph, path):
    if graph.labels is None:
        raise InputError("graph has no labels")
    with open(path, "w") as fh:
        for v, lab in enumerate(graph.labels):
            fh.write(f"{v} {lab}\n")


def load_labels(path, n):
    labels = np.full(n, -1, dtype=np.int64)
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            v, lab = line.split()
            labels[int(v)] = int(lab)
    if np.any(labels < 0):
        raise InputError("labels file does not cover all nodes")
    return labels
