"""Immutable undirected multigraph in compressed adjacency form."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np
from numba import njit


class GraphError(ValueError):
    """Raised for malformed graph input."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class Graph:
    """Undirected multigraph on dense ids ``0..n-1``.

    ``edges`` keeps the construction order (parallel edges and self-loops
    included). ``indptr``/``indices`` hold the sorted neighbor multiset of
    every node; a self-loop lists the node once in its own row but adds 2
    to its degree.
    """

    __slots__ = ("n", "edges", "indptr", "indices", "degree", "max_degree", "_simple")

    def __init__(self, n, edges, indptr, indices, degree):
        self.n = int(n)
        self.edges = _frozen(edges)
        self.indptr = _frozen(indptr)
        self.indices = _frozen(indices)
        self.degree = _frozen(degree)
        self.max_degree = int(degree.max()) if n else 0
        self._simple = None

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def neighbors(self, u: int) -> np.ndarray:
        if not 0 <= u < self.n:
            raise IndexError(f"node {u} out of range for graph with {self.n} nodes")
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def simple_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR of neighbor *sets* (parallel edges collapsed), computed once."""
        if self._simple is None:
            idx = self.indices
            if idx.size:
                rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
                keep = np.ones(idx.size, dtype=bool)
                keep[1:] = (idx[1:] != idx[:-1]) | (rows[1:] != rows[:-1])
                sidx = idx[keep]
                counts = np.bincount(rows[keep], minlength=self.n)
            else:
                sidx = idx.copy()
                counts = np.zeros(self.n, dtype=np.int64)
            sptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(counts, out=sptr[1:])
            self._simple = (_frozen(sptr), _frozen(sidx))
        return self._simple

    def to_bytes(self) -> bytes:
        """Canonical serialization: node count followed by the edge array."""
        return np.int64(self.n).tobytes() + np.ascontiguousarray(self.edges, dtype="<i8").tobytes()

    def check(self) -> None:
        """Assert structural invariants; cheap enough to run after construction."""
        assert int(self.degree.sum()) == 2 * self.num_edges, "handshake sum violated"
        assert np.all(np.diff(self.indptr) >= 0)
        if self.n:
            assert self.max_degree == int(self.degree.max())

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges}, max_degree={self.max_degree})"


@njit(cache=True, nogil=True)
def _csr(n, edges):
    degree = np.zeros(n, dtype=np.int64)
    counts = np.zeros(n + 1, dtype=np.int64)
    for e in range(edges.shape[0]):
        u = edges[e, 0]
        v = edges[e, 1]
        degree[u] += 1
        degree[v] += 1
        counts[u + 1] += 1
        if u != v:
            counts[v + 1] += 1
    indptr = np.cumsum(counts)
    fill = indptr[:-1].copy()
    indices = np.empty(indptr[n], dtype=np.int64)
    for e in range(edges.shape[0]):
        u = edges[e, 0]
        v = edges[e, 1]
        indices[fill[u]] = v
        fill[u] += 1
        if u != v:
            indices[fill[v]] = u
            fill[v] += 1
    for x in range(n):
        lo = indptr[x]
        hi = indptr[x + 1]
        if hi - lo > 1:
            indices[lo:hi] = np.sort(indices[lo:hi])
    return indptr, indices, degree


def build_graph(n: int, edge_list: Iterable | np.ndarray) -> Graph:
    """Build a :class:`Graph` from ``n`` and an iterable of ``(u, v)`` pairs."""
    n = int(n)
    if n < 0:
        raise GraphError(f"node count must be non-negative, got {n}")
    edges = np.asarray(edge_list, dtype=np.int64)
    if edges.size == 0:
        edges = np.zeros((0, 2), dtype=np.int64)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise GraphError(f"edge list must have shape (E, 2), got {edges.shape}")
    bad = (edges < 0) | (edges >= n)
    if bad.any():
        i = int(np.flatnonzero(bad.any(axis=1))[0])
        raise GraphError(
            f"edge index {i} ({edges[i, 0]}, {edges[i, 1]}) has an id outside [0, {n})"
        )
    edges = np.ascontiguousarray(edges)
    indptr, indices, degree = _csr(n, edges)
    g = Graph(n, edges, indptr, indices, degree)
    g.check()
    return g


def neighbors(g: Graph, u: int) -> np.ndarray:
    return g.neighbors(u)


def induced_subgraph(
    g: Graph, keep: np.ndarray | Callable[[int], bool]
) -> tuple[Graph, np.ndarray]:
    """Subgraph on the kept nodes, relabelled densely in increasing old-id order.

    ``keep`` is a boolean mask of length ``n`` or a predicate on node ids.
    Returns the subgraph and an ``old -> new`` table holding -1 for dropped
    nodes.
    """
    if callable(keep):
        mask = np.fromiter((bool(keep(x)) for x in range(g.n)), dtype=bool, count=g.n)
    else:
        mask = np.asarray(keep, dtype=bool)
        if mask.shape != (g.n,):
            raise GraphError(f"keep mask must have length {g.n}")
    remap = np.full(g.n, -1, dtype=np.int64)
    kept = np.flatnonzero(mask)
    remap[kept] = np.arange(kept.size, dtype=np.int64)
    e = g.edges
    sel = mask[e[:, 0]] & mask[e[:, 1]] if e.size else np.zeros(0, dtype=bool)
    return build_graph(kept.size, remap[e[sel]]), remap
