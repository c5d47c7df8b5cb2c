"""Observed copies of an underlying graph, ground truth, seed links, sybils."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .generators import BipartiteAffiliation, ParameterError, affiliation_to_graph
from .graph import Graph, build_graph, induced_subgraph
from .links import LinkSet
from .rng import Rng, random_float


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")


@dataclass
class CopyPair:
    """Two observed copies plus the latent identity map between them.

    ``truth`` is a ``(k, 2)`` array of ``(g1 id, g2 id)``. ``sybils1`` and
    ``sybils2`` flag injected nodes per copy (``None`` when there are none).
    """

    g1: Graph
    g2: Graph
    truth: np.ndarray
    meta: dict = field(default_factory=dict)
    sybils1: np.ndarray | None = None
    sybils2: np.ndarray | None = None

    def __post_init__(self):
        t = self.truth
        if t.size:
            assert t[:, 0].min() >= 0 and t[:, 0].max() < self.g1.n
            assert t[:, 1].min() >= 0 and t[:, 1].max() < self.g2.n
            assert np.unique(t[:, 0]).size == len(t) and np.unique(t[:, 1]).size == len(t)
        if self.sybils1 is not None and t.size:
            assert not self.sybils1[t[:, 0]].any(), "sybil in ground truth"
        if self.sybils2 is not None and t.size:
            assert not self.sybils2[t[:, 1]].any(), "sybil in ground truth"


@njit(cache=True, nogil=True)
def _coins(state, count, p):
    out = np.empty(count, dtype=np.bool_)
    for i in range(count):
        out[i] = random_float(state) < p
    return out


def copy_independent(g: Graph, s1: float, s2: float, permute: bool, seed: int) -> CopyPair:
    """Keep each edge in copy 1 w.p. ``s1`` and, independently, in copy 2 w.p. ``s2``.

    Draw order: all copy-1 coins (edge order), all copy-2 coins, then the
    copy-2 relabelling when ``permute`` is set. Every node stays in both
    copies, isolated or not.
    """
    _check_prob("s1", s1)
    _check_prob("s2", s2)
    rng = Rng(seed)
    keep1 = _coins(rng.state, g.num_edges, s1)
    keep2 = _coins(rng.state, g.num_edges, s2)
    e1 = g.edges[keep1]
    e2 = g.edges[keep2]
    ids = np.arange(g.n, dtype=np.int64)
    if permute:
        perm = rng.permutation(g.n)
        e2 = perm[e2]
    else:
        perm = ids
    meta = {"model": "independent", "s1": s1, "s2": s2, "permute": bool(permute), "seed": seed}
    return CopyPair(build_graph(g.n, e1), build_graph(g.n, e2), np.column_stack([ids, perm]), meta)


@njit(cache=True, nogil=True)
def _cascade_kernel(state, indptr, indices, n, start, p):
    active = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    active[start] = True
    queue[0] = start
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        for k in range(indptr[x], indptr[x + 1]):
            y = indices[k]
            if not active[y] and random_float(state) < p:
                active[y] = True
                queue[tail] = y
                tail += 1
    return active


def copy_cascade(g: Graph, p: float, start: int, seed: int) -> tuple[Graph, np.ndarray]:
    """Independent-cascade copy started from ``start``.

    Nodes are activated in breadth order; each newly active node gives every
    still-inactive neighbor one activation chance ``p`` (so a node can be
    tried again by later activations). Returns the induced subgraph on the
    active nodes and the sorted original ids of those nodes (new id ``i``
    is original node ``active[i]``).
    """
    _check_prob("p", p)
    if not 0 <= start < g.n:
        raise ParameterError(f"start node {start} out of range")
    sptr, sidx = g.simple_adjacency()
    mask = _cascade_kernel(Rng(seed).state, sptr, sidx, g.n, start, p)
    sub, _ = induced_subgraph(g, mask)
    return sub, np.flatnonzero(mask)


def _pair_from_subsets(g1, act1, g2, act2, meta) -> CopyPair:
    common, i1, i2 = np.intersect1d(act1, act2, assume_unique=True, return_indices=True)
    return CopyPair(g1, g2, np.column_stack([i1, i2]).astype(np.int64), meta)


def cascade_pair(
    g: Graph,
    p: float,
    seed: int,
    start1: int | None = None,
    start2: int | None = None,
    min_active: int = 0,
    max_attempts: int = 1000,
) -> CopyPair:
    """Two cascade copies with independent uniformly random start nodes.

    A copy whose activated set is smaller than ``min_active`` is discarded
    and redrawn from a fresh start (only when its start was not fixed).
    """
    rng = Rng(seed)
    copies = []
    starts = []
    for fixed in (start1, start2):
        for attempt in range(max_attempts):
            start = fixed if fixed is not None else rng.bounded(g.n)
            sub, act = copy_cascade(g, p, start, rng.next_u64())
            if act.size >= min_active or fixed is not None:
                break
        else:
            raise RuntimeError(f"no cascade reached {min_active} nodes in {max_attempts} attempts")
        copies.append((sub, act))
        starts.append(int(start))
    meta = {"model": "cascade", "p": p, "starts": starts, "min_active": min_active, "seed": seed}
    return _pair_from_subsets(copies[0][0], copies[0][1], copies[1][0], copies[1][1], meta)


def copy_affiliation_correlated(b: BipartiteAffiliation, q: float, seed: int) -> Graph:
    """Drop each interest w.p. ``q``; connect users sharing a surviving interest."""
    _check_prob("q", q)
    survive = ~_coins(Rng(seed).state, b.interests, q)
    return affiliation_to_graph(b, survive)


def affiliation_pair(b: BipartiteAffiliation, q: float, seed: int, permute: bool = False) -> CopyPair:
    rng = Rng(seed)
    seed1, seed2 = rng.next_u64(), rng.next_u64()
    g1 = copy_affiliation_correlated(b, q, seed1)
    g2 = copy_affiliation_correlated(b, q, seed2)
    ids = np.arange(b.users, dtype=np.int64)
    perm = ids
    if permute:
        perm = rng.permutation(b.users)
        g2 = build_graph(g2.n, perm[g2.edges])
    meta = {"model": "affiliation", "q": q, "permute": bool(permute), "seed": seed}
    return CopyPair(g1, g2, np.column_stack([ids, perm]), meta)


@njit(cache=True, nogil=True)
def _sybil_kernel(state, indptr, indices, n, prob):
    count = 0
    out = np.empty((indices.shape[0], 2), dtype=np.int64)
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            if random_float(state) < prob:
                out[count, 0] = indices[k]
                out[count, 1] = n + v
                count += 1
    return out[:count]


def inject_sybils(g: Graph, attach_prob: float, seed: int) -> tuple[Graph, np.ndarray]:
    """Add a sybil ``n + v`` for every node ``v``, wired to each ``u`` in N(v) w.p. ``attach_prob``.

    Returns the enlarged graph (``2n`` nodes, original edges first) and the
    boolean sybil flags.
    """
    _check_prob("attach_prob", attach_prob)
    sptr, sidx = g.simple_adjacency()
    extra = _sybil_kernel(Rng(seed).state, sptr, sidx, g.n, attach_prob)
    flags = np.zeros(2 * g.n, dtype=bool)
    flags[g.n:] = True
    return build_graph(2 * g.n, np.concatenate([g.edges, extra])), flags


def add_sybils(cp: CopyPair, attach_prob: float, seed: int) -> CopyPair:
    """Inject sybils independently into both copies of ``cp``."""
    rng = Rng(seed)
    g1, f1 = inject_sybils(cp.g1, attach_prob, rng.next_u64())
    g2, f2 = inject_sybils(cp.g2, attach_prob, rng.next_u64())
    meta = dict(cp.meta, sybil_attach_prob=attach_prob, sybil_seed=seed)
    return CopyPair(g1, g2, cp.truth, meta, f1, f2)


def eligible_mask(cp: CopyPair) -> np.ndarray:
    """Truth pairs whose endpoints have degree >= 1 in both copies."""
    t = cp.truth
    if t.size == 0:
        return np.zeros(0, dtype=bool)
    return (cp.g1.degree[t[:, 0]] >= 1) & (cp.g2.degree[t[:, 1]] >= 1)


def sample_seeds(cp: CopyPair, l: float, seed: int) -> LinkSet:
    """Link each eligible truth pair independently w.p. ``l`` (one coin per eligible pair, truth order)."""
    _check_prob("l", l)
    t = cp.truth[eligible_mask(cp)] if cp.truth.size else cp.truth.reshape(0, 2)
    chosen = _coins(Rng(seed).state, len(t), l)
    return LinkSet.from_pairs(t[chosen])
