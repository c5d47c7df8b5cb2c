"""Synthetic underlying networks: Erdos-Renyi, preferential attachment, RMAT,
and a preferential user/interest affiliation model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import Graph, build_graph
from .rng import Rng, bounded, random_float

RMAT_DEFAULTS = (0.57, 0.19, 0.19, 0.05)


class ParameterError(ValueError):
    pass


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class BipartiteAffiliation:
    """Users, interests, and the (user, interest) membership array."""

    users: int
    interests: int
    memberships: np.ndarray

    def __post_init__(self):
        m = self.memberships
        if m.size and (
            m[:, 0].min() < 0 or m[:, 0].max() >= self.users
            or m[:, 1].min() < 0 or m[:, 1].max() >= self.interests
        ):
            raise ParameterError("membership references an unknown user or interest")


@njit(cache=True, nogil=True)
def _grow(buf, size):
    out = np.empty((max(2 * buf.shape[0], 16), 2), dtype=np.int64)
    out[:size] = buf[:size]
    return out


@njit(cache=True, nogil=True)
def _er_kernel(state, n, p, capacity):
    # Geometric skipping over the lexicographic list of pairs (w < v).
    out = np.empty((capacity, 2), dtype=np.int64)
    size = 0
    lp = math.log(1.0 - p)
    v = 1
    w = -1
    while v < n:
        r = random_float(state)
        w = w + 1 + int(math.floor(math.log(1.0 - r) / lp))
        while w >= v and v < n:
            w -= v
            v += 1
        if v < n:
            if size == out.shape[0]:
                out = _grow(out, size)
            out[size, 0] = w
            out[size, 1] = v
            size += 1
    return out[:size]


def gen_er(n: int, p: float, seed: int) -> Graph:
    """G(n, p): every unordered pair of distinct nodes present with probability ``p``."""
    _check_prob("p", p)
    if n < 0:
        raise ParameterError("n must be non-negative")
    total = n * (n - 1) // 2
    if p == 0.0 or n < 2:
        return build_graph(n, np.zeros((0, 2), np.int64))
    if p == 1.0:
        iu = np.triu_indices(n, 1)
        return build_graph(n, np.column_stack(iu))
    mean = total * p
    cap = int(mean + 10 * math.sqrt(mean * (1 - p)) + 16)
    edges = _er_kernel(Rng(seed).state, n, p, cap)
    return build_graph(n, edges)


@njit(cache=True, nogil=True)
def _pa_kernel(state, n, m):
    edges = np.empty((n * m, 2), dtype=np.int64)
    # One entry per edge endpoint; a node appears deg(node) times.
    ends = np.empty(2 * n * m, dtype=np.int64)
    e = 0
    for _ in range(m):
        edges[e, 0] = 0
        edges[e, 1] = 0
        ends[2 * e] = 0
        ends[2 * e + 1] = 0
        e += 1
    for u in range(1, n):
        for _ in range(m):
            total = 2 * e  # M_i: sum of degrees before this edge
            r = bounded(state, total + 1)
            # Slot `total` is the +1 reserved for u; u's earlier endpoints
            # are already in `ends`, giving it weight d(u) + 1 overall.
            v = u if r == total else ends[r]
            edges[e, 0] = u
            edges[e, 1] = v
            ends[2 * e] = u
            ends[2 * e + 1] = v
            e += 1
    return edges


def gen_pa(n: int, m: int, seed: int) -> Graph:
    """Preferential attachment graph with ``n`` nodes and ``n*m`` edges.

    Node 0 starts with ``m`` self-loops. Each later node ``u`` inserts ``m``
    edges one at a time; the far endpoint is drawn with probability
    ``deg(v) / (M + 1)`` for existing nodes and ``(deg(u) + 1) / (M + 1)``
    for ``u`` itself, where ``M`` is the degree sum just before the edge
    and degrees are updated between the ``m`` draws.
    """
    if n < 1 or m < 1:
        raise ParameterError(f"gen_pa needs n >= 1 and m >= 1, got n={n}, m={m}")
    return build_graph(n, _pa_kernel(Rng(seed).state, n, m))


@njit(cache=True, nogil=True)
def _rmat_kernel(state, scale, count, a, ab, abc):
    edges = np.empty((count, 2), dtype=np.int64)
    for e in range(count):
        u = 0
        v = 0
        for level in range(scale):
            bit = np.int64(1) << (scale - 1 - level)
            r = random_float(state)
            if r < a:
                pass
            elif r < ab:
                v |= bit
            elif r < abc:
                u |= bit
            else:
                u |= bit
                v |= bit
        edges[e, 0] = u
        edges[e, 1] = v
    return edges


def gen_rmat(
    scale: int,
    edge_factor: int,
    a: float = RMAT_DEFAULTS[0],
    b: float = RMAT_DEFAULTS[1],
    c: float = RMAT_DEFAULTS[2],
    d: float = RMAT_DEFAULTS[3],
    seed: int = 0,
) -> Graph:
    """RMAT graph on ``2**scale`` nodes with ``edge_factor * 2**scale`` edge samples.

    Each edge descends ``scale`` levels of the adjacency matrix, picking a
    quadrant with probabilities ``a, b, c, d`` (top-left, top-right,
    bottom-left, bottom-right). Duplicates and self-loops are kept.
    """
    for name, p in zip("abcd", (a, b, c, d)):
        _check_prob(name, p)
    if abs(a + b + c + d - 1.0) > 1e-9:
        raise ParameterError(f"quadrant probabilities sum to {a + b + c + d}, expected 1")
    if not 0 <= scale <= 32:
        raise ParameterError(f"scale must be in [0, 32], got {scale}")
    if edge_factor < 0:
        raise ParameterError("edge_factor must be non-negative")
    n = 1 << scale
    edges = _rmat_kernel(Rng(seed).state, scale, edge_factor * n, a, a + b, a + b + c)
    return build_graph(n, edges)


@njit(cache=True, nogil=True)
def _affiliation_kernel(state, users, interests, per_user):
    out = np.empty((users * per_user, 2), dtype=np.int64)
    chosen = np.empty(per_user, dtype=np.int64)
    total = 0
    for user in range(users):
        for k in range(per_user):
            while True:
                # weight of interest i is 1 + members(i); the urn holds one
                # entry per existing membership
                r = bounded(state, interests + total)
                pick = r if r < interests else out[r - interests, 1]
                dup = False
                for t in range(k):
                    if chosen[t] == pick:
                        dup = True
                        break
                if not dup:
                    break
            chosen[k] = pick
            out[total, 0] = user
            out[total, 1] = pick
            total += 1
    return out


def gen_affiliation(users: int, interests: int, memberships_per_user: int, seed: int) -> BipartiteAffiliation:
    """Users arrive one by one and join distinct interests preferentially.

    An interest with ``c`` members is chosen with weight ``1 + c``; counts
    update after every membership.
    """
    if min(users, interests, memberships_per_user) < 1:
        raise ParameterError("users, interests and memberships_per_user must all be >= 1")
    if memberships_per_user > interests:
        raise ParameterError(
            f"memberships_per_user ({memberships_per_user}) exceeds interests ({interests})"
        )
    m = _affiliation_kernel(Rng(seed).state, users, interests, memberships_per_user)
    return BipartiteAffiliation(users, interests, m)


@njit(cache=True, nogil=True)
def _clique_pairs(members, starts):
    total = 0
    for g in range(starts.shape[0] - 1):
        k = starts[g + 1] - starts[g]
        total += k * (k - 1) // 2
    out = np.empty((total, 2), dtype=np.int64)
    e = 0
    for g in range(starts.shape[0] - 1):
        lo = starts[g]
        hi = starts[g + 1]
        for i in range(lo, hi):
            for j in range(i + 1, hi):
                out[e, 0] = members[i]
                out[e, 1] = members[j]
                e += 1
    return out


def affiliation_to_graph(b: BipartiteAffiliation, interest_mask: np.ndarray | None = None) -> Graph:
    """Simple graph on users; ``u ~ v`` iff they share a (surviving) interest."""
    m = b.memberships
    if interest_mask is not None:
        m = m[interest_mask[m[:, 1]]]
    if m.size == 0:
        return build_graph(b.users, np.zeros((0, 2), np.int64))
    order = np.lexsort((m[:, 0], m[:, 1]))
    members = np.ascontiguousarray(m[order, 0])
    counts = np.bincount(m[:, 1], minlength=b.interests)
    starts = np.zeros(b.interests + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    pairs = _clique_pairs(members, starts)
    if pairs.size == 0:
        return build_graph(b.users, pairs)
    keys = np.unique(pairs[:, 0] * np.int64(b.users) + pairs[:, 1])
    return build_graph(b.users, np.column_stack([keys // b.users, keys % b.users]))
