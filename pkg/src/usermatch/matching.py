"""User-Matching: seed expansion by similarity witnesses with degree buckets.

A *similarity witness* for a candidate pair ``(u, v)`` is a linked pair
``(a, b)`` with ``a`` adjacent to ``u`` in the first graph and ``b``
adjacent to ``v`` in the second. Each pass scores candidate pairs by their
witness count and links pairs that are the strict best for both endpoints.
Neighbor multisets are treated as sets, so a linked pair counts at most once.

Two routes compute the same thing:

* :func:`count_witnesses` + :func:`select_matches` materialise the full
  score table (used for inspection and as a cross-check);
* :func:`run_matching` streams each pass through a per-row / per-column
  best-score kernel that keeps only O(n) state.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graph import Graph
from .links import LinkError, LinkSet

_CHUNK_PAIRS = 4_000_000


@dataclass(frozen=True)
class MatchConfig:
    """``T``: minimum score; ``k``: outer iterations; ``D``: degree cap (0 = auto)."""

    T: int = 2
    k: int = 1
    D: int = 0
    strict: bool = False

    def __post_init__(self):
        if self.T < 1 or self.k < 1:
            raise ValueError(f"need T >= 1 and k >= 1, got T={self.T}, k={self.k}")
        if self.D < 0:
            raise ValueError("D must be >= 0")


@dataclass
class ScoreTable:
    """Sparse witness counts, sorted by (left, right); zero entries absent."""

    left: np.ndarray
    right: np.ndarray
    count: np.ndarray

    @classmethod
    def empty(cls):
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy())

    def __len__(self):
        return int(self.count.size)

    def to_dict(self) -> dict[tuple[int, int], int]:
        return dict(zip(zip(self.left.tolist(), self.right.tolist()), self.count.tolist()))

    def restrict(self, g1: Graph, g2: Graph, min_deg: int) -> "ScoreTable":
        keep = (g1.degree[self.left] >= min_deg) & (g2.degree[self.right] >= min_deg)
        return ScoreTable(self.left[keep], self.right[keep], self.count[keep])

    def transpose(self) -> "ScoreTable":
        order = np.lexsort((self.left, self.right))
        return ScoreTable(self.right[order], self.left[order], self.count[order])


@dataclass
class PassStat:
    iteration: int
    min_degree: int
    candidates: int
    additions: int
    seconds: float


@dataclass
class MatchResult:
    links: LinkSet
    passes: list[PassStat] = field(default_factory=list)
    D: int = 0
    threshold_rule: str = ">="
    bucketing: bool = True

    def report_lines(self) -> list[str]:
        lines = [
            f"D={self.D}",
            f"bucketing={'on' if self.bucketing else 'off'}",
            f"threshold_rule=score{self.threshold_rule}T",
            f"passes={len(self.passes)}",
            f"links={len(self.links)}",
        ]
        for i, p in enumerate(self.passes):
            lines.append(
                f"pass{i}.iteration={p.iteration} pass{i}.min_degree={p.min_degree} "
                f"pass{i}.candidates={p.candidates} pass{i}.additions={p.additions} "
                f"pass{i}.seconds={p.seconds:.6f}"
            )
        return lines


def _split(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n)) if n else 1
    bounds = np.linspace(0, n, parts + 1).astype(np.int64)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(parts)]


def _run_parallel(fn, chunks, workers):
    if workers <= 1 or len(chunks) <= 1:
        return [fn(*c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda c: fn(*c), chunks))


@njit(cache=True, nogil=True)
def _filter_csr(indptr, indices, mask):
    n = indptr.shape[0] - 1
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    out_idx = np.empty(indices.shape[0], dtype=np.int64)
    c = 0
    for x in range(n):
        for k in range(indptr[x], indptr[x + 1]):
            y = indices[k]
            if mask[y]:
                out_idx[c] = y
                c += 1
        out_ptr[x + 1] = c
    return out_ptr, out_idx[:c]


# ---------------------------------------------------------------------------
# full score table


@njit(cache=True, nogil=True)
def _cross_keys(la, lb, ptr1, idx1, ptr2, idx2, n2, total):
    keys = np.empty(total, dtype=np.int64)
    c = 0
    for i in range(la.shape[0]):
        a = la[i]
        b = lb[i]
        for k1 in range(ptr1[a], ptr1[a + 1]):
            base = idx1[k1] * n2
            for k2 in range(ptr2[b], ptr2[b + 1]):
                keys[c] = base + idx2[k2]
                c += 1
    return keys


def _aggregate(keys, counts=None):
    if keys.size == 0:
        return keys, np.zeros(0, dtype=np.int64)
    uniq, inv = np.unique(keys, return_inverse=True)
    w = None if counts is None else counts
    return uniq, np.bincount(inv, weights=w, minlength=uniq.size).astype(np.int64)


def _table_for_links(la, lb, ptr1, idx1, ptr2, idx2, n2):
    sizes = (ptr1[la + 1] - ptr1[la]) * (ptr2[lb + 1] - ptr2[lb])
    keys_parts, count_parts = [], []
    start = 0
    csum = np.cumsum(sizes)
    while start < la.size:
        # largest slice of links whose cross products fit one chunk
        base = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, base + _CHUNK_PAIRS, side="right"))
        stop = max(stop, start + 1)
        total = int(csum[stop - 1] - base)
        keys = _cross_keys(la[start:stop], lb[start:stop], ptr1, idx1, ptr2, idx2, n2, total)
        k, c = _aggregate(keys)
        keys_parts.append(k)
        count_parts.append(c)
        start = stop
    if not keys_parts:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    if len(keys_parts) == 1:
        return keys_parts[0], count_parts[0]
    return _aggregate(np.concatenate(keys_parts), np.concatenate(count_parts))


def count_witnesses(
    g1: Graph,
    g2: Graph,
    links: LinkSet,
    min_deg: int = 1,
    *,
    exclude_linked: bool = False,
    workers: int = 1,
) -> ScoreTable:
    """Witness counts for all pairs with both degrees >= ``min_deg``.

    Work is driven by the linked pairs: each ``(a, b)`` contributes one to
    every ``(u, v)`` in ``N1(a) x N2(b)``. With ``exclude_linked`` nodes that
    already carry a link are left out of the candidate pairs. Links are
    split into ``workers`` groups whose partial tables are summed.
    """
    if min_deg < 1:
        raise ValueError("min_deg must be >= 1")
    links.check()
    p1, p2 = links.partner_arrays(g1.n, g2.n)
    if len(links) == 0:
        return ScoreTable.empty()
    cand1 = g1.degree >= min_deg
    cand2 = g2.degree >= min_deg
    if exclude_linked:
        cand1 &= p1 < 0
        cand2 &= p2 < 0
    ptr1, idx1 = _filter_csr(*g1.simple_adjacency(), cand1)
    ptr2, idx2 = _filter_csr(*g2.simple_adjacency(), cand2)
    if g1.n and g2.n and g1.n > (2**62) // max(g2.n, 1):
        raise ValueError("graphs too large for 64-bit pair keys")
    la, lb = links.left, links.right
    parts = _run_parallel(
        lambda lo, hi: _table_for_links(la[lo:hi], lb[lo:hi], ptr1, idx1, ptr2, idx2, g2.n),
        _split(len(links), workers),
        workers,
    )
    keys, counts = _aggregate(
        np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    ) if len(parts) > 1 else parts[0]
    return ScoreTable(keys // g2.n, keys % g2.n, counts)


def brute_force_scores(g1: Graph, g2: Graph, links: LinkSet) -> ScoreTable:
    """Witness counts straight from the definition, over every node pair.

    Quadratic in the node counts times the number of links; meant for
    graphs of at most a few hundred nodes.
    """
    n1 = [set(g1.neighbors(u).tolist()) for u in range(g1.n)]
    n2 = [set(g2.neighbors(v).tolist()) for v in range(g2.n)]
    pairs = list(links)
    rows = []
    for u in range(g1.n):
        for v in range(g2.n):
            c = 0
            for a, b in pairs:
                if a in n1[u] and b in n2[v]:
                    c += 1
            if c:
                rows.append((u, v, c))
    if not rows:
        return ScoreTable.empty()
    arr = np.array(rows, dtype=np.int64)
    return ScoreTable(arr[:, 0], arr[:, 1], arr[:, 2])


def _passes_threshold(scores, T, strict):
    return scores > T if strict else scores >= T


def select_matches(
    scores: ScoreTable,
    T: int,
    already: LinkSet | None = None,
    *,
    strict: bool = False,
    freeze: bool = False,
) -> LinkSet:
    """New links: unlinked pairs that strictly beat every rival in their row and column.

    A tie for the best score in a row or column produces no match there.
    Rivals include entries that touch nodes already linked in ``already``
    (so a node whose best counterpart is taken stays unmatched) unless
    ``freeze`` is set, in which case linked nodes are dropped from the table
    before the comparison.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    left, right, cnt = scores.left, scores.right, scores.count
    free = np.ones(cnt.size, dtype=bool)
    if already is not None and len(already):
        free = ~np.isin(left, already.left) & ~np.isin(right, already.right)
        if freeze:
            left, right, cnt, free = left[free], right[free], cnt[free], free[free]
    if cnt.size == 0:
        return LinkSet()

    def unique_max(keys):
        _, inv = np.unique(keys, return_inverse=True)
        best = np.full(inv.max() + 1, -1, dtype=np.int64)
        np.maximum.at(best, inv, cnt)
        at_max = cnt == best[inv]
        ties = np.bincount(inv[at_max], minlength=best.size)
        return at_max & (ties[inv] == 1)

    chosen = free & unique_max(left) & unique_max(right) & _passes_threshold(cnt, T, strict)
    return LinkSet(left[chosen], right[chosen])


# ---------------------------------------------------------------------------
# streaming pass


@njit(cache=True, nogil=True)
def _row_best(rows, ptr1, idx1, partner1, ptr2, idx2, acc, touched, best, score, unique, nnz):
    for r in range(rows.shape[0]):
        u = rows[r]
        nt = 0
        for k in range(ptr1[u], ptr1[u + 1]):
            b = partner1[idx1[k]]
            for kk in range(ptr2[b], ptr2[b + 1]):
                v = idx2[kk]
                if acc[v] == 0:
                    touched[nt] = v
                    nt += 1
                acc[v] += 1
        bs = 0
        bv = -1
        uniq = False
        for t in range(nt):
            v = touched[t]
            c = acc[v]
            if c > bs:
                bs = c
                bv = v
                uniq = True
            elif c == bs:
                uniq = False
            acc[v] = 0
        best[r] = bv
        score[r] = bs
        unique[r] = uniq
        nnz[r] = nt


def _best_per_row(rows, ptr1, idx1, partner1, ptr2, idx2, n_other, workers):
    """Best counterpart, its score, uniqueness and row size for each row node."""
    m = rows.size
    best = np.empty(m, dtype=np.int64)
    score = np.empty(m, dtype=np.int64)
    unique = np.empty(m, dtype=np.bool_)
    nnz = np.empty(m, dtype=np.int64)

    def work(lo, hi):
        acc = np.zeros(n_other, dtype=np.int64)
        touched = np.empty(n_other, dtype=np.int64)
        _row_best(rows[lo:hi], ptr1, idx1, partner1, ptr2, idx2, acc, touched,
                  best[lo:hi], score[lo:hi], unique[lo:hi], nnz[lo:hi])

    _run_parallel(work, _split(m, workers), workers)
    return best, score, unique, nnz


def _bucket_pass(g1, g2, p1, p2, min_deg, T, strict, freeze, workers):
    """One (iteration, bucket) pass against the links in ``p1``/``p2``.

    Only nodes with at least ``T`` linked neighbors (``T + 1`` under the
    strict rule) are scored: any other node's scores are below the
    threshold, so it can neither be selected nor beat a selectable pair.
    """
    need = T + 1 if strict else T
    s1 = g1.simple_adjacency()
    s2 = g2.simple_adjacency()
    free1 = p1 < 0
    free2 = p2 < 0
    lptr1, lidx1 = _filter_csr(*s1, ~free1)
    lptr2, lidx2 = _filter_csr(*s2, ~free2)
    live1 = (g1.degree >= min_deg) & (np.diff(lptr1) >= need)
    live2 = (g2.degree >= min_deg) & (np.diff(lptr2) >= need)
    far1 = live1 & free1 if freeze else live1
    far2 = live2 & free2 if freeze else live2
    cptr1, cidx1 = _filter_csr(*s1, far1)
    cptr2, cidx2 = _filter_csr(*s2, far2)
    rows1 = np.flatnonzero(live1 & free1)
    b1, sc1, u1, nnz1 = _best_per_row(rows1, lptr1, lidx1, p1, cptr2, cidx2, g2.n, workers)
    ok = u1 & _passes_threshold(sc1, T, strict) & (b1 >= 0)
    # only columns that are some row's unique best can complete a match
    v = np.where(ok, b1, 0)
    ok &= free2[v]
    rows2 = np.unique(b1[ok])
    b2, _, u2, _ = _best_per_row(rows2, lptr2, lidx2, p2, cptr1, cidx1, g1.n, workers)

    col_best = np.full(g2.n, -1, dtype=np.int64)
    col_ok = np.zeros(g2.n, dtype=bool)
    col_best[rows2] = b2
    col_ok[rows2] = u2
    ok &= col_ok[v] & (col_best[v] == rows1)
    return rows1[ok], b1[ok], int(nnz1.sum())


def bucket_thresholds(D: int) -> list[int]:
    """Degree thresholds ``2**j`` for ``j = floor(log2 D) .. 1``."""
    if D < 2:
        return []
    return [1 << j for j in range(int(math.floor(math.log2(D))), 0, -1)]


def run_matching(
    g1: Graph,
    g2: Graph,
    seeds: LinkSet,
    T: int,
    k: int,
    *,
    D: int = 0,
    bucketing: bool = True,
    strict: bool = False,
    freeze: bool = False,
    workers: int = 1,
    on_pass=None,
) -> MatchResult:
    """Iterative expansion of ``seeds``; links, once made, are never revised.

    With ``bucketing`` each of the ``k`` iterations sweeps degree
    thresholds ``2**j`` from ``floor(log2 D)`` down to ``j = 1``; without it
    every iteration is a single pass over all nodes of degree >= 1. Within
    a pass scores are computed against the links present at pass start.
    ``candidates`` in the pass statistics counts the scored pairs on the
    first-graph side after threshold pruning. ``on_pass(stat, links)`` is
    called after every pass with the current link set.
    """
    MatchConfig(T, k, D, strict)
    seeds.check()
    p1, p2 = seeds.partner_arrays(g1.n, g2.n)
    if bucketing:
        D = D or max(g1.max_degree, g2.max_degree)
        thresholds = bucket_thresholds(D)
    else:
        thresholds = [1]
    result = MatchResult(seeds, D=D, threshold_rule=">" if strict else ">=", bucketing=bucketing)
    for it in range(1, k + 1):
        for d in thresholds:
            t0 = time.perf_counter()
            a, b, ncand = _bucket_pass(g1, g2, p1, p2, d, T, strict, freeze, workers)
            if (p1[a] >= 0).any() or (p2[b] >= 0).any():
                raise AssertionError("pass proposed an already-linked node")
            if np.unique(b).size != b.size:
                raise AssertionError("pass produced a non-injective assignment")
            p1[a] = b
            p2[b] = a
            result.passes.append(PassStat(it, d, ncand, int(a.size), time.perf_counter() - t0))
            if on_pass is not None:
                cur = np.flatnonzero(p1 >= 0)
                on_pass(result.passes[-1], LinkSet(cur, p1[cur]))
    linked = np.flatnonzero(p1 >= 0)
    result.links = LinkSet(linked, p1[linked])
    return result


def user_matching(g1: Graph, g2: Graph, seeds: LinkSet, cfg: MatchConfig, workers: int = 1,
                  freeze: bool = False) -> LinkSet:
    return run_matching(
        g1, g2, seeds, cfg.T, cfg.k, D=cfg.D, strict=cfg.strict, freeze=freeze, workers=workers
    ).links


def baseline_match(g1: Graph, g2: Graph, seeds: LinkSet, T: int, k: int, workers: int = 1,
                   freeze: bool = False) -> LinkSet:
    """Same expansion without degree buckets: one degree >= 1 pass per iteration."""
    return run_matching(g1, g2, seeds, T, k, bucketing=False, freeze=freeze, workers=workers).links


def reference_matching(g1, g2, seeds: LinkSet, T: int, k: int, *, D: int = 0,
                       bucketing: bool = True, strict: bool = False,
                       freeze: bool = False) -> LinkSet:
    """Slow path: full score table + :func:`select_matches` for every pass."""
    links = seeds
    if bucketing:
        thresholds = bucket_thresholds(D or max(g1.max_degree, g2.max_degree))
    else:
        thresholds = [1]
    for _ in range(k):
        for d in thresholds:
            table = count_witnesses(g1, g2, links, d, exclude_linked=freeze)
            links = links.union(select_matches(table, T, links, strict=strict, freeze=freeze))
    return links


__all__ = [
    "LinkError",
    "MatchConfig",
    "MatchResult",
    "PassStat",
    "ScoreTable",
    "baseline_match",
    "brute_force_scores",
    "bucket_thresholds",
    "count_witnesses",
    "reference_matching",
    "run_matching",
    "select_matches",
    "user_matching",
]
