"""Scoring a set of output links against ground truth."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass

import numpy as np

from .graph import Graph
from .links import LinkSet

UNDEFINED = "undefined"


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


@dataclass(frozen=True)
class Metrics:
    """Good/bad tallies over non-seed output links and the derived ratios.

    Ratios with a zero denominator are ``None`` (printed as ``undefined``).
    Eligible truth pairs are those whose endpoints have degree >= 1 in both
    copies; ``eligible_gt5`` further requires both degrees > 5.
    """

    output: int
    seeds: int
    seeds_echoed: int
    good: int
    bad: int
    sybil_links: int
    truth_pairs: int
    eligible: int
    eligible_gt5: int
    good_gt5: int
    precision: float | None
    recall_all: float | None
    recall_new: float | None
    recall_gt5: float | None
    eligibility: str = "degree>=1 in both copies"

    def as_dict(self) -> dict:
        return asdict(self)

    def lines(self) -> list[str]:
        out = []
        for key, value in asdict(self).items():
            if value is None:
                value = UNDEFINED
            elif isinstance(value, float):
                value = f"{value:.6f}"
            out.append(f"{key}={value}")
        return out


def _truth_lookup(truth: np.ndarray, n1: int) -> np.ndarray:
    partner = np.full(n1, -1, dtype=np.int64)
    if truth.size:
        partner[truth[:, 0]] = truth[:, 1]
    return partner


def _check_range(links: LinkSet, g1: Graph, g2: Graph, what: str) -> None:
    if len(links) and (links.left.max() >= g1.n or links.right.max() >= g2.n):
        raise ValueError(f"{what} references a node outside the graphs")


def evaluate(
    output: LinkSet,
    truth: np.ndarray,
    seeds: LinkSet,
    g1: Graph,
    g2: Graph,
    sybils: tuple[np.ndarray | None, np.ndarray | None] | None = None,
) -> Metrics:
    """Classify every output link as seed, good or bad.

    A non-seed link is good iff it equals a truth pair; everything else,
    including any link touching a sybil (``sybils`` holds per-copy flag
    arrays), is bad.
    """
    _check_range(output, g1, g2, "output")
    _check_range(seeds, g1, g2, "seeds")
    truth = np.asarray(truth, dtype=np.int64).reshape(-1, 2)
    partner = _truth_lookup(truth, g1.n)

    seed_partner = np.full(g1.n, -1, dtype=np.int64)
    seed_partner[seeds.left] = seeds.right
    is_seed = seed_partner[output.left] == output.right
    left = output.left[~is_seed]
    right = output.right[~is_seed]
    good_mask = partner[left] == right
    good = int(good_mask.sum())
    bad = int(left.size - good)

    sybil_links = 0
    if sybils is not None:
        s1, s2 = sybils
        touch = np.zeros(left.size, dtype=bool)
        if s1 is not None:
            touch |= s1[left]
        if s2 is not None:
            touch |= s2[right]
        sybil_links = int(touch.sum())
        assert not (touch & good_mask).any(), "sybil appears in ground truth"

    if truth.size:
        d1 = g1.degree[truth[:, 0]]
        d2 = g2.degree[truth[:, 1]]
        elig = (d1 >= 1) & (d2 >= 1)
        gt5 = (d1 > 5) & (d2 > 5)
    else:
        elig = gt5 = np.zeros(0, dtype=bool)
    eligible = int(elig.sum())
    eligible_gt5 = int(gt5.sum())
    good_gt5 = 0
    if truth.size:
        # seeds included: this is the share of the cohort correctly linked
        correct = _truth_lookup(output.pairs(), g1.n)[truth[:, 0]] == truth[:, 1]
        good_gt5 = int((correct & gt5).sum())

    seeds_echoed = int(is_seed.sum())
    return Metrics(
        output=len(output),
        seeds=len(seeds),
        seeds_echoed=seeds_echoed,
        good=good,
        bad=bad,
        sybil_links=sybil_links,
        truth_pairs=len(truth),
        eligible=eligible,
        eligible_gt5=eligible_gt5,
        good_gt5=good_gt5,
        precision=_ratio(good, good + bad),
        recall_all=_ratio(good + seeds_echoed, eligible),
        recall_new=_ratio(good, eligible - len(seeds)),
        recall_gt5=_ratio(good_gt5, eligible_gt5),
    )


@dataclass(frozen=True)
class DegreeBucket:
    min_degree: int
    eligible: int
    identified: int
    good: int
    bad: int


def _bucket_of(d: np.ndarray) -> np.ndarray:
    """Largest power of two <= d (0 stays 0)."""
    d = np.asarray(d, dtype=np.int64)
    out = np.zeros_like(d)
    pos = d > 0
    out[pos] = 1 << np.floor(np.log2(d[pos])).astype(np.int64)
    return out


def degree_breakdown(output: LinkSet, truth: np.ndarray, g1: Graph, g2: Graph) -> list[DegreeBucket]:
    """Per power-of-two bucket of ``min(deg1, deg2)``.

    ``eligible``/``identified`` count eligible truth pairs and those whose
    first-copy node carries an output link. ``good``/``bad`` count output
    links (seeds included) bucketed by their own endpoint degrees, so the
    bucket sums equal the global link tallies.
    """
    truth = np.asarray(truth, dtype=np.int64).reshape(-1, 2)
    _check_range(output, g1, g2, "output")
    rows: dict[int, list[int]] = {}

    if truth.size:
        d1 = g1.degree[truth[:, 0]]
        d2 = g2.degree[truth[:, 1]]
        elig = (d1 >= 1) & (d2 >= 1)
        found = np.zeros(g1.n, dtype=bool)
        found[output.left] = True
        buckets = _bucket_of(np.minimum(d1, d2))
        for b, ident in zip(buckets[elig].tolist(), found[truth[elig, 0]].tolist()):
            row = rows.setdefault(b, [0, 0, 0, 0])
            row[0] += 1
            row[1] += int(ident)

    partner = _truth_lookup(truth, g1.n)
    correct = partner[output.left] == output.right
    lb = _bucket_of(np.minimum(g1.degree[output.left], g2.degree[output.right]))
    for b, ok in zip(lb.tolist(), correct.tolist()):
        row = rows.setdefault(b, [0, 0, 0, 0])
        row[2 if ok else 3] += 1
    return [DegreeBucket(b, *rows[b]) for b in sorted(rows)]


BREAKDOWN_COLUMNS = ["bucket_min_degree", "eligible", "identified", "good", "bad"]


def write_breakdown_csv(path, buckets: list[DegreeBucket]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BREAKDOWN_COLUMNS)
        for b in buckets:
            w.writerow([b.min_degree, b.eligible, b.identified, b.good, b.bad])
