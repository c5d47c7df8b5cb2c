import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from usermatch.generators import (
    BipartiteAffiliation,
    ParameterError,
    affiliation_to_graph,
    gen_affiliation,
    gen_er,
    gen_pa,
    gen_rmat,
)

# Independent pure-Python urn (random.Random, 200 seeds) for the top-1%
# interest share at users=5000, interests=500, 4 per user.
URN_SHARE_MEAN = 0.05398
URN_SHARE_SD = 0.00562
URN_SHARE_MIN = 0.04280


def test_er_extremes():
    assert gen_er(10, 0.0, 1).num_edges == 0
    g = gen_er(4, 1.0, 1)
    assert g.num_edges == 6
    assert sorted(map(tuple, g.edges.tolist())) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_er_edge_count_binomial():
    n, p = 2000, 0.01
    pairs = n * (n - 1) // 2
    mean, sd = pairs * p, math.sqrt(pairs * p * (1 - p))
    assert mean == pytest.approx(19990)
    for seed in range(3):
        assert abs(gen_er(n, p, seed).num_edges - mean) < 4 * sd


def test_er_simple():
    g = gen_er(300, 0.1, 9)
    e = g.edges
    assert (e[:, 0] != e[:, 1]).all()
    keys = np.minimum(e[:, 0], e[:, 1]) * 300 + np.maximum(e[:, 0], e[:, 1])
    assert np.unique(keys).size == keys.size


def test_er_pair_frequency_uniform():
    # every pair is equally likely: count hits per pair over many seeds
    n, p, reps = 8, 0.3, 400
    hits = np.zeros((n, n))
    for s in range(reps):
        for a, b in gen_er(n, p, s).edges.tolist():
            hits[min(a, b), max(a, b)] += 1
    iu = np.triu_indices(n, 1)
    freq = hits[iu] / reps
    assert np.all(np.abs(freq - p) < 4 * math.sqrt(p * (1 - p) / reps))


def test_er_bad_p():
    with pytest.raises(ParameterError):
        gen_er(10, 1.5, 0)
    with pytest.raises(ParameterError):
        gen_er(10, -0.1, 0)


def test_pa_single_vertex():
    g = gen_pa(1, 3, 0)
    assert g.n == 1 and g.num_edges == 3
    assert g.degree.tolist() == [6]


@given(st.integers(1, 200), st.integers(1, 6), st.integers(0, 2**64 - 1))
def test_pa_counts(n, m, seed):
    g = gen_pa(n, m, seed)
    assert g.num_edges == n * m
    assert int(g.degree.sum()) == 2 * m * n


def test_pa_each_node_adds_m_edges():
    g = gen_pa(500, 5, 3)
    # edge e belongs to node e // m and its far endpoint is never younger
    e = g.edges
    assert (e[:, 0] == np.arange(e.shape[0]) // 5).all()
    assert (e[:, 1] <= e[:, 0]).all()


def test_pa_first_step_probabilities():
    # second node's first edge: M = 2m (node 0 holds m loops), so the
    # self-probability is 1 / (2m + 1)
    m, reps = 2, 4000
    selfs = sum(int(gen_pa(2, m, s).edges[m, 1] == 1) for s in range(reps))
    p = 1 / (2 * m + 1)
    assert abs(selfs / reps - p) < 4 * math.sqrt(p * (1 - p) / reps)


def test_pa_power_law_exponent():
    g = gen_pa(10_000, 4, 11)
    d = g.degree[g.degree >= 16].astype(float)
    # discrete MLE approximation with xmin = 16
    alpha = 1 + d.size / np.log(d / 15.5).sum()
    assert 2.5 <= alpha <= 3.5


def test_rmat_sizes():
    g = gen_rmat(0, 5, seed=1)
    assert g.n == 1 and g.num_edges == 5 and g.degree[0] == 10
    g = gen_rmat(10, 8, seed=1)
    assert g.n == 1024 and g.num_edges == 8192


def test_rmat_uniform_endpoints():
    g = gen_rmat(10, 16, 0.25, 0.25, 0.25, 0.25, seed=4)
    counts = np.bincount(g.edges.ravel(), minlength=1024)
    assert stats.chisquare(counts).pvalue > 0.001


def test_rmat_skewed_by_default():
    g = gen_rmat(10, 16, seed=4)
    # quadrant a=0.57 per level: node 0 is the heaviest by far
    assert g.degree.argmax() == 0


def test_rmat_bad_params():
    with pytest.raises(ParameterError):
        gen_rmat(4, 2, 0.5, 0.2, 0.2, 0.2)
    with pytest.raises(ParameterError):
        gen_rmat(33, 1)


def test_affiliation_counts():
    b = gen_affiliation(1, 10, 4, 0)
    assert b.memberships.shape == (4, 2)
    b = gen_affiliation(300, 50, 3, 1)
    assert b.memberships.shape == (900, 2)
    for u in range(300):
        picks = b.memberships[b.memberships[:, 0] == u, 1]
        assert np.unique(picks).size == 3


def test_affiliation_too_many_memberships():
    with pytest.raises(ParameterError):
        gen_affiliation(10, 3, 4, 0)


def test_affiliation_skew():
    shares = []
    for seed in range(10):
        b = gen_affiliation(5000, 500, 4, seed)
        c = np.sort(np.bincount(b.memberships[:, 1], minlength=500))[::-1]
        shares.append(c[:5].sum() / c.sum())
    print(f"top-1% share: min={min(shares):.4f} mean={np.mean(shares):.4f}")
    assert abs(np.mean(shares) - URN_SHARE_MEAN) < 4 * URN_SHARE_SD / math.sqrt(10)
    assert min(shares) > URN_SHARE_MIN - URN_SHARE_SD
    # far above the ~1.3% a uniform draw would give
    assert min(shares) > 0.03


def test_affiliation_to_graph_examples():
    b = BipartiteAffiliation(2, 1, np.array([[0, 0], [1, 0]]))
    assert affiliation_to_graph(b).num_edges == 1
    b = BipartiteAffiliation(2, 2, np.array([[0, 0], [1, 1]]))
    assert affiliation_to_graph(b).num_edges == 0
    b = BipartiteAffiliation(5, 1, np.array([[u, 0] for u in range(5)]))
    g = affiliation_to_graph(b)
    assert g.num_edges == 10 and g.degree.tolist() == [4] * 5


def test_affiliation_graph_dedup():
    # users 0, 1 share two interests: still one edge
    b = BipartiteAffiliation(2, 2, np.array([[0, 0], [1, 0], [0, 1], [1, 1]]))
    assert affiliation_to_graph(b).num_edges == 1


def test_membership_validation():
    with pytest.raises(ValueError):
        BipartiteAffiliation(2, 2, np.array([[0, 2]]))


@pytest.mark.parametrize("make", [
    lambda s: gen_er(200, 0.05, s),
    lambda s: gen_pa(300, 3, s),
    lambda s: gen_rmat(8, 4, seed=s),
    lambda s: affiliation_to_graph(gen_affiliation(200, 40, 3, s)),
])
def test_generators_deterministic(make):
    assert make(77).to_bytes() == make(77).to_bytes()
    assert make(77).to_bytes() != make(78).to_bytes()
