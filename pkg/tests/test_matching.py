import numpy as np
import pytest
from hypothesis import given, strategies as st

from usermatch.generators import gen_er, gen_pa
from usermatch.graph import build_graph
from usermatch.links import LinkError, LinkSet
from usermatch.matching import (
    MatchConfig,
    ScoreTable,
    baseline_match,
    brute_force_scores,
    bucket_thresholds,
    count_witnesses,
    reference_matching,
    run_matching,
    select_matches,
    user_matching,
)
from usermatch.perturb import copy_independent, sample_seeds

from conftest import random_links, small_graphs


def _table(d):
    if not d:
        return ScoreTable.empty()
    items = sorted(d.items())
    arr = np.array([(u, v, c) for (u, v), c in items], dtype=np.int64)
    return ScoreTable(arr[:, 0], arr[:, 1], arr[:, 2])


# -- witness counting --------------------------------------------------------


def test_no_links_no_scores(star):
    assert len(count_witnesses(star, star, LinkSet())) == 0
    assert len(brute_force_scores(star, star, LinkSet())) == 0


def test_star_scores(star):
    links = LinkSet([1, 2], [1, 2])
    assert count_witnesses(star, star, links, 1).to_dict() == {(0, 0): 2}
    assert count_witnesses(star, star, links, 2).to_dict() == {(0, 0): 2}
    assert brute_force_scores(star, star, links).to_dict() == {(0, 0): 2}


def test_min_degree_filter():
    # leaf-to-leaf scores appear only while degree-1 nodes are allowed
    g = build_graph(3, [(0, 1), (1, 2)])
    links = LinkSet([1], [1])
    assert count_witnesses(g, g, links, 1).to_dict() == {(0, 0): 1, (0, 2): 1, (2, 0): 1, (2, 2): 1}
    assert count_witnesses(g, g, links, 2).to_dict() == {}


def test_parallel_edges_count_once():
    g = build_graph(3, [(0, 1), (0, 1), (0, 2)])
    links = LinkSet([1], [1])
    assert count_witnesses(g, g, links).to_dict()[(0, 0)] == 1


def test_non_injective_links_rejected(star):
    bad = LinkSet([1, 2], [1, 1], check=False)
    with pytest.raises(LinkError):
        count_witnesses(star, star, bad)
    with pytest.raises(LinkError):
        run_matching(star, star, bad, 1, 1)


@given(small_graphs(max_n=25), small_graphs(max_n=25), st.integers(0, 2**32), st.sampled_from([1, 2, 4]))
def test_oracle_equivalence(g1, g2, seed, d):
    rng = np.random.default_rng(seed)
    links = random_links(rng, g1.n, g2.n, int(rng.integers(0, 12)))
    fast = count_witnesses(g1, g2, links, d).to_dict()
    slow = brute_force_scores(g1, g2, links).restrict(g1, g2, d).to_dict()
    assert fast == slow


@given(small_graphs(max_n=25), small_graphs(max_n=25), st.integers(0, 2**32))
def test_transpose_symmetry(g1, g2, seed):
    rng = np.random.default_rng(seed)
    links = random_links(rng, g1.n, g2.n, 8)
    a = count_witnesses(g1, g2, links).transpose()
    b = count_witnesses(g2, g1, links.transpose())
    assert np.array_equal(a.left, b.left) and np.array_equal(a.right, b.right)
    assert np.array_equal(a.count, b.count)


@given(small_graphs(max_n=25), small_graphs(max_n=25), st.integers(0, 2**32))
def test_witness_workers_identical(g1, g2, seed):
    rng = np.random.default_rng(seed)
    links = random_links(rng, g1.n, g2.n, 10)
    ref = count_witnesses(g1, g2, links)
    for w in (4, 8):
        t = count_witnesses(g1, g2, links, workers=w)
        assert t.to_dict() == ref.to_dict()
        assert np.array_equal(t.left, ref.left)


def test_every_entry_at_least_one():
    g = gen_er(60, 0.2, 1)
    links = random_links(np.random.default_rng(0), 60, 60, 20)
    t = count_witnesses(g, g, links, 4)
    assert (t.count >= 1).all()
    assert (g.degree[t.left] >= 4).all() and (g.degree[t.right] >= 4).all()


# -- selection ---------------------------------------------------------------


def test_select_single():
    assert select_matches(_table({(0, 0): 5}), 3).to_set() == {(0, 0)}


def test_select_tie_blocks():
    assert len(select_matches(_table({(0, 0): 5, (0, 1): 5}), 3)) == 0


def test_select_row_tie_inside_pass():
    # a=0, b=1, x=0, y=1: b ties between x and y, so only (a, x) is chosen
    t = _table({(0, 0): 5, (1, 0): 4, (1, 1): 4})
    assert select_matches(t, 3).to_set() == {(0, 0)}


def test_select_threshold_rule():
    t = _table({(0, 0): 3})
    assert select_matches(t, 3).to_set() == {(0, 0)}
    assert len(select_matches(t, 3, strict=True)) == 0
    assert len(select_matches(t, 4)) == 0


def test_select_skips_linked():
    t = _table({(0, 0): 5, (1, 1): 4})
    already = LinkSet([0], [0])
    assert select_matches(t, 1, already).to_set() == {(1, 1)}


def test_select_taken_rival_blocks_unless_frozen():
    # node 1's best is column 0, which is taken
    t = _table({(0, 0): 9, (1, 0): 5, (1, 1): 3})
    already = LinkSet([0], [0])
    assert len(select_matches(t, 1, already)) == 0
    assert select_matches(t, 1, already, freeze=True).to_set() == {(1, 1)}


@given(st.dictionaries(st.tuples(st.integers(0, 8), st.integers(0, 8)), st.integers(1, 6), max_size=40),
       st.integers(1, 6))
def test_select_is_injective_mutual_max(d, T):
    t = _table(d)
    out = select_matches(t, T)
    out.check()
    for u, v in out:
        s = d[(u, v)]
        assert s >= T
        assert all(c < s for (a, b), c in d.items() if (a == u) != (b == v) and (a == u or b == v))


# -- full algorithm ----------------------------------------------------------


def test_empty_seeds(path3):
    assert len(user_matching(path3, path3, LinkSet(), MatchConfig(1, 2))) == 0
    assert len(baseline_match(path3, path3, LinkSet(), 1, 2)) == 0


def test_path_bucketed(path3):
    out = user_matching(path3, path3, LinkSet([0], [0]), MatchConfig(T=1, k=1))
    assert out.to_set() == {(0, 0), (1, 1)}


def test_star_bucketed(star):
    out = user_matching(star, star, LinkSet([1, 2], [1, 2]), MatchConfig(T=1, k=1))
    assert out.to_set() == {(1, 1), (2, 2), (0, 0)}


def test_path_baseline(path3):
    seeds = LinkSet([0], [0])
    # with linked nodes frozen out of the maxima, c=2 is reachable
    assert baseline_match(path3, path3, seeds, 1, 2, freeze=True).to_set() == {(0, 0), (1, 1), (2, 2)}
    # by default the linked node a stays a rival of c (both have witness b)
    assert baseline_match(path3, path3, seeds, 1, 2).to_set() == {(0, 0), (1, 1)}


def test_star_baseline(star):
    seeds = LinkSet([1, 2], [1, 2])
    assert baseline_match(star, star, seeds, 1, 1).to_set() == {(1, 1), (2, 2), (0, 0)}
    for freeze in (False, True):
        out = baseline_match(star, star, seeds, 1, 2, freeze=freeze)
        assert out.to_set() == {(1, 1), (2, 2), (0, 0)}


def test_bucket_thresholds():
    assert bucket_thresholds(1) == []
    assert bucket_thresholds(2) == [2]
    assert bucket_thresholds(9) == [8, 4, 2]
    assert bucket_thresholds(16) == [16, 8, 4, 2]


def test_auto_d_and_report(star):
    res = run_matching(star, star, LinkSet([1, 2], [1, 2]), 1, 2)
    assert res.D == 4
    assert [p.min_degree for p in res.passes] == [4, 2, 4, 2]
    lines = res.report_lines()
    assert "threshold_rule=score>=T" in lines and "links=3" in lines
    res = run_matching(star, star, LinkSet([1, 2], [1, 2]), 1, 1, D=2, strict=True)
    assert res.D == 2 and [p.min_degree for p in res.passes] == [2]
    assert res.threshold_rule == ">"


def test_config_validation():
    with pytest.raises(ValueError):
        MatchConfig(T=0)
    with pytest.raises(ValueError):
        MatchConfig(k=0)


def _instance(seed, kind):
    rng = np.random.default_rng(seed)
    g = gen_er(50, 0.2, seed) if kind == "er" else gen_pa(100, 3, seed)
    cp = copy_independent(g, 0.8, 0.8, True, seed + 1)
    seeds = sample_seeds(cp, float(rng.uniform(0.05, 0.4)), seed + 2)
    return cp, seeds


@pytest.mark.parametrize("kind", ["er", "pa"])
@pytest.mark.parametrize("bucketing", [True, False])
@pytest.mark.parametrize("strict", [False, True])
@pytest.mark.parametrize("freeze", [False, True])
def test_streaming_matches_reference(kind, bucketing, strict, freeze):
    for seed in range(8):
        cp, seeds = _instance(seed, kind)
        for T in (1, 2):
            fast = run_matching(cp.g1, cp.g2, seeds, T, 2, bucketing=bucketing, strict=strict, freeze=freeze)
            slow = reference_matching(cp.g1, cp.g2, seeds, T, 2, bucketing=bucketing, strict=strict, freeze=freeze)
            assert fast.links == slow


@given(st.integers(0, 2**32), st.integers(1, 3), st.booleans())
def test_injective_and_monotone_every_pass(seed, T, freeze):
    cp, seeds = _instance(seed % 1000, "pa")
    history = [seeds.to_set()]

    def check(stat, links):
        links.check()
        cur = links.to_set()
        assert history[-1] <= cur
        assert len(cur) - len(history[-1]) == stat.additions
        history.append(cur)

    res = run_matching(cp.g1, cp.g2, seeds, T, 2, freeze=freeze, on_pass=check)
    assert seeds.to_set() <= res.links.to_set() == history[-1]


@given(st.integers(0, 2**32))
def test_workers_bit_identical(seed):
    cp, seeds = _instance(seed % 1000, "pa")
    ref = run_matching(cp.g1, cp.g2, seeds, 1, 2)
    for w in (4, 8):
        out = run_matching(cp.g1, cp.g2, seeds, 1, 2, workers=w)
        assert np.array_equal(out.links.pairs(), ref.links.pairs())
        assert [p.additions for p in out.passes] == [p.additions for p in ref.passes]
        assert [p.candidates for p in out.passes] == [p.candidates for p in ref.passes]


@given(st.integers(0, 2**32))
def test_swap_copies_transposes_output(seed):
    cp, seeds = _instance(seed % 1000, "er")
    a = run_matching(cp.g1, cp.g2, seeds, 1, 2).links
    b = run_matching(cp.g2, cp.g1, seeds.transpose(), 1, 2).links
    assert a.transpose() == b


@given(st.integers(0, 2**32), st.integers(0, 2**32))
def test_relabeling_invariance(seed, pseed):
    cp, seeds = _instance(seed % 1000, "pa")
    perm = np.random.default_rng(pseed).permutation(cp.g2.n)
    g2p = build_graph(cp.g2.n, perm[cp.g2.edges])
    seeds_p = LinkSet(seeds.left, perm[seeds.right])
    a = run_matching(cp.g1, cp.g2, seeds, 2, 2).links
    b = run_matching(cp.g1, g2p, seeds_p, 2, 2).links
    assert LinkSet(a.left, perm[a.right]) == b


def test_deterministic_reruns():
    g = gen_pa(2000, 8, 5)
    cp = copy_independent(g, 0.5, 0.5, True, 6)
    seeds = sample_seeds(cp, 0.1, 7)
    a = run_matching(cp.g1, cp.g2, seeds, 3, 2).links
    b = run_matching(cp.g1, cp.g2, seeds, 3, 2).links
    assert np.array_equal(a.pairs(), b.pairs())
    assert len(a) > len(seeds)
