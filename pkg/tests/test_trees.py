import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from unicell import oracle
from unicell.trees import (
    PlaneTree,
    _parent_depth_numpy,
    _path_count_numpy,
    catalan,
    count_oriented_paths,
    expected_path_count,
    marked_pattern_count_formula,
    mean_path_count,
    sample_plane_tree,
    window_lengths,
    window_path_count,
)

STAR3 = PlaneTree.from_dyck("()()()")
PATH2 = PlaneTree.from_dyck("(())")


def brute_paths(tree, cap):
    """Oriented paths by BFS distances: ordered vertex pairs at distance ell."""
    nv = tree.n_vertices
    adj = [[] for _ in range(nv)]
    for p, c in tree.edges().tolist():
        adj[p].append(c)
        adj[c].append(p)
    out = np.zeros(cap + 1, dtype=np.int64)
    for s in range(nv):
        dist = {s: 0}
        queue = [s]
        for u in queue:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        for d in dist.values():
            if 1 <= d <= cap:
                out[d] += 1
    return out


def test_catalan_values():
    assert catalan(0) == 1
    assert catalan(3) == 5
    assert catalan(10) == 16796
    for n in range(12):
        assert catalan(n + 1) == sum(catalan(i) * catalan(n - i) for i in range(n + 1))


def test_catalan_rejects_negative():
    with pytest.raises(ValueError):
        catalan(-1)


def test_marked_pattern_formula():
    assert marked_pattern_count_formula(2, 1) == 8
    assert marked_pattern_count_formula(2, 2) == 4
    assert marked_pattern_count_formula(2, 3) == 0
    for ell in range(1, 8):
        assert marked_pattern_count_formula(ell, ell) == 2 * ell
    assert expected_path_count(2, 2) == 2
    assert expected_path_count(200, 5) == Fraction(3622357200, 2041513)


@pytest.mark.parametrize("n", range(1, 9))
def test_marked_pattern_formula_matches_enumeration(n):
    trees = oracle.enumerate_plane_trees(n)
    total = np.sum([count_oriented_paths(t, n) for t in trees], axis=0)
    for ell in range(1, n + 1):
        assert int(total[ell]) == marked_pattern_count_formula(n, ell)


def test_tree_structure_from_word():
    t = PlaneTree.from_dyck("(()())()")
    assert t.n_edges == 4 and t.n_vertices == 5
    assert t.parent.tolist() == [-1, 0, 1, 1, 0]
    assert t.depth.tolist() == [0, 1, 2, 2, 1]
    assert t.children == [[1, 4], [2, 3], [], [], []]
    assert t.edges().tolist() == [[0, 1], [1, 2], [1, 3], [0, 4]]
    assert t.to_dyck() == "(()())()"
    assert list(t.dfs_label) == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("word", ["(", ")(", "())(", "(()", "ab"])
def test_unbalanced_words_rejected(word):
    with pytest.raises(ValueError):
        PlaneTree.from_dyck(word)


def test_tree_equality_and_hash():
    a = PlaneTree.from_dyck("(())()")
    b = PlaneTree.from_dyck("(())()")
    assert a == b and hash(a) == hash(b)
    assert a != PlaneTree.from_dyck("()(())")


def test_count_paths_examples():
    assert count_oriented_paths(STAR3, 2).tolist() == [0, 6, 6]
    assert count_oriented_paths(PATH2, 2).tolist() == [0, 4, 2]
    assert count_oriented_paths(PATH2, 5).tolist() == [0, 4, 2, 0, 0, 0]


def test_count_paths_guards():
    with pytest.raises(ValueError):
        count_oriented_paths(STAR3, 0)
    big = sample_plane_tree(10**4 + 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        count_oriented_paths(big, 10**4 + 1)


def test_count_paths_against_bfs(rng):
    for _ in range(40):
        n = int(rng.integers(1, 60))
        t = sample_plane_tree(n, rng)
        cap = int(rng.integers(1, n + 3))
        c = count_oriented_paths(t, cap)
        assert c.tolist() == brute_paths(t, cap).tolist()
        assert c[1] == 2 * n
        assert np.all(c % 2 == 0)


def test_path_count_backends_agree(rng):
    for _ in range(30):
        n = int(rng.integers(1, 200))
        t = sample_plane_tree(n, rng)
        cap = min(int(rng.integers(1, 30)), n)
        assert _path_count_numpy(t.parent, cap)[1:].tolist() == count_oriented_paths(t, cap)[1:].tolist()


def test_parent_backends_agree(rng):
    for n in (1, 2, 7, 500):
        t = sample_plane_tree(n, rng)
        parent, depth = _parent_depth_numpy(t.word)
        assert np.array_equal(parent, t.parent) and np.array_equal(depth, t.depth)


def test_window_lengths_exact_boundaries():
    assert list(window_lengths(0, 1, 10)) == list(range(1, 10))
    assert list(window_lengths(1, 2, 10)) == [5, 6, 7, 8, 9]
    # L = 7/2, M = 1: window [3.5, 7) holds 4, 5, 6
    assert list(window_lengths(1, 1, Fraction(7, 2))) == [4, 5, 6]
    assert list(window_lengths(0, 10, 3)) == []
    with pytest.raises(ValueError):
        window_lengths(-1, 1, 3)
    with pytest.raises(ValueError):
        window_lengths(0, 1, 0)


def test_window_path_count_first_edge_window(rng):
    t = sample_plane_tree(30, rng)
    assert window_path_count(t, 0, 1, 2) == 60
    assert window_path_count(t, 0, 10, 3) == 0


def test_sampler_trivial_and_errors(rng):
    assert sample_plane_tree(1, rng).to_dyck() == "()"
    with pytest.raises(ValueError):
        sample_plane_tree(0, rng)


def test_sampler_deterministic():
    a = sample_plane_tree(50, np.random.default_rng(5))
    b = sample_plane_tree(50, np.random.default_rng(5))
    assert a == b


def test_sampler_frozen_output():
    t = sample_plane_tree(8, np.random.default_rng(123))
    assert t.to_dyck() == "(()(()))()(())()"


@pytest.mark.parametrize("n", [2, 5])
def test_sampler_uniform(n):
    rng = np.random.default_rng(100 + n)
    draws = 10**5 if n == 5 else 2 * 10**4
    counts = Counter(sample_plane_tree(n, rng).key() for _ in range(draws))
    assert len(counts) == catalan(n)
    stat, _ = sps.chisquare(list(counts.values()))
    assert stat < sps.chi2.ppf(0.999, catalan(n) - 1)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 300), seed=st.integers(0, 2**32 - 1))
def test_sampler_invariants(n, seed):
    t = sample_plane_tree(n, np.random.default_rng(seed))
    assert t.n_edges == n
    h = np.cumsum(np.where(t.word, 1, -1))
    assert h.min() >= 0 and h[-1] == 0
    assert np.all(t.parent[1:] < np.arange(1, n + 1))
    assert np.all(t.depth[1:] == t.depth[t.parent[1:]] + 1)


def test_window_limit_needs_short_scale():
    # with L = sqrt(n) the exact mean of P_0 / (n L^2) is 0.5999, not 1
    n, L = 100, 10
    exact = sum(expected_path_count(n, ell) for ell in range(1, L)) / (n * L * L)
    assert abs(float(exact) - 0.5999206188) < 1e-9
    rng = np.random.default_rng(11)
    vals = [window_path_count(sample_plane_tree(n, rng), 0, 1, L) / (n * L * L) for _ in range(2000)]
    assert abs(np.mean(vals) - float(exact)) < 4 * np.std(vals) / np.sqrt(len(vals))
    # once L << sqrt(n) the limit (2i + 1) / M^2 is approached
    for n, L, i, M in ((10**6, 100, 0, 1), (10**6, 100, 1, 2), (10**7, 200, 2, 4)):
        mean = sum(mean_path_count(n, ell) for ell in window_lengths(i, M, L)) / (n * L * L)
        assert abs(mean - (2 * i + 1) / M**2) < 0.02 * (2 * i + 1) / M**2


def test_mean_path_count_float_matches_exact():
    for n, ell in ((5, 1), (200, 7), (1000, 40)):
        assert math.isclose(mean_path_count(n, ell), float(expected_path_count(n, ell)), rel_tol=1e-12)
    assert mean_path_count(3, 4) == 0.0


def test_window_mean_matches_exact_formula():
    rng = np.random.default_rng(12)
    n = 200
    exact = sum(float(expected_path_count(n, ell)) for ell in range(5, 10))
    vals = [window_path_count(sample_plane_tree(n, rng), 1, 2, 10) for _ in range(2000)]
    assert abs(np.mean(vals) - exact) < 0.05 * exact
    assert math.isclose(exact, sum(2 * l * math.comb(400, 200 - l) for l in range(5, 10)) / catalan(200))
