import itertools
from fractions import Fraction

import numpy as np
import pytest

from unicell import oracle
from unicell.cperm import CPermutation, count_cperms
from unicell.cycles import CycleRecord, enumerate_short_cycles
from unicell.maps import build_underlying_graph, kernelize
from unicell.trees import PlaneTree, catalan
from unicell.validation import random_instance


@pytest.mark.parametrize("n, expected", [(1, 1), (3, 5), (8, 1430)])
def test_tree_enumeration_counts(n, expected):
    trees = oracle.enumerate_plane_trees(n)
    assert len(trees) == expected == catalan(n)
    assert len({t.to_dyck() for t in trees}) == expected


def test_tree_enumeration_order():
    assert [t.to_dyck() for t in oracle.enumerate_plane_trees(2)] == ["(())", "()()"]


@pytest.mark.parametrize("n, g, expected", [(3, 1, 2), (5, 0, 1), (7, 2, 784)])
def test_cperm_enumeration_counts(n, g, expected):
    perms = oracle.enumerate_cperms(n, g)
    assert len(perms) == expected == count_cperms(n, g)
    assert len({p.nontrivial for p in perms}) == expected


def test_cperm_enumeration_shape():
    for p in oracle.enumerate_cperms(5, 1):
        assert all(len(c) % 2 for c in p.cycles)
        assert len(p.cycles) == 3


def test_guards():
    with pytest.raises(ValueError):
        oracle.enumerate_plane_trees(13)
    with pytest.raises(ValueError):
        oracle.enumerate_cperms(10, 1)
    with pytest.raises(ValueError):
        oracle.exact_map_statistics(8, 1)
    with pytest.raises(ValueError):
        oracle.enumerate_path_pairs_and_unions(9, 1, 1)
    with pytest.raises(ValueError):
        oracle.enumerate_path_pairs_and_unions(5, 1, 5)
    tree = PlaneTree(np.tile([True, False], 201))
    G = build_underlying_graph(tree, CPermutation.from_cycles(202, []))
    with pytest.raises(ValueError):
        oracle.naive_cycle_enumeration(G, 3)


def test_naive_on_tree_is_empty():
    tree = PlaneTree.from_dyck("(()(()))()")
    G = build_underlying_graph(tree, CPermutation.from_cycles(6, []))
    assert oracle.naive_cycle_enumeration(G, 5) == []


def test_double_loop_instance():
    tree = PlaneTree.from_dyck("(())")
    sigma = CPermutation.from_cycles(3, [[1, 2, 3]])
    G = build_underlying_graph(tree, sigma)
    assert oracle.naive_cycle_enumeration(G, 2) == [CycleRecord(1, 1, True)] * 2


def test_canonical_cycle():
    assert oracle._canonical_cycle([3, 1, 2]) == (1, 2, 3)
    assert oracle._canonical_cycle([2, 1, 3]) == (1, 2, 3)


def test_path_list_decomposition_matches_naive(rng):
    for _ in range(150):
        tree, sigma = random_instance(rng, n_max=10, g_max=3)
        G = build_underlying_graph(tree, sigma)
        cap = tree.n_edges
        assert oracle.cycles_from_path_lists(tree, sigma, cap) == oracle.naive_cycle_enumeration(G, cap)


def test_naive_matches_kernel(rng):
    for _ in range(200):
        tree, sigma = random_instance(rng, n_max=25, g_max=4)
        G = build_underlying_graph(tree, sigma)
        cap = int(rng.integers(1, tree.n_edges + 1))
        assert enumerate_short_cycles(kernelize(G), cap).records() == oracle.naive_cycle_enumeration(G, cap)


def test_exact_statistics_genus_zero_is_empty():
    d = oracle.exact_map_statistics(5, 0)
    assert d.support == ((),)
    assert d.probability == (Fraction(1),)


def test_exact_statistics_two_one():
    # 2 trees x 2 permutations; every instance is a vertex with two loops
    d = oracle.exact_map_statistics(2, 1)
    assert d.as_dict() == {((1, 1), (1, 1)): Fraction(1)}
    assert oracle.exact_map_statistics(2, 1, include_loops=False).as_dict() == {(): Fraction(1)}


def test_exact_statistics_frozen():
    d = oracle.exact_map_statistics(4, 1, include_loops=False)
    assert sum(d.probability) == 1
    assert len(d.support) == len(set(d.support))
    assert d.as_dict() == {
        (): Fraction(2, 5),
        ((2, 1),): Fraction(12, 35),
        ((2, 1), (2, 1)): Fraction(1, 35),
        ((2, 1), (2, 1), (2, 1)): Fraction(4, 35),
        ((2, 1), (3, 1), (3, 1)): Fraction(2, 35),
        ((3, 1),): Fraction(2, 35),
    }


def test_exact_distribution_rejects_bad_mass():
    with pytest.raises(ValueError):
        oracle.ExactDistribution(((),), (Fraction(1, 2),))


def test_profile_key():
    recs = [CycleRecord(3, 2, False), CycleRecord(1, 1, True), CycleRecord(2, 2, False)]
    assert oracle.profile_key(recs) == ((1, 1), (2, 2), (3, 2))
    assert oracle.profile_key(recs, include_loops=False) == ((2, 2), (3, 2))


def test_path_pairs_single_edges():
    rep = oracle.enumerate_path_pairs_and_unions(4, 1, 1)
    assert rep.union_bound == 128
    assert rep.union_shapes == 6
    assert rep.ok


def test_path_pairs_brute_force_n4():
    total = 0
    for t in oracle.enumerate_plane_trees(4):
        edges = t.edges().tolist()
        for e, f in itertools.product(edges, repeat=2):
            if set(e).isdisjoint(f):
                total += 4  # two orientations each
    rep = oracle.enumerate_path_pairs_and_unions(4, 1, 1)
    assert rep.disjoint_pairs == total == 224
    assert rep.disjoint_bound == 672


@pytest.mark.parametrize("n, l1, l2", [(4, 2, 2), (8, 4, 4), (2, 1, 2)])
def test_path_pairs_too_few_vertices(n, l1, l2):
    rep = oracle.enumerate_path_pairs_and_unions(n, l1, l2)
    assert rep.disjoint_pairs == 0
    assert rep.ok


def test_path_pair_bounds_hold():
    for n in range(1, 7):
        for l1, l2 in ((1, 1), (1, 2), (2, 2), (1, 3)):
            assert oracle.enumerate_path_pairs_and_unions(n, l1, l2).ok
