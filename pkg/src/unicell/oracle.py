"""Exhaustive small-instance enumerations used as ground truth.

Everything here is brute force with hard size guards, and exact
(integers and Fractions). Nothing in this module is used by the samplers.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cperm import CPermutation
from .cycles import CycleRecord
from .maps import UnderlyingGraph, build_underlying_graph
from .trees import PlaneTree

TREE_GUARD = 12
CPERM_GUARD = 9
NAIVE_EDGE_GUARD = 200
MAP_GUARD = 7
PAIR_TREE_GUARD = 8
PAIR_LENGTH_GUARD = 4


@dataclass(frozen=True)
class ExactDistribution:
    support: tuple
    probability: tuple[Fraction, ...]

    def __post_init__(self):
        if sum(self.probability) != 1:
            raise ValueError("probabilities must sum to 1")

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probability))


def enumerate_plane_trees(n: int) -> list[PlaneTree]:
    """All Dyck words of semilength ``n``, in lexicographic order (up first)."""
    if n > TREE_GUARD:
        raise ValueError(f"tree enumeration is limited to n <= {TREE_GUARD}")
    if n < 0:
        raise ValueError("n must be >= 0")
    words: list[list[bool]] = []

    def rec(word, ups, downs):
        if ups == n and downs == n:
            words.append(list(word))
            return
        if ups < n:
            word.append(True)
            rec(word, ups + 1, downs)
            word.pop()
        if downs < ups:
            word.append(False)
            rec(word, ups, downs + 1)
            word.pop()

    rec([], 0, 0)
    return [PlaneTree(np.array(w, dtype=bool)) for w in words]


def enumerate_cperms(n: int, g: int) -> list[CPermutation]:
    """All permutations of ``{1..n}`` with odd cycles only and ``n - 2g`` cycles."""
    if n > CPERM_GUARD:
        raise ValueError(f"C-permutation enumeration is limited to n <= {CPERM_GUARD}")
    out = []
    for images in itertools.permutations(range(1, n + 1)):
        seen = [False] * (n + 1)
        cycles = []
        ok = True
        for start in range(1, n + 1):
            if seen[start]:
                continue
            cyc = []
            e = start
            while not seen[e]:
                seen[e] = True
                cyc.append(e)
                e = images[e - 1]
            if len(cyc) % 2 == 0:
                ok = False
                break
            cycles.append(cyc)
        if ok and len(cycles) == n - 2 * g:
            out.append(CPermutation.from_cycles(n, cycles))
    return out


# ---------------------------------------------------------------------------
# Cycles by brute force
# ---------------------------------------------------------------------------


def _canonical_cycle(edge_seq: list[int]) -> tuple[int, ...]:
    k = len(edge_seq)
    best = None
    for seq in (edge_seq, edge_seq[::-1]):
        for i in range(k):
            cand = tuple(seq[i:] + seq[:i])
            if best is None or cand < best:
                best = cand
    return best


def naive_cycles(G: UnderlyingGraph, cap: int) -> list[tuple[list[int], CycleRecord]]:
    """Unpruned DFS over the full multigraph; each cycle once, by canonical edge sequence."""
    if G.n_edges > NAIVE_EDGE_GUARD:
        raise ValueError(f"naive enumeration is limited to {NAIVE_EDGE_GUARD} edges")
    ec = G.edge_class.tolist()
    et = G.edge_tree.tolist()
    inc: dict[int, list[tuple[int, int]]] = {}
    for e, (a, b) in enumerate(ec):
        inc.setdefault(a, []).append((e, 0))
        inc.setdefault(b, []).append((e, 1))
    found: dict[tuple[int, ...], CycleRecord] = {}

    def record(walk):
        k = 0
        for (e1, s1), (e2, s2) in zip(walk, walk[1:] + walk[:1]):
            if et[e1][1 - s1] != et[e2][s2]:
                k += 1
        edges = [e for e, _ in walk]
        key = _canonical_cycle(edges)
        found.setdefault(key, CycleRecord(len(edges), k, len(edges) == 1))

    for e, (a, b) in enumerate(ec):
        if a == b and cap >= 1:
            record([(e, 0)])

    def dfs(start, u, walk, visited):
        for e, side in inc.get(u, ()):
            w = ec[e][1 - side]
            if w == u:
                continue
            if w == start:
                if walk and e != walk[0][0]:
                    record(walk + [(e, side)])
                continue
            if w in visited or len(walk) + 1 >= cap:
                continue
            visited.add(w)
            walk.append((e, side))
            dfs(start, w, walk, visited)
            walk.pop()
            visited.discard(w)

    for s in range(G.n_vertices):
        dfs(s, s, [], {s})
    return [(list(k), r) for k, r in found.items() if r.length <= cap]


def naive_cycle_enumeration(G: UnderlyingGraph, cap: int) -> list[CycleRecord]:
    return sorted(r for _, r in naive_cycles(G, cap))


def cycles_from_path_lists(tree: PlaneTree, sigma: CPermutation, cap: int) -> list[CycleRecord]:
    """Cycles as equivalence classes of lists of disjoint tree paths.

    A list ``(p_1..p_k)`` qualifies when the end of each path is equivalent
    to the start of the next (cyclically) and no other pair of vertices on
    the paths is equivalent. Each cycle corresponds to ``2k`` such lists.
    """
    nv = tree.n_vertices
    cls = sigma.class_ids().tolist()
    adj = [[] for _ in range(nv)]
    for p, c in tree.edges().tolist():
        adj[p].append(c)
        adj[c].append(p)
    paths = []  # vertex tuples of oriented paths with >= 1 edge
    for s in range(nv):
        stack = [(s, (s,))]
        while stack:
            u, path = stack.pop()
            if len(path) > 1:
                paths.append(path)
            if len(path) - 1 >= cap:
                continue
            for w in adj[u]:
                if w not in path:
                    stack.append((w, path + (w,)))
    by_start: dict[int, list[tuple[int, ...]]] = {}
    for p in paths:
        by_start.setdefault(cls[p[0]], []).append(p)

    counts: Counter = Counter()

    def valid(plist) -> bool:
        verts = [v for p in plist for v in p]
        if len(set(verts)) != len(verts):
            return False
        k = len(plist)
        allowed = set()
        for i in range(k):
            a, b = plist[i][-1], plist[(i + 1) % k][0]
            allowed.add((min(a, b), max(a, b)))
        for x, y in itertools.combinations(verts, 2):
            if cls[x] == cls[y] and (min(x, y), max(x, y)) not in allowed:
                return False
        return True

    def extend(plist, length):
        last_end = plist[-1][-1]
        first_start = plist[0][0]
        if cls[last_end] == cls[first_start] and valid(plist):
            counts[(length, len(plist))] += 1
        used = {v for p in plist for v in p}
        for p in by_start.get(cls[last_end], ()):
            if length + len(p) - 1 > cap or used.intersection(p):
                continue
            if p[0] == last_end:
                continue  # consecutive paths must switch tree vertex
            extend(plist + [p], length + len(p) - 1)

    for p in paths:
        extend([p], len(p) - 1)
    out = []
    for (length, k), c in sorted(counts.items()):
        if c % (2 * k):
            raise AssertionError("path lists did not come in classes of size 2k")
        out.extend([CycleRecord(length, k, length == 1)] * (c // (2 * k)))
    return out


def profile_key(records, include_loops: bool = True) -> tuple:
    """Sorted ``(length, k)`` multiset, the outcome key for distribution checks."""
    return tuple(sorted((r.length, r.junctions) for r in records if include_loops or not r.is_loop))


def exact_map_statistics(n: int, g: int, include_loops: bool = True, cap: int | None = None) -> ExactDistribution:
    """Exact law of the cycle profile under uniform (tree, sigma).

    By the 2^{2g}-to-1 correspondence this is also the law for the
    underlying graph of a uniform unicellular map.
    """
    if n > MAP_GUARD:
        raise ValueError(f"exact map statistics are limited to n <= {MAP_GUARD}")
    cap = n if cap is None else cap
    trees = enumerate_plane_trees(n)
    perms = enumerate_cperms(n + 1, g)
    counts: Counter = Counter()
    for t in trees:
        for s in perms:
            G = build_underlying_graph(t, s)
            counts[profile_key(naive_cycle_enumeration(G, cap), include_loops)] += 1
    total = len(trees) * len(perms)
    keys = sorted(counts)
    return ExactDistribution(tuple(keys), tuple(Fraction(counts[k], total) for k in keys))


# ---------------------------------------------------------------------------
# Pairs of paths
# ---------------------------------------------------------------------------


def _oriented_paths(tree: PlaneTree, length: int) -> list[tuple[int, ...]]:
    nv = tree.n_vertices
    adj = [[] for _ in range(nv)]
    for p, c in tree.edges().tolist():
        adj[p].append(c)
        adj[c].append(p)
    out = []
    for s in range(nv):
        stack = [(s,)]
        while stack:
            path = stack.pop()
            if len(path) - 1 == length:
                out.append(path)
                continue
            for w in adj[path[-1]]:
                if w not in path:
                    stack.append(path + (w,))
    return out


def _union_canonical(p1: tuple[int, ...], p2: tuple[int, ...]) -> str:
    """Isomorphism-invariant code of the union of two oriented paths.

    Edges carry colour 1 (first path), 2 (second) or 3 (both); vertices carry
    start/end marks of both paths. Unordered tree, minimised over roots.
    """
    colour: dict[frozenset, int] = {}
    for bit, p in ((1, p1), (2, p2)):
        for a, b in zip(p, p[1:]):
            key = frozenset((a, b))
            colour[key] = colour.get(key, 0) | bit
    mark = Counter()
    mark[p1[0]] += 1
    mark[p1[-1]] += 2
    mark[p2[0]] += 4
    mark[p2[-1]] += 8
    adj: dict[int, list[int]] = {}
    for key in colour:
        a, b = tuple(key)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    def code(v, parent):
        kids = sorted(f"{colour[frozenset((v, w))]}{code(w, v)}" for w in adj[v] if w != parent)
        return f"[{mark[v]}" + "".join(kids) + "]"

    return min(code(v, None) for v in adj)


@dataclass(frozen=True)
class PathPairReport:
    n: int
    ell1: int
    ell2: int
    disjoint_pairs: int  # sum over trees of ordered disjoint oriented path pairs
    disjoint_bound: int  # 4 l1 l2 (n + l) C(2n, n + l)
    union_shapes: int  # distinct unions of two intersecting paths
    union_bound: int  # 16 (l1+1)(l2+1)(min+1)

    @property
    def ok(self) -> bool:
        return self.disjoint_pairs <= self.disjoint_bound and self.union_shapes <= self.union_bound


def enumerate_path_pairs_and_unions(n: int, ell1: int, ell2: int) -> PathPairReport:
    if n > PAIR_TREE_GUARD or max(ell1, ell2) > PAIR_LENGTH_GUARD:
        raise ValueError("path pair enumeration is limited to n <= 8 and lengths <= 4")
    if min(ell1, ell2) < 1:
        raise ValueError("path lengths must be >= 1")
    disjoint = 0
    shapes = set()
    for t in enumerate_plane_trees(n):
        A = _oriented_paths(t, ell1)
        B = A if ell2 == ell1 else _oriented_paths(t, ell2)
        for p in A:
            ps = set(p)
            for q in B:
                if ps.isdisjoint(q):
                    disjoint += 1
                else:
                    shapes.add(_union_canonical(p, q))
    ell = ell1 + ell2
    bound = 4 * ell1 * ell2 * (n + ell) * math.comb(2 * n, n + ell) if n >= ell else 0
    return PathPairReport(
        n, ell1, ell2, disjoint, bound, len(shapes), 16 * (ell1 + 1) * (ell2 + 1) * (min(ell1, ell2) + 1)
    )
