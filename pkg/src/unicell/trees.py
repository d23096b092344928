"""Rooted plane trees: uniform sampling, Catalan-type counts and path counting.

Vertices are labelled 0..n in depth-first, left-to-right order (the root is
0), so vertex ``v >= 1`` is the ``v``-th up-step of the Dyck word.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._accel import HAS_NUMBA, njit

# Dense path counting allocates n * (cap + 1) integers.
PATH_COUNT_GUARD = 10**4


def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.comb(2 * n, n) // (n + 1)


def marked_pattern_count_formula(n: int, ell: int) -> int:
    """Number of plane trees of size ``n`` with a marked occurrence of a
    path pattern of length ``ell``: ``2 ell binom(2n, n - ell)``."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if ell > n:
        return 0
    return 2 * ell * math.comb(2 * n, n - ell)


def expected_path_count(n: int, ell: int) -> Fraction:
    """Mean number of oriented paths of length ``ell`` in a uniform tree."""
    return Fraction(marked_pattern_count_formula(n, ell), catalan(n))


def mean_path_count(n: int, ell: int) -> float:
    """Float version of :func:`expected_path_count`, usable at large ``n``.

    ``2 ell (n + 1) prod_{j=1..ell} (n - j + 1) / (n + j)``.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if ell > n:
        return 0.0
    j = np.arange(1, ell + 1, dtype=float)
    return float(2 * ell * (n + 1) * np.exp(np.sum(np.log1p(-(2 * j - 1) / (n + j)))))


@njit
def _parent_depth_kernel(word):
    n = word.shape[0] // 2
    parent = np.empty(n + 1, dtype=np.int64)
    depth = np.empty(n + 1, dtype=np.int64)
    stack = np.empty(n + 1, dtype=np.int64)
    parent[0] = -1
    depth[0] = 0
    stack[0] = 0
    top = 0
    nxt = 1
    for i in range(word.shape[0]):
        if word[i]:
            parent[nxt] = stack[top]
            depth[nxt] = top + 1
            top += 1
            stack[top] = nxt
            nxt += 1
        else:
            top -= 1
    return parent, depth


def _parent_depth_numpy(word):
    n = word.shape[0] // 2
    steps = np.where(word, 1, -1).astype(np.int64)
    height = np.cumsum(steps)
    up_pos = np.flatnonzero(word)
    depth = np.zeros(n + 1, dtype=np.int64)
    depth[1:] = height[up_pos]
    labels = np.arange(n + 1, dtype=np.int64)
    # parent of v = largest label w < v with depth[w] == depth[v] - 1
    key = depth * (n + 1) + labels
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    query = (depth[1:] - 1) * (n + 1) + labels[1:]
    idx = np.searchsorted(sorted_key, query, side="left") - 1
    parent = np.empty(n + 1, dtype=np.int64)
    parent[0] = -1
    parent[1:] = order[idx]
    return parent, depth


class PlaneTree:
    """Immutable rooted plane tree backed by its Dyck word.

    ``word[i]`` is True for an up-step. ``parent[0] == -1``.
    """

    __slots__ = ("word", "parent", "depth", "__dict__")

    def __init__(self, word, parent=None, depth=None, check: bool = True):
        word = np.asarray(word, dtype=np.bool_)
        if check:
            _check_dyck(word)
        if parent is None or depth is None:
            if HAS_NUMBA:
                parent, depth = _parent_depth_kernel(word)
            else:
                parent, depth = _parent_depth_numpy(word)
        for arr in (word, parent, depth):
            arr.setflags(write=False)
        self.word = word
        self.parent = parent
        self.depth = depth

    @property
    def n_edges(self) -> int:
        return self.word.shape[0] // 2

    @property
    def n_vertices(self) -> int:
        return self.n_edges + 1

    @property
    def dfs_label(self) -> np.ndarray:
        return np.arange(self.n_vertices)

    @cached_property
    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for v, p in enumerate(self.parent.tolist()):
            if p >= 0:
                kids[p].append(v)
        return kids

    def edges(self) -> np.ndarray:
        """Tree edges as an ``(n, 2)`` array of ``(parent, child)``; row i is the edge above vertex i+1."""
        child = np.arange(1, self.n_vertices)
        return np.stack([self.parent[1:], child], axis=1)

    def to_dyck(self) -> str:
        return "".join("(" if b else ")" for b in self.word.tolist())

    @classmethod
    def from_dyck(cls, text: str) -> "PlaneTree":
        bad = set(text) - {"(", ")"}
        if bad:
            raise ValueError(f"unexpected characters in Dyck word: {sorted(bad)}")
        return cls(np.frombuffer(text.encode(), dtype=np.uint8) == ord("("))

    def key(self) -> bytes:
        return np.packbits(self.word).tobytes() + self.n_edges.to_bytes(4, "little")

    def __eq__(self, other):
        return isinstance(other, PlaneTree) and np.array_equal(self.word, other.word)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.n_edges <= 20:
            return f"PlaneTree('{self.to_dyck()}')"
        return f"PlaneTree(n_edges={self.n_edges})"


def _check_dyck(word: np.ndarray) -> None:
    if word.ndim != 1 or word.shape[0] % 2:
        raise ValueError("Dyck word must have even length")
    height = np.cumsum(np.where(word, 1, -1))
    if height.size and (height.min() < 0 or height[-1] != 0):
        raise ValueError("word is not balanced")


def sample_plane_tree(n: int, rng: np.random.Generator) -> PlaneTree:
    """Uniform rooted plane tree with ``n`` edges.

    Shuffles ``n + 1`` up-steps and ``n`` down-steps, then applies the cycle
    lemma: exactly one rotation keeps every partial sum positive, and
    dropping its leading up-step leaves a Dyck word. Every Dyck word arises
    from exactly ``2n + 1`` sequences.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    steps = np.ones(2 * n + 1, dtype=np.int8)
    steps[:n] = -1
    rng.shuffle(steps)
    height = np.cumsum(steps, dtype=np.int64)
    # partial sums S_1..S_{2n}; S_0 = 0 is included via the prepended slot
    prefix = np.empty(2 * n + 1, dtype=np.int64)
    prefix[0] = 0
    prefix[1:] = height[:-1]
    j = 2 * n - int(np.argmin(prefix[::-1]))  # last index of the minimum
    rotated = np.concatenate([steps[j:], steps[:j]])
    word = rotated[1:] > 0
    tail = np.cumsum(rotated[1:], dtype=np.int64)
    if tail.min() < 0 or tail[-1] != 0 or rotated[0] != 1:
        raise AssertionError("cycle lemma rotation produced an unbalanced word")
    return PlaneTree(word, check=False)


@njit
def _path_count_kernel(parent, cap):
    nv = parent.shape[0]
    down = np.zeros((nv, cap + 1), dtype=np.int64)
    out = np.zeros(cap + 1, dtype=np.int64)
    for v in range(nv):
        down[v, 0] = 1
    # children carry larger labels, so a reverse sweep sees them first
    for c in range(nv - 1, 0, -1):
        p = parent[c]
        for d in range(cap + 1):
            a = down[p, d]
            if a == 0:
                continue
            for e in range(cap - d):
                b = down[c, e]
                if b:
                    out[d + e + 1] += a * b
        for e in range(cap):
            down[p, e + 1] += down[c, e]
    for ell in range(cap + 1):
        out[ell] *= 2
    return out


def _path_count_numpy(parent, cap):
    nv = parent.shape[0]
    anc = np.empty((cap + 1, nv), dtype=np.int64)
    anc[0] = np.arange(nv)
    for a in range(1, cap + 1):
        prev = anc[a - 1]
        anc[a] = np.where(prev >= 0, parent[np.maximum(prev, 0)], -1)
    cnt = np.empty((cap + 1, nv), dtype=np.int64)
    for a in range(cap + 1):
        row = anc[a]
        cnt[a] = np.bincount(row[row >= 0], minlength=nv)

    def shared(a, b):
        return int(np.dot(cnt[a], cnt[b]))

    def shared_below_root(a, b):
        # pairs whose common ancestor one level down is not the root
        return shared(a, b) - int(cnt[a, 0] * cnt[b, 0])

    # ordered pairs at distance a and b below a common ancestor, minus those
    # whose lowest common ancestor sits one level lower
    out = np.zeros(cap + 1, dtype=np.int64)
    for ell in range(1, cap + 1):
        total = 0
        for a in range(ell + 1):
            b = ell - a
            total += shared(a, b)
            if a >= 1 and b >= 1:
                total -= shared_below_root(a - 1, b - 1)
        out[ell] = total
    return out


def count_oriented_paths(tree: PlaneTree, cap: int) -> np.ndarray:
    """``c[ell]`` = number of oriented simple paths of length ``ell``, for
    ``1 <= ell <= cap``; ``c[0]`` is left at 0."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if tree.n_edges > PATH_COUNT_GUARD and cap >= tree.n_edges:
        raise ValueError("full-length path counting is disabled above 10^4 edges")
    if tree.n_vertices * (min(cap, tree.n_edges) + 1) > 5 * 10**7:
        raise ValueError("cap too large for this tree size")
    cap_eff = min(cap, tree.n_edges)
    if HAS_NUMBA:
        counts = _path_count_kernel(tree.parent, cap_eff)
    else:
        counts = _path_count_numpy(tree.parent, cap_eff)
    out = np.zeros(cap + 1, dtype=np.int64)
    out[1 : cap_eff + 1] = counts[1:]
    return out


def window_lengths(i: int, M: int, L) -> range:
    """Integer lengths in ``[i L / M, (i + 1) L / M)``, compared exactly."""
    if i < 0 or M < 1:
        raise ValueError("need i >= 0 and M >= 1")
    Lq = Fraction(L)
    if Lq <= 0:
        raise ValueError("L must be positive")
    lo = math.ceil(Fraction(i) * Lq / M)
    hi = math.ceil(Fraction(i + 1) * Lq / M)  # exclusive
    return range(max(lo, 1), max(hi, 1))


def window_path_count(tree: PlaneTree, i: int, M: int, L) -> int:
    lengths = window_lengths(i, M, L)
    if len(lengths) == 0:
        return 0
    c = count_oriented_paths(tree, lengths[-1])
    return int(sum(int(c[ell]) for ell in lengths))
