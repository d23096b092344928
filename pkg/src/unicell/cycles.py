"""Bounded-length simple cycles of a kernel, with their junction counts.

A cycle is reported once, whatever its orientation or starting point: the
search starts from the cycle's smallest kernel vertex, only visits larger
vertices, and keeps the orientation whose first edge id is below its last.
Branches are cut when the length so far plus the shortest-path distance back
to the start exceeds ``cap``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ._accel import njit
from .maps import Kernel

MAX_CYCLES = 10**6


@dataclass(frozen=True, order=True)
class CycleRecord:
    length: int
    junctions: int
    is_loop: bool = False

    def __post_init__(self):
        if not 1 <= self.junctions <= self.length:
            raise ValueError(f"junction count {self.junctions} outside [1, {self.length}]")

    def to_json(self) -> dict:
        return {"len": self.length, "k": self.junctions, "loop": self.is_loop}


@dataclass
class CycleList:
    """Cycles of one instance as parallel arrays, sorted by (length, junctions)."""

    lengths: np.ndarray
    junctions: np.ndarray
    truncated: bool = False
    edges: list | None = None

    def __len__(self):
        return self.lengths.shape[0]

    @property
    def is_loop(self) -> np.ndarray:
        return self.lengths == 1

    def records(self) -> list[CycleRecord]:
        return [CycleRecord(int(a), int(b), bool(a == 1)) for a, b in zip(self.lengths, self.junctions)]

    def without_loops(self) -> "CycleList":
        keep = self.lengths > 1
        edges = [e for e, k in zip(self.edges, keep) if k] if self.edges is not None else None
        return CycleList(self.lengths[keep], self.junctions[keep], self.truncated, edges)

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.records()]


def _incidence(K: Kernel):
    nv = K.n_vertices
    ends = K.ends
    deg = np.bincount(ends.ravel(), minlength=nv)
    start = np.zeros(nv + 1, dtype=np.int64)
    np.cumsum(deg, out=start[1:])
    # entry = 2 * edge + side, side 0 meaning the edge leaves through ends[e, 0]
    slots = np.concatenate([2 * np.arange(K.n_edges), 2 * np.arange(K.n_edges) + 1])
    owner = np.concatenate([ends[:, 0], ends[:, 1]])
    order = np.argsort(owner, kind="stable")
    return start, slots[order].astype(np.int64)


def kernel_distances(K: Kernel, cap: int) -> np.ndarray:
    """All-pairs weighted distances (``inf`` beyond ``cap``), one Dijkstra per source."""
    nv = K.n_vertices
    u, v, w = K.ends[:, 0], K.ends[:, 1], K.weight.astype(float)
    keep = u != v
    u, v, w = u[keep], v[keep], w[keep]
    a, b = np.minimum(u, v), np.maximum(u, v)
    # parallel edges: keep the lightest one
    order = np.lexsort((w, b, a))
    a, b, w = a[order], b[order], w[order]
    first = np.ones(a.shape[0], dtype=bool)
    first[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    a, b, w = a[first], b[first], w[first]
    graph = coo_matrix((w, (a, b)), shape=(nv, nv)).tocsr()
    return dijkstra(graph, directed=False, limit=float(cap))


@njit
def _enumerate_kernel(start, inc, ends, tree_ends, weight, junc, dist, cap, max_cycles, keep_edges):
    nv = start.shape[0] - 1
    ne = ends.shape[0]
    out_len = np.empty(1024, dtype=np.int64)
    out_k = np.empty(1024, dtype=np.int64)
    out_edges = np.empty((1024 if keep_edges else 1, max(ne, 1)), dtype=np.int64)
    out_nedges = np.empty(1024, dtype=np.int64)
    count = 0
    truncated = False

    # loops: single-edge cycles
    for e in range(ne):
        if ends[e, 0] == ends[e, 1] and weight[e] <= cap:
            if count == out_len.shape[0]:
                out_len = np.concatenate((out_len, np.empty_like(out_len)))
                out_k = np.concatenate((out_k, np.empty_like(out_k)))
                out_nedges = np.concatenate((out_nedges, np.empty_like(out_nedges)))
                if keep_edges:
                    out_edges = np.concatenate((out_edges, np.empty_like(out_edges)))
            k = junc[e] + (1 if tree_ends[e, 0] != tree_ends[e, 1] else 0)
            out_len[count] = weight[e]
            out_k[count] = k
            out_nedges[count] = 1
            if keep_edges:
                out_edges[count, 0] = e
            count += 1

    visited = np.zeros(nv, dtype=np.bool_)
    path_e = np.empty(nv + 1, dtype=np.int64)  # edge used to enter depth d+1
    path_side = np.empty(nv + 1, dtype=np.int64)
    ptr = np.empty(nv + 1, dtype=np.int64)
    vert = np.empty(nv + 1, dtype=np.int64)
    plen = np.empty(nv + 1, dtype=np.int64)
    pk = np.empty(nv + 1, dtype=np.int64)

    for s in range(nv):
        if truncated:
            break
        depth = 0
        vert[0] = s
        ptr[0] = start[s]
        plen[0] = 0
        pk[0] = 0
        visited[s] = True
        while depth >= 0:
            u = vert[depth]
            if ptr[depth] >= start[u + 1]:
                if depth > 0:
                    visited[u] = False
                depth -= 1
                continue
            slot = inc[ptr[depth]]
            ptr[depth] += 1
            e = slot // 2
            side = slot % 2
            w_vert = ends[e, 1 - side]
            if w_vert == u:
                continue  # loops handled above
            new_len = plen[depth] + weight[e]
            if new_len > cap:
                continue
            # junction at u between the edge we arrived on and e
            k_here = pk[depth] + junc[e]
            if depth > 0:
                pe = path_e[depth - 1]
                ps = path_side[depth - 1]
                t_in = tree_ends[pe, 1 - ps]
                if t_in != tree_ends[e, side]:
                    k_here += 1
            if w_vert == s:
                if depth == 0 or e == path_e[0]:
                    continue
                if path_e[0] > e:
                    continue
                # closing junction at s
                t_arr = tree_ends[e, 1 - side]
                t_dep = tree_ends[path_e[0], path_side[0]]
                k_total = k_here + (1 if t_arr != t_dep else 0)
                if count == out_len.shape[0]:
                    out_len = np.concatenate((out_len, np.empty_like(out_len)))
                    out_k = np.concatenate((out_k, np.empty_like(out_k)))
                    out_nedges = np.concatenate((out_nedges, np.empty_like(out_nedges)))
                    if keep_edges:
                        out_edges = np.concatenate((out_edges, np.empty_like(out_edges)))
                out_len[count] = new_len
                out_k[count] = k_total
                out_nedges[count] = depth + 1
                if keep_edges:
                    for i in range(depth):
                        out_edges[count, i] = path_e[i]
                    out_edges[count, depth] = e
                count += 1
                if count >= max_cycles:
                    truncated = True
                    break
                continue
            if w_vert < s or visited[w_vert]:
                continue
            if new_len + dist[w_vert, s] > cap:
                continue
            path_e[depth] = e
            path_side[depth] = side
            depth += 1
            vert[depth] = w_vert
            ptr[depth] = start[w_vert]
            plen[depth] = new_len
            pk[depth] = k_here
            visited[w_vert] = True
        visited[s] = False
    return out_len[:count], out_k[:count], out_edges[: count if keep_edges else 0], out_nedges[:count], truncated


def enumerate_short_cycles(
    K: Kernel,
    cap: int,
    include_loops: bool = True,
    prune: bool = True,
    keep_edges: bool = False,
    max_cycles: int = MAX_CYCLES,
) -> CycleList:
    """Every simple cycle of total length ``<= cap``, once each.

    Lengths count tree edges; junction counts include both kernel-vertex
    switches and the ``internal_junctions`` of the edges used. With
    ``keep_edges`` the kernel edge sequence of each cycle is kept as well.
    More than ``max_cycles`` cycles sets ``truncated`` and stops.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if K.n_edges == 0:
        return CycleList(np.zeros(0, np.int64), np.zeros(0, np.int64), False, [] if keep_edges else None)
    start, inc = _incidence(K)
    if prune:
        dist = kernel_distances(K, cap)
        dist = np.where(np.isfinite(dist), dist, cap + 1).astype(np.int64)
    else:
        dist = np.zeros((K.n_vertices, K.n_vertices), dtype=np.int64)
    lens, ks, edges, nedges, truncated = _enumerate_kernel(
        start,
        inc,
        np.ascontiguousarray(K.ends),
        np.ascontiguousarray(K.tree_ends),
        K.weight,
        K.internal_junctions,
        dist,
        int(cap),
        int(max_cycles),
        keep_edges,
    )
    order = np.lexsort((ks, lens))
    edge_lists = None
    if keep_edges:
        edge_lists = [edges[i, : nedges[i]].tolist() for i in order]
    out = CycleList(lens[order], ks[order], bool(truncated), edge_lists)
    return out if include_loops else out.without_loops()


def orient_cycle(edge_seq, K: Kernel) -> list[tuple[int, int]]:
    """Traversal ``[(edge, side), ...]`` of a closed simple edge sequence.

    Raises ValueError if the sequence is not a closed simple cycle of ``K``.
    """
    edge_seq = [int(e) for e in edge_seq]
    if not edge_seq or len(set(edge_seq)) != len(edge_seq):
        raise ValueError("edge sequence must be non-empty without repeats")
    if any(not 0 <= e < K.n_edges for e in edge_seq):
        raise ValueError("edge id out of range")
    ends = K.ends
    first = edge_seq[0]
    for side0 in (0, 1):
        s = int(ends[first, side0])
        cur = s
        seen = []
        walk = []
        ok = True
        for e in edge_seq:
            if ends[e, 0] == cur:
                side = 0
            elif ends[e, 1] == cur:
                side = 1
            else:
                ok = False
                break
            seen.append(cur)
            walk.append((e, side))
            cur = int(ends[e, 1 - side])
        if ok and cur == s and len(set(seen)) == len(seen):
            return walk
    raise ValueError("edge sequence is not a closed simple cycle")


def junction_count(edge_seq, K: Kernel) -> int:
    """Number of tree paths in the decomposition of the cycle ``edge_seq``."""
    walk = orient_cycle(edge_seq, K)
    te = K.tree_ends
    k = sum(int(K.internal_junctions[e]) for e, _ in walk)
    for (e1, s1), (e2, s2) in zip(walk, walk[1:] + walk[:1]):
        if te[e1, 1 - s1] != te[e2, s2]:
            k += 1
    return k


def cycle_length(edge_seq, K: Kernel) -> int:
    return int(sum(int(K.weight[e]) for e in edge_seq))
