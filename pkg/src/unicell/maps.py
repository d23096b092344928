"""C-decorated trees, their underlying multigraph, and its kernel.

The underlying graph merges the tree vertices lying in one cycle of sigma
(vertex ``v`` of the tree is element ``v + 1`` of sigma). The kernel is what
is left after pruning degree-1 vertices and contracting degree-2 vertices
into weighted edges; every simple cycle survives with its length and
junction count.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from ._accel import HAS_NUMBA, njit
from .cperm import CPermutation, sample_cperm
from .trees import PlaneTree, sample_plane_tree

EXACT_DIAMETER_GUARD = 10**5


@dataclass(frozen=True)
class CDecoratedTree:
    tree: PlaneTree
    sigma: CPermutation

    def __post_init__(self):
        if self.sigma.n != self.tree.n_vertices:
            raise ValueError("sigma must act on the n + 1 tree vertices")

    @property
    def genus(self) -> int:
        return self.sigma.genus


@dataclass(frozen=True)
class UnderlyingGraph:
    """Multigraph on sigma-classes with one edge per tree edge.

    Edge ``i`` comes from the tree edge above vertex ``i + 1``:
    ``edge_tree[i] == (parent, child)`` and ``edge_class[i]`` holds their
    classes. ``tree_class[v]`` is the class of tree vertex ``v``.
    """

    n_vertices: int
    tree_class: np.ndarray
    edge_class: np.ndarray  # (n, 2)
    edge_tree: np.ndarray  # (n, 2)
    tree_depth: np.ndarray | None = None

    @property
    def n_edges(self) -> int:
        return self.edge_class.shape[0]

    @property
    def cyclomatic_number(self) -> int:
        return self.n_edges - self.n_vertices + self.n_components()

    def n_components(self) -> int:
        if self.n_edges == 0:
            return self.n_vertices
        return connected_components(self._adjacency(), directed=False)[0]

    def is_connected(self) -> bool:
        return self.n_components() == 1

    def _adjacency(self):
        u, v = self.edge_class[:, 0], self.edge_class[:, 1]
        data = np.ones(u.shape[0], dtype=np.int8)
        return coo_matrix((data, (u, v)), shape=(self.n_vertices,) * 2).tocsr()

    def loop_count(self) -> int:
        return int(np.count_nonzero(self.edge_class[:, 0] == self.edge_class[:, 1]))

    def to_json(self) -> dict:
        rows = np.concatenate([self.edge_class, self.edge_tree], axis=1)
        return {"n_vertices": int(self.n_vertices), "edges": rows.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "UnderlyingGraph":
        rows = np.asarray(data["edges"], dtype=np.int64).reshape(-1, 4)
        n_tree = int(rows[:, 2:].max()) + 1 if rows.size else 1
        tree_class = np.full(n_tree, -1, dtype=np.int64)
        tree_class[rows[:, 2]] = rows[:, 0]
        tree_class[rows[:, 3]] = rows[:, 1]
        return cls(int(data["n_vertices"]), tree_class, rows[:, :2].copy(), rows[:, 2:].copy())


def build_underlying_graph(tree: PlaneTree, sigma: CPermutation) -> UnderlyingGraph:
    if sigma.n != tree.n_vertices:
        raise ValueError(f"sigma has {sigma.n} elements but the tree has {tree.n_vertices} vertices")
    tree_class = sigma.class_ids()
    edge_tree = tree.edges()
    edge_class = tree_class[edge_tree]
    for arr in (tree_class, edge_tree, edge_class):
        arr.setflags(write=False)
    return UnderlyingGraph(sigma.n_cycles, tree_class, edge_class, edge_tree, tree.depth)


def sample_map(n: int, g: int, rng: np.random.Generator) -> tuple[CDecoratedTree, UnderlyingGraph]:
    """Uniform C-decorated tree of size ``n`` and genus ``g`` and its graph.

    Its underlying graph has the law of the underlying graph of a uniform
    unicellular map of size ``n`` and genus ``g``.
    """
    tree = sample_plane_tree(n, rng)
    sigma = sample_cperm(n + 1, g, rng)
    return CDecoratedTree(tree, sigma), build_underlying_graph(tree, sigma)


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Kernel:
    """Weighted multigraph supporting every cycle of the underlying graph.

    ``vertex_class[i]`` is the graph class of kernel vertex ``i`` (sorted).
    Edge ``e`` joins ``ends[e, 0]`` and ``ends[e, 1]`` (kernel vertex ids),
    leaving them through tree vertices ``tree_ends[e, 0]`` and
    ``tree_ends[e, 1]``; ``weight[e]`` counts tree edges and
    ``internal_junctions[e]`` the contracted classes where the walk switches
    tree vertex.
    """

    vertex_class: np.ndarray
    ends: np.ndarray
    tree_ends: np.ndarray
    weight: np.ndarray
    internal_junctions: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.vertex_class.shape[0]

    @property
    def n_edges(self) -> int:
        return self.ends.shape[0]

    def degrees(self) -> np.ndarray:
        return np.bincount(self.ends.ravel(), minlength=self.n_vertices)

    def n_components(self) -> int:
        if self.n_vertices == 0:
            return 0
        u, v = self.ends[:, 0], self.ends[:, 1]
        adj = coo_matrix((np.ones(u.shape[0]), (u, v)), shape=(self.n_vertices,) * 2)
        return connected_components(adj, directed=False)[0]

    def to_json(self) -> dict:
        rows = np.concatenate(
            [
                self.vertex_class[self.ends],
                self.tree_ends,
                self.weight[:, None],
                self.internal_junctions[:, None],
            ],
            axis=1,
        )
        return {
            "n_vertices": int(self.n_vertices),
            "vertex_class": self.vertex_class.tolist(),
            "edges": rows.tolist(),  # [class_u, class_v, tree_u, tree_v, weight, internal_junctions]
        }

    def signature(self) -> tuple:
        return (
            tuple(self.vertex_class.tolist()),
            tuple(map(tuple, np.concatenate([self.ends, self.tree_ends, self.weight[:, None], self.internal_junctions[:, None]], axis=1).tolist())),
        )


def _empty_kernel() -> Kernel:
    z = np.zeros(0, dtype=np.int64)
    return Kernel(z, z.reshape(0, 2), z.reshape(0, 2), z, z)


def _finish_kernel(classes, cu, cv, tu, tv, w, junc) -> Kernel:
    """Relabel kernel vertices by sorted class and put edges in canonical order."""
    classes = np.asarray(classes, dtype=np.int64)
    if classes.size == 0:
        return _empty_kernel()
    vertex_class = np.unique(classes)
    cu, cv, tu, tv = (np.asarray(a, dtype=np.int64) for a in (cu, cv, tu, tv))
    w = np.asarray(w, dtype=np.int64)
    junc = np.asarray(junc, dtype=np.int64)
    swap = (cu > cv) | ((cu == cv) & (tu > tv))
    cu, cv = np.where(swap, cv, cu), np.where(swap, cu, cv)
    tu, tv = np.where(swap, tv, tu), np.where(swap, tu, tv)
    order = np.lexsort((junc, w, tv, tu, cv, cu))
    ku = np.searchsorted(vertex_class, cu[order])
    kv = np.searchsorted(vertex_class, cv[order])
    return Kernel(
        vertex_class,
        np.stack([ku, kv], axis=1),
        np.stack([tu[order], tv[order]], axis=1),
        w[order],
        junc[order],
    )


@njit
def _kernelize_kernel(n_classes, cu, cv, tu, tv):
    m = cu.shape[0]
    deg = np.zeros(n_classes, dtype=np.int64)
    for e in range(m):
        deg[cu[e]] += 1
        deg[cv[e]] += 1
    # incidence lists in CSR form; entry = 2 * edge + side
    start = np.zeros(n_classes + 1, dtype=np.int64)
    for c in range(n_classes):
        start[c + 1] = start[c] + deg[c]
    fill = start[:-1].copy()
    inc = np.empty(2 * m, dtype=np.int64)
    for e in range(m):
        inc[fill[cu[e]]] = 2 * e
        fill[cu[e]] += 1
        inc[fill[cv[e]]] = 2 * e + 1
        fill[cv[e]] += 1

    alive_edge = np.ones(m, dtype=np.bool_)
    alive = np.ones(n_classes, dtype=np.bool_)
    queue = np.empty(n_classes, dtype=np.int64)
    qh = 0
    qt = 0
    for c in range(n_classes):
        if deg[c] <= 1:
            queue[qt] = c
            qt += 1
    while qh < qt:
        c = queue[qh]
        qh += 1
        if not alive[c]:
            continue
        alive[c] = False
        for i in range(start[c], start[c + 1]):
            e = inc[i] // 2
            if not alive_edge[e]:
                continue
            alive_edge[e] = False
            other = cv[e] if inc[i] % 2 == 0 else cu[e]
            deg[c] -= 1
            deg[other] -= 1
            if alive[other] and deg[other] <= 1:
                queue[qt] = other
                qt += 1

    is_kernel = np.zeros(n_classes, dtype=np.bool_)
    n_alive = 0
    first_alive = -1
    for c in range(n_classes):
        if alive[c]:
            n_alive += 1
            if first_alive < 0:
                first_alive = c
            if deg[c] >= 3:
                is_kernel[c] = True
    if n_alive > 0:
        any_kernel = False
        for c in range(n_classes):
            if is_kernel[c]:
                any_kernel = True
                break
        if not any_kernel:
            is_kernel[first_alive] = True

    used = np.zeros(m, dtype=np.bool_)
    out_cu = np.empty(m, dtype=np.int64)
    out_cv = np.empty(m, dtype=np.int64)
    out_tu = np.empty(m, dtype=np.int64)
    out_tv = np.empty(m, dtype=np.int64)
    out_w = np.empty(m, dtype=np.int64)
    out_j = np.empty(m, dtype=np.int64)
    ne = 0
    for c in range(n_classes):
        if not is_kernel[c]:
            continue
        for i in range(start[c], start[c + 1]):
            e = inc[i] // 2
            side = inc[i] % 2
            if not alive_edge[e] or used[e]:
                continue
            used[e] = True
            t0 = tu[e] if side == 0 else tv[e]
            cur = cv[e] if side == 0 else cu[e]
            t_in = tv[e] if side == 0 else tu[e]
            w = 1
            junc = 0
            prev_edge = e
            while not is_kernel[cur]:
                nxt = -1
                nside = 0
                for k in range(start[cur], start[cur + 1]):
                    f = inc[k] // 2
                    if alive_edge[f] and f != prev_edge:
                        nxt = f
                        nside = inc[k] % 2
                        break
                t_out = tu[nxt] if nside == 0 else tv[nxt]
                if t_out != t_in:
                    junc += 1
                used[nxt] = True
                cur = cv[nxt] if nside == 0 else cu[nxt]
                t_in = tv[nxt] if nside == 0 else tu[nxt]
                w += 1
                prev_edge = nxt
            out_cu[ne] = c
            out_cv[ne] = cur
            out_tu[ne] = t0
            out_tv[ne] = t_in
            out_w[ne] = w
            out_j[ne] = junc
            ne += 1
    kclasses = np.flatnonzero(is_kernel)
    return kclasses, out_cu[:ne], out_cv[:ne], out_tu[:ne], out_tv[:ne], out_w[:ne], out_j[:ne]


def _depths(parent: np.ndarray) -> np.ndarray:
    depth = np.zeros(parent.shape[0], dtype=np.int64)
    par = parent.tolist()
    for v in range(1, len(par)):  # parents carry smaller labels
        depth[v] = depth[par[v]] + 1
    return depth


def _kernelize_steiner(G: UnderlyingGraph) -> Kernel:
    """numpy route: the 2-core is the image of the subtree spanning all
    tree vertices that share their class; contract it along ancestor chains."""
    tree_class = G.tree_class
    nv = tree_class.shape[0]
    parent = np.empty(nv, dtype=np.int64)
    parent[0] = -1
    parent[G.edge_tree[:, 1]] = G.edge_tree[:, 0]
    class_size = np.bincount(tree_class, minlength=G.n_vertices)
    marked = class_size[tree_class] >= 2
    # a loop-free class of size 1 never joins a cycle, so the kernel is empty without marks
    total = int(marked.sum())
    if total == 0:
        return _empty_kernel()
    depth = G.tree_depth if G.tree_depth is not None else _depths(parent)
    size = _subtree_sizes_from_depth(parent, depth)
    prefix = np.concatenate([[0], np.cumsum(marked)])
    labels = np.arange(nv)
    inside = prefix[labels + size] - prefix[labels]
    child = np.arange(1, nv)
    steiner_edge = (inside[child] > 0) & (inside[child] < total)
    sdeg = np.bincount(child[steiner_edge], minlength=nv) + np.bincount(parent[child[steiner_edge]], minlength=nv)
    key_vertex = marked | (sdeg >= 3)
    top = int(np.flatnonzero(inside == total).max())  # deepest vertex holding every mark
    ks = np.flatnonzero(key_vertex).tolist()

    stack: list[int] = []
    ends = []
    orphans = []
    sz = size.tolist()
    dep = depth.tolist()
    for v in ks:
        while stack and not (stack[-1] <= v < stack[-1] + sz[stack[-1]]):
            stack.pop()
        if stack:
            a = stack[-1]
            ends.append((a, v, dep[v] - dep[a]))
        else:
            orphans.append(v)
        stack.append(v)
    if not key_vertex[top]:
        if len(orphans) != 2:
            raise AssertionError("unmarked top of the spanning subtree must have two branches")
        a, b = orphans
        ends.append((a, b, dep[a] + dep[b] - 2 * dep[top]))
    ends_arr = np.asarray(ends, dtype=np.int64).reshape(-1, 3)
    tu, tv, w = ends_arr[:, 0], ends_arr[:, 1], ends_arr[:, 2]
    return _finish_kernel(tree_class[ks], tree_class[tu], tree_class[tv], tu, tv, w, np.zeros_like(w))


def _subtree_sizes_from_depth(parent: np.ndarray, depth: np.ndarray) -> np.ndarray:
    size = np.ones(parent.shape[0], dtype=np.int64)
    order = np.argsort(-depth, kind="stable")
    d_sorted = depth[order]
    bounds = np.flatnonzero(np.diff(d_sorted)) + 1
    for chunk in np.split(order, bounds):
        chunk = chunk[chunk > 0]
        if chunk.size:
            np.add.at(size, parent[chunk], size[chunk])
    return size


def kernelize(G: UnderlyingGraph, backend: str | None = None) -> Kernel:
    """Prune leaves and contract degree-2 vertices.

    ``backend`` is ``"numba"`` (generic pruning on the class graph) or
    ``"numpy"`` (spanning-subtree construction); default follows the
    ``UNICELL_DISABLE_NUMBA`` flag.
    """
    if backend is None:
        backend = "numba" if HAS_NUMBA else "numpy"
    if G.n_edges == 0:
        return _empty_kernel()
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is disabled")
        ec, et = G.edge_class, G.edge_tree
        out = _kernelize_kernel(
            G.n_vertices,
            np.ascontiguousarray(ec[:, 0]),
            np.ascontiguousarray(ec[:, 1]),
            np.ascontiguousarray(et[:, 0]),
            np.ascontiguousarray(et[:, 1]),
        )
        return _finish_kernel(*out)
    if backend == "numpy":
        return _kernelize_steiner(G)
    raise ValueError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# Diameter (exploratory)
# ---------------------------------------------------------------------------


@njit
def _bfs_ecc(start, nbr, src):
    nv = start.shape[0] - 1
    dist = np.full(nv, -1, dtype=np.int64)
    queue = np.empty(nv, dtype=np.int64)
    dist[src] = 0
    queue[0] = src
    qh, qt = 0, 1
    far = src
    while qh < qt:
        u = queue[qh]
        qh += 1
        for i in range(start[u], start[u + 1]):
            w = nbr[i]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue[qt] = w
                qt += 1
                far = w
    return dist[far], far


@njit
def _all_ecc(start, nbr):
    nv = start.shape[0] - 1
    best = 0
    for s in range(nv):
        e, _ = _bfs_ecc(start, nbr, s)
        if e > best:
            best = e
    return best


def _csr(G: UnderlyingGraph):
    adj = G._adjacency()
    adj = (adj + adj.T).tocsr()
    adj.setdiag(0)
    adj.eliminate_zeros()
    return adj


@dataclass(frozen=True)
class DiameterEstimate:
    value: int
    exact: bool  # False: value is a certified lower bound


def diameter_estimate(G: UnderlyingGraph, mode: str = "exact") -> DiameterEstimate:
    """Graph diameter; ``"double-sweep"`` returns a lower bound from two BFS passes."""
    if G.n_vertices == 1:
        return DiameterEstimate(0, True)
    adj = _csr(G)
    start = adj.indptr.astype(np.int64)
    nbr = adj.indices.astype(np.int64)
    if mode == "exact":
        if G.n_edges > EXACT_DIAMETER_GUARD:
            raise ValueError("exact diameter is limited to 10^5 edges")
        if HAS_NUMBA:
            return DiameterEstimate(int(_all_ecc(start, nbr)), True)
        dist = shortest_path(adj, unweighted=True, directed=False)
        return DiameterEstimate(int(dist.max()), True)
    if mode == "double-sweep":
        if HAS_NUMBA:
            _, far = _bfs_ecc(start, nbr, 0)
            ecc, _ = _bfs_ecc(start, nbr, far)
        else:
            d0 = shortest_path(adj, unweighted=True, indices=0)
            far = int(np.argmax(d0))
            ecc = shortest_path(adj, unweighted=True, indices=far).max()
        return DiameterEstimate(int(ecc), False)
    raise ValueError(f"unknown mode {mode!r}")


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh)
