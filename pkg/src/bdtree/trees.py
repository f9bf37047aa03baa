"""Rooted trees over a subset of vertex ids, plus depth/diameter metrics.

A tree is rooted either at one vertex or at an edge ``(u, v)``; in the
latter case both endpoints sit at level 0 and the root edge weight is kept
separately. Storage is a set of parallel arrays sorted by vertex id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .errors import DomainError


class RootedTree:
    def __init__(self, vertices, parent, weight, level, root, root_edge_weight=0.0, info=None):
        self.vertices = np.asarray(vertices, dtype=np.int64)
        self.parent = np.asarray(parent, dtype=np.int64)
        self.weight_to_parent = np.asarray(weight, dtype=np.float64)
        self.level = np.asarray(level, dtype=np.int64)
        self.root = tuple(int(r) for r in root)
        self.root_edge_weight = float(root_edge_weight)
        self.info = dict(info or {})
        if len(self.root) not in (1, 2):
            raise DomainError("root must be one vertex or one edge")

    # construction ---------------------------------------------------------

    @classmethod
    def from_edges(cls, edges_u, edges_v, edges_w, root, root_edge_weight=0.0, vertices=None, info=None):
        """Orient an undirected edge list away from ``root``.

        ``root`` is a vertex id or a pair; for a pair the root edge must not
        appear in the edge list. Raises if the edges do not form a tree
        spanning ``vertices`` (default: every endpoint plus the root).
        """
        if np.isscalar(root):
            root = (int(root),)
        root = tuple(int(r) for r in root)
        eu = np.asarray(edges_u, dtype=np.int64)
        ev = np.asarray(edges_v, dtype=np.int64)
        ew = np.asarray(edges_w, dtype=np.float64)
        if vertices is None:
            vertices = np.unique(np.concatenate([eu, ev, np.asarray(root, dtype=np.int64)]))
        else:
            vertices = np.unique(np.asarray(vertices, dtype=np.int64))
        nv = vertices.size
        if eu.size != nv - len(root):
            raise DomainError(f"{eu.size} edges cannot form a tree on {nv} vertices with root {root}")
        iu = np.searchsorted(vertices, eu)
        iv = np.searchsorted(vertices, ev)
        ir = np.searchsorted(vertices, np.asarray(root, dtype=np.int64))
        for ids, src in ((iu, eu), (iv, ev), (ir, np.asarray(root))):
            if ids.size and (ids.max() >= nv or np.any(vertices[np.minimum(ids, nv - 1)] != src)):
                raise DomainError("edge endpoint outside the vertex set")
        # virtual super-root nv joined to every root vertex
        rows = np.concatenate([iu, iv, np.full(len(root), nv)])
        cols = np.concatenate([iv, iu, ir])
        g = csr_matrix((np.ones(rows.size), (rows, cols)), shape=(nv + 1, nv + 1))
        order, pred = breadth_first_order(g, nv, directed=True, return_predecessors=True)
        if order.size != nv + 1:
            raise DomainError("edges do not connect every vertex to the root")
        level = np.empty(nv + 1, dtype=np.int64)
        level[nv] = -1
        for i in order[1:]:
            level[i] = level[pred[i]] + 1
        level = level[:nv]
        par_idx = pred[:nv]
        parent = np.where(par_idx == nv, -1, vertices[np.minimum(par_idx, nv - 1)])
        # each edge belongs to whichever endpoint has the other as parent
        child = np.where(par_idx[iv] == iu, iv, iu)
        weight = np.zeros(nv)
        weight[child] = ew
        return cls(vertices, parent, weight, level, root, root_edge_weight, info)

    @classmethod
    def from_parent(cls, vertices, parent, weight, root, root_edge_weight=0.0, info=None):
        """Build from a parent map (``-1`` for root vertices)."""
        vertices = np.asarray(vertices, dtype=np.int64)
        parent = np.asarray(parent, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        child = parent >= 0
        return cls.from_edges(vertices[child], parent[child], weight[child], root,
                              root_edge_weight, vertices=vertices, info=info)

    # basic accessors -------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.size)

    @property
    def k(self) -> int:
        return self.depth

    @property
    def is_edge_rooted(self) -> bool:
        return len(self.root) == 2

    def index_of(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        idx = np.searchsorted(self.vertices, v)
        if np.any(idx >= self.vertices.size) or np.any(self.vertices[np.minimum(idx, self.vertices.size - 1)] != v):
            raise DomainError(f"vertex not in tree: {v}")
        return idx

    def __contains__(self, v) -> bool:
        i = np.searchsorted(self.vertices, v)
        return bool(i < self.vertices.size and self.vertices[i] == v)

    def edges(self):
        """``(child, parent, weight)`` arrays; the root edge is not included."""
        m = self.parent >= 0
        return self.vertices[m], self.parent[m], self.weight_to_parent[m]

    def all_edges(self):
        """Every tree edge including the root edge, as ``(u, v, w)`` arrays."""
        u, v, w = self.edges()
        if self.is_edge_rooted:
            u = np.append(u, self.root[0])
            v = np.append(v, self.root[1])
            w = np.append(w, self.root_edge_weight)
        return u, v, w

    @cached_property
    def weight(self) -> float:
        # one correctly rounded sum, so equal edge multisets give equal weights
        return math.fsum(self.weight_to_parent.tolist() + [self.root_edge_weight])

    @cached_property
    def depth(self) -> int:
        return int(self.level.max()) if self.level.size else 0

    @cached_property
    def diameter(self) -> int:
        return len(longest_path(self)) - 1

    def level_weights(self) -> np.ndarray:
        """Weight contributed by each level; the root edge counts at level 0."""
        out = np.zeros(self.depth + 1)
        np.add.at(out, self.level, self.weight_to_parent)
        out[0] += self.root_edge_weight
        return out

    def edge_count(self) -> int:
        return self.n_vertices - 1

    def __repr__(self):
        return (f"RootedTree(n_vertices={self.n_vertices}, root={self.root}, "
                f"weight={self.weight:.6g}, depth={self.depth})")


@dataclass
class Forest:
    subtrees: list
    marked: dict = field(default_factory=dict)

    def __post_init__(self):
        seen = 0
        total = 0
        for t in self.subtrees:
            total += t.n_vertices
        if self.subtrees:
            seen = np.unique(np.concatenate([t.vertices for t in self.subtrees])).size
        if seen != total:
            raise DomainError("forest subtrees share vertices")
        for i, v in self.marked.items():
            if v not in self.subtrees[i]:
                raise DomainError(f"marked vertex {v} is not in subtree {i}")

    def __len__(self):
        return len(self.subtrees)

    @property
    def weight(self) -> float:
        return math.fsum(t.weight for t in self.subtrees)

    @property
    def n_vertices(self) -> int:
        return sum(t.n_vertices for t in self.subtrees)


def _adjacency(tree: RootedTree) -> csr_matrix:
    u, v, _ = tree.all_edges()
    iu, iv = tree.index_of(u), tree.index_of(v)
    nv = tree.n_vertices
    return csr_matrix((np.ones(2 * iu.size), (np.concatenate([iu, iv]), np.concatenate([iv, iu]))),
                      shape=(nv, nv))


def _bfs_far(g, src):
    order, pred = breadth_first_order(g, src, directed=True, return_predecessors=True)
    dist = np.zeros(g.shape[0], dtype=np.int64)
    for i in order[1:]:
        dist[i] = dist[pred[i]] + 1
    # farthest vertex, smallest index among ties
    far = int(np.flatnonzero(dist == dist.max())[0])
    return far, pred


def longest_path(tree: RootedTree) -> list[int]:
    """A maximum-length path (vertex ids) found by double BFS.

    The path is oriented to start at its smaller endpoint.
    """
    if tree.n_vertices == 1:
        return [int(tree.vertices[0])]
    g = _adjacency(tree)
    a, _ = _bfs_far(g, 0)
    b, pred = _bfs_far(g, a)
    path = [b]
    while path[-1] != a:
        path.append(int(pred[path[-1]]))
    ids = tree.vertices[np.asarray(path)].tolist()
    if ids[0] > ids[-1]:
        ids.reverse()
    return ids


def tree_depth(tree: RootedTree) -> int:
    return tree.depth


def tree_diameter(tree: RootedTree) -> int:
    return tree.diameter


def find_center(tree: RootedTree) -> tuple:
    """Central vertex ``(v,)`` for even diameter, central edge ``(u, v)`` for odd."""
    path = longest_path(tree)
    L = len(path) - 1
    h = L // 2
    if L % 2 == 0:
        return (path[h],)
    return (path[h], path[h + 1])


def reroot(tree: RootedTree, root) -> RootedTree:
    """Same edge set, re-oriented from a new root vertex or root edge."""
    u, v, w = tree.all_edges()
    if np.isscalar(root):
        root = (int(root),)
    root = tuple(int(r) for r in root)
    rew = 0.0
    if len(root) == 2:
        a, b = root
        hit = ((u == a) & (v == b)) | ((u == b) & (v == a))
        if not hit.any():
            raise DomainError(f"{root} is not an edge of the tree")
        j = int(np.flatnonzero(hit)[0])
        rew = float(w[j])
        keep = ~hit
        u, v, w = u[keep], v[keep], w[keep]
    return RootedTree.from_edges(u, v, w, root, rew, vertices=tree.vertices, info=tree.info)


def level_sizes(tree: RootedTree) -> np.ndarray:
    return np.bincount(tree.level, minlength=tree.depth + 1)


def heavy_edge_count(tree: RootedTree, eps: float) -> int:
    """Number of tree edges (root edge included) heavier than ``eps``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    _, _, w = tree.all_edges()
    return int(np.count_nonzero(w > eps))


# text format -----------------------------------------------------------------

def dumps_tree(tree: RootedTree) -> str:
    if tree.is_edge_rooted:
        lines = [f"root-edge {tree.root[0]} {tree.root[1]} {tree.root_edge_weight!r}"]
    else:
        lines = [f"root {tree.root[0]}"]
    c, p, w = tree.edges()
    lines.extend(f"{a} {b} {x!r}" for a, b, x in zip(c.tolist(), p.tolist(), w.tolist()))
    return "\n".join(lines) + "\n"


def loads_tree(text: str) -> RootedTree:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise DomainError("empty tree text")
    head = rows[0]
    if head[0] == "root" and len(head) == 2:
        root, rew = (int(head[1]),), 0.0
    elif head[0] == "root-edge" and len(head) == 4:
        root, rew = (int(head[1]), int(head[2])), float(head[3])
    else:
        raise DomainError(f"bad tree header: {' '.join(head)}")
    body = rows[1:]
    if any(len(r) != 3 for r in body):
        raise DomainError("tree lines must read 'child parent weight'")
    c = [int(r[0]) for r in body]
    p = [int(r[1]) for r in body]
    w = [float(r[2]) for r in body]
    return RootedTree.from_edges(c, p, w, root, rew)


def save_tree(tree: RootedTree, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_tree(tree))


def load_tree(path) -> RootedTree:
    with open(path) as fh:
        return loads_tree(fh.read())
