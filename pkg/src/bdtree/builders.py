"""Tree constructions on weighted complete graphs.

Every builder takes a weight *source*: an :class:`EdgeOracle`, a
:class:`SplitOracle` or a small explicit instance. Sources expose ``n``,
``weight(u, v)``, ``weights(us, vs)`` and ``min_to_set(cands, frontier)``.
"""
from __future__ import annotations

import math
import warnings
from collections import deque
from itertools import combinations

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, dijkstra

from . import kernels
from .errors import ConstructionError, DomainError
from .graph_model import (LIGHT_STREAM, Distribution, EdgeOracle, SplitOracle,
                          split_weights)
from .level_sequences import (CostParams, IntegerLevelSequence, integerize,
                              optimal_level_sequence)
from .trees import Forest, RootedTree, reroot

EXACT_STEINER_MAX_N = 14
EXACT_STEINER_MAX_TERMINALS = 10
METRIC_CLOSURE_MAX_N = 2000


def _root_tuple(root_spec) -> tuple:
    if np.isscalar(root_spec):
        return (int(root_spec),)
    root = tuple(int(r) for r in root_spec)
    if len(root) not in (1, 2) or (len(root) == 2 and root[0] == root[1]):
        raise DomainError(f"root must be a vertex or an edge, got {root_spec}")
    return root


def meta_depth_for(n: int) -> int:
    """Depth ``floor(log2 ln n)`` of the splice meta-tree."""
    return max(1, int(math.floor(math.log2(math.log(n)))))


# greedy level-by-level tree -----------------------------------------------------

def greedy_tree(source, n: int, terminals, levels: IntegerLevelSequence, root_spec) -> RootedTree:
    """Greedy tree with prescribed level sizes.

    Level ``i < k`` takes the ``levels[i]`` unchosen vertices whose lightest
    edge into level ``i - 1`` is lightest; terminals still outside the tree
    then attach at level ``k`` by their own lightest edge into level ``k - 1``.
    Equal keys are ordered by vertex id.
    """
    root = _root_tuple(root_spec)
    sizes = levels.sizes
    k = len(sizes) - 1
    if sizes[0] != len(root):
        raise DomainError(f"level 0 has size {sizes[0]} but the root has {len(root)} vertices")
    terminals = np.unique(np.asarray(list(terminals) if not isinstance(terminals, np.ndarray) else terminals,
                                     dtype=np.int64))
    if terminals.size and (terminals[0] < 0 or terminals[-1] >= n):
        raise DomainError("terminals must lie in [0, n)")
    if any(not (0 <= r < n) for r in root):
        raise DomainError(f"root {root} outside [0, {n})")
    if sum(sizes[:k]) > n:
        raise DomainError(f"level sizes {sizes[:k]} need more than n = {n} vertices")

    in_tree = np.zeros(n, dtype=bool)
    par = np.full(n, -1, dtype=np.int64)
    wt = np.zeros(n)
    lvl = np.full(n, -1, dtype=np.int64)
    r = np.asarray(root, dtype=np.int64)
    in_tree[r] = True
    lvl[r] = 0
    frontier = r

    if k == 0:
        if np.any(~in_tree[terminals]):
            raise DomainError("depth 0 cannot reach terminals outside the root")
    for i in range(1, k):
        want = sizes[i]
        cands = np.flatnonzero(~in_tree)
        if want == 0 or cands.size == 0 or frontier.size == 0:
            frontier = np.empty(0, dtype=np.int64)
            continue
        w, arg = source.min_to_set(cands, frontier)
        pick = np.argsort(w, kind="stable")[:min(want, cands.size)]
        chosen = cands[pick]
        in_tree[chosen] = True
        par[chosen] = frontier[arg[pick]]
        wt[chosen] = w[pick]
        lvl[chosen] = i
        frontier = chosen
    if k >= 1:
        rest = terminals[~in_tree[terminals]]
        if rest.size:
            if frontier.size == 0:
                raise DomainError("level k - 1 is empty but terminals remain")
            w, arg = source.min_to_set(rest, frontier)
            in_tree[rest] = True
            par[rest] = frontier[arg]
            wt[rest] = w
            lvl[rest] = k

    verts = np.flatnonzero(in_tree)
    rew = source.weight(root[0], root[1]) if len(root) == 2 else 0.0
    return RootedTree(verts, par[verts], wt[verts], lvl[verts], root, rew,
                      info={"builder": "greedy", "levels": tuple(sizes)})


def greedy_levels(n: int, m: int, k: int, l0: int = 1) -> IntegerLevelSequence:
    """Integer level sizes from the optimal real sequence with ``c = 2n/m``."""
    seq = optimal_level_sequence(CostParams(n, m), k, l0, m)
    return integerize(seq, n, m)


def lightest_incident_edge(source, n: int, v: int = 0) -> tuple:
    """Root edge for odd-diameter trees: the lightest edge at ``v``."""
    others = np.delete(np.arange(n, dtype=np.int64), v)
    w = source.weights(np.full(others.size, v), others)
    return (v, int(others[int(np.argmin(w))]))


# minimum spanning trees -------------------------------------------------------------

def _levels_from_order(parent, order):
    lvl = np.zeros(parent.size, dtype=np.int64)
    par = parent.tolist()
    out = lvl.tolist()
    for v in order.tolist()[1:]:
        out[v] = out[par[v]] + 1
    return np.asarray(out, dtype=np.int64)


def weight_matrix(source, vertices=None) -> np.ndarray:
    """Dense weights among ``vertices`` (default all); diagonal is ``inf``."""
    if vertices is None:
        vertices = np.arange(source.n, dtype=np.int64)
    vertices = np.asarray(vertices, dtype=np.int64)
    mat = getattr(source, "matrix", None)
    if mat is not None:
        M = np.array(mat[np.ix_(vertices, vertices)], dtype=np.float64)
    else:
        s = vertices.size
        iu, iv = np.triu_indices(s, 1)
        M = np.zeros((s, s))
        w = source.weights(vertices[iu], vertices[iv])
        M[iu, iv] = w
        M[iv, iu] = w
    np.fill_diagonal(M, np.inf)
    return M


def dense_prim(M: np.ndarray):
    """Prim from index 0 on a dense matrix; same tie rule as the kernels.

    Returns ``(parent, weight, order)`` in local indices.
    """
    s = M.shape[0]
    parent = np.full(s, -1, dtype=np.int64)
    weight = np.zeros(s)
    order = np.empty(s, dtype=np.int64)
    if s == 0:
        return parent, weight, order
    key = np.full(s, np.inf)
    done = np.zeros(s, dtype=bool)
    cur = 0
    done[0] = True
    order[0] = 0
    for step in range(1, s):
        row = M[cur]
        better = (row < key) & ~done
        key[better] = row[better]
        parent[better] = cur
        masked = np.where(done, np.inf, key)
        cur = int(np.argmin(masked))
        if parent[cur] < 0:
            # every remaining edge is infinite; hang it off the root
            parent[cur] = 0
        done[cur] = True
        weight[cur] = key[cur]
        order[step] = cur
    return parent, weight, order


def prim_mst(source, n: int | None = None) -> RootedTree:
    """Exact MST of the complete graph, rooted at vertex 0."""
    if n is None:
        n = source.n
    if n < 1:
        raise DomainError("need n >= 1")
    if n == 1:
        return RootedTree([0], [-1], [0.0], [0], (0,), info={"builder": "mst"})
    if isinstance(source, EdgeOracle):
        parent, score, order = kernels.prim_uniform(source.key, n)
        weight = np.asarray(source.dist.from_uniform(score), dtype=np.float64)
        weight[0] = 0.0
    elif isinstance(source, SplitOracle) and source.light.dist.kind == "exp" and source.heavy.dist.kind == "exp":
        parent, weight, order = kernels.prim_split(source.light.key, source.light.dist.param,
                                                   source.heavy.key, source.heavy.dist.param, n)
    else:
        parent, weight, order = dense_prim(weight_matrix(source, np.arange(n)))
    level = _levels_from_order(parent, order)
    return RootedTree(np.arange(n), parent, weight, level, (0,), info={"builder": "mst"})


def kruskal_mst_weight(M: np.ndarray) -> float:
    """Reference MST weight by Kruskal with union-find (small dense input)."""
    s = M.shape[0]
    iu, iv = np.triu_indices(s, 1)
    w = M[iu, iv]
    order = np.lexsort((iv, iu, w))
    comp = list(range(s))

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    total, used = [], 0
    for e in order.tolist():
        a, b = find(int(iu[e])), find(int(iv[e]))
        if a != b:
            comp[a] = b
            total.append(float(w[e]))
            used += 1
            if used == s - 1:
                break
    return math.fsum(total)


# Steiner reference -------------------------------------------------------------------

def _tree_from_local(vertices, parent, weight, root_local, info):
    vertices = np.asarray(vertices, dtype=np.int64)
    child = parent >= 0
    return RootedTree.from_edges(vertices[child], vertices[parent[child]], weight[child],
                                 int(vertices[root_local]), vertices=vertices, info=info)


def _prune_leaves(u, v, w, keep):
    """Drop non-``keep`` leaves repeatedly; returns the surviving edges."""
    adj = {}
    for e, (a, b) in enumerate(zip(u.tolist(), v.tolist())):
        adj.setdefault(a, set()).add((b, e))
        adj.setdefault(b, set()).add((a, e))
    alive = np.ones(u.size, dtype=bool)
    keep = set(keep)
    q = deque(x for x, nb in adj.items() if len(nb) == 1 and x not in keep)
    while q:
        x = q.popleft()
        if x in keep or len(adj.get(x, ())) != 1:
            continue
        (y, e), = adj.pop(x)
        alive[e] = False
        adj[y].discard((x, e))
        if len(adj[y]) == 1 and y not in keep:
            q.append(y)
    return u[alive], v[alive], w[alive]


def steiner_reference(source, n: int, terminals) -> RootedTree:
    """Minimum Steiner tree for tiny instances, a heuristic otherwise.

    Exact (enumeration of non-terminal subsets plus MST) when there are at
    most 10 terminals and 14 vertices. Otherwise: metric-closure MST with
    paths unfolded, re-spanned and pruned for ``n <= 2000``; MST of the full
    graph with non-terminal leaves pruned beyond that. ``info["exact"]``
    records which case ran. The tree is rooted at the smallest terminal.
    """
    T = np.unique(np.asarray(list(terminals) if not isinstance(terminals, np.ndarray) else terminals,
                             dtype=np.int64))
    if T.size == 0:
        raise DomainError("terminal set is empty")
    if T[0] < 0 or T[-1] >= n:
        raise DomainError("terminals must lie in [0, n)")
    root = int(T[0])
    if T.size == 1:
        return RootedTree([root], [-1], [0.0], [0], (root,), info={"builder": "steiner", "exact": True})
    if T.size == n:
        t = prim_mst(source, n)
        t.info.update(builder="steiner", exact=True)
        return reroot(t, root) if root != 0 else t

    if n <= EXACT_STEINER_MAX_N and T.size <= EXACT_STEINER_MAX_TERMINALS:
        M = weight_matrix(source, np.arange(n))
        others = np.setdiff1d(np.arange(n), T)
        best, best_set = math.inf, None
        for r in range(others.size + 1):
            for extra in combinations(others.tolist(), r):
                vs = np.sort(np.concatenate([T, np.asarray(extra, dtype=np.int64)]))
                _, w, _ = dense_prim(M[np.ix_(vs, vs)])
                tot = math.fsum(w.tolist())
                if tot < best:
                    best, best_set = tot, vs
        vs = best_set
        parent, w, _ = dense_prim(M[np.ix_(vs, vs)])
        t = _tree_from_local(vs, parent, w, 0, {"builder": "steiner", "exact": True})
        return reroot(t, root) if t.root[0] != root else t

    if n <= METRIC_CLOSURE_MAX_N:
        M = weight_matrix(source, np.arange(n))
        g = csgraph_from_dense(M, null_value=np.inf)
        dist, pred = dijkstra(g, directed=False, indices=T, return_predecessors=True)
        closure = dist[:, T]
        np.fill_diagonal(closure, np.inf)
        cpar, _, _ = dense_prim(closure)
        used = set(T.tolist())
        for i in range(1, T.size):
            j = int(cpar[i])
            # walk the shortest path from T[i] back to source T[j]
            x = int(T[i])
            while x != int(T[j]):
                used.add(x)
                x = int(pred[j, x])
        vs = np.asarray(sorted(used), dtype=np.int64)
        parent, w, _ = dense_prim(M[np.ix_(vs, vs)])
        child = parent >= 0
        u, v, w = _prune_leaves(vs[child], vs[parent[child]], w[child], T.tolist())
        info = {"builder": "steiner", "exact": False, "method": "metric-closure"}
    else:
        t = prim_mst(source, n)
        u, v, w = _prune_leaves(*t.edges(), T.tolist())
        info = {"builder": "steiner", "exact": False, "method": "mst-prune"}
    return RootedTree.from_edges(u, v, w, root, info=info)


# slice and splice -----------------------------------------------------------------------

def _component_far(adj, src):
    """BFS over a dict-of-sets adjacency; returns (farthest, pred, seen order)."""
    pred = {src: -1}
    q = [src]
    for x in q:
        for y in adj[x]:
            if y not in pred:
                pred[y] = x
                q.append(y)
    return q[-1], pred, q


def _piece_tree(adj, wmap, center):
    """Tree on the component of ``center``, rooted there, by plain BFS."""
    par = {center: -1}
    lvl = {center: 0}
    q = [center]
    for x in q:
        for y in adj[x]:
            if y not in par:
                par[y] = x
                lvl[y] = lvl[x] + 1
                q.append(y)
    vs = sorted(q)
    w = [0.0 if par[x] < 0 else wmap[(x, par[x]) if x < par[x] else (par[x], x)] for x in vs]
    return RootedTree(vs, [par[x] for x in vs], w, [lvl[x] for x in vs], (center,))


def slice_tree(tree: RootedTree, delta: int):
    """Cut middle edges of longest paths until every piece has diameter <= ``delta``.

    Returns ``(forest, removed)`` where ``removed`` lists the cut edges as
    ``(u, v, w)``. Each piece is rooted at its center vertex (first endpoint
    of the center edge for odd diameter).
    """
    if delta < 2:
        raise DomainError(f"slice needs delta >= 2, got {delta}")
    u, v, w = tree.all_edges()
    adj = {int(x): set() for x in tree.vertices.tolist()}
    wmap = {}
    for a, b, x in zip(u.tolist(), v.tolist(), w.tolist()):
        adj[a].add(b)
        adj[b].add(a)
        wmap[(a, b) if a < b else (b, a)] = x
    removed = []
    pieces = []
    work = [int(tree.vertices[0])]
    while work:
        start = work.pop()
        a, _, _ = _component_far(adj, start)
        b, pred, comp = _component_far(adj, a)
        path = [b]
        while path[-1] != a:
            path.append(pred[path[-1]])
        if path[0] > path[-1]:
            path.reverse()
        L = len(path) - 1
        h = L // 2
        if L <= delta:
            pieces.append((min(comp), path[h], L))
            continue
        x, y = path[h], path[h + 1]
        adj[x].discard(y)
        adj[y].discard(x)
        key = (x, y) if x < y else (y, x)
        removed.append((x, y, wmap.pop(key)))
        work.append(x)
        work.append(y)

    subtrees = []
    for _, center, L in sorted(pieces):
        t = _piece_tree(adj, wmap, center)
        t.__dict__["diameter"] = L
        subtrees.append(t)
    return Forest(subtrees), removed


def slice(tree: RootedTree, delta: int) -> Forest:  # noqa: A001 - name fixed by the interface
    return slice_tree(tree, delta)[0]


def meta_levels(n_meta: int, meta_depth: int) -> IntegerLevelSequence:
    seq = optimal_level_sequence(CostParams(n_meta, n_meta, c=2.0), meta_depth, 1, n_meta)
    return integerize(seq, n_meta, n_meta)


def splice(forest: Forest, heavy, n: int, meta_depth: int):
    """Join the subtrees of ``forest`` by a greedy meta-tree of depth ``meta_depth``.

    Subtree 0 is the meta-root, marked at its own root. At each meta-level,
    an unattached subtree costs the lightest ``heavy`` edge from a marked
    vertex of the previous meta-level to any of its vertices; the receiving
    vertex becomes its mark. Returns ``(tree, S)`` with ``S`` the total
    splice-edge weight; ``forest.marked`` is filled in.
    """
    if len(forest) == 0:
        raise DomainError("cannot splice an empty forest")
    if meta_depth < 1:
        raise DomainError(f"meta_depth must be >= 1, got {meta_depth}")
    N = len(forest)
    subs = forest.subtrees
    forest.marked = {0: subs[0].root[0]}
    if N == 1:
        return subs[0], 0.0
    levels = meta_levels(N, meta_depth).sizes

    attached = np.zeros(N, dtype=bool)
    attached[0] = True
    frontier_subs = np.asarray([0])
    su, sv, sw = [], [], []
    owner = np.concatenate([np.full(t.n_vertices, i, dtype=np.int64) for i, t in enumerate(subs)])
    allv = np.concatenate([t.vertices for t in subs])
    for lev in range(1, meta_depth + 1):
        free = np.flatnonzero(~attached)
        if free.size == 0:
            break
        last = lev == meta_depth
        want = free.size if last else min(levels[lev], free.size)
        if want == 0:
            continue
        if frontier_subs.size == 0:
            raise DomainError("meta-level sizes leave an empty frontier")
        marks = np.asarray([forest.marked[int(i)] for i in frontier_subs], dtype=np.int64)
        mask = ~attached[owner]
        cv, co = allv[mask], owner[mask]
        w, arg = heavy.min_to_set(cv, marks)
        # cheapest vertex per free subtree (co is grouped by subtree)
        starts = np.flatnonzero(np.r_[True, co[1:] != co[:-1]])
        best = np.minimum.reduceat(w, starts)
        # first position attaining the group minimum
        pos = np.empty(starts.size, dtype=np.int64)
        ends = np.r_[starts[1:], co.size]
        for g, (s0, e0) in enumerate(zip(starts.tolist(), ends.tolist())):
            pos[g] = s0 + int(np.argmin(w[s0:e0]))
        pick = np.argsort(best, kind="stable")[:want]
        for g in pick.tolist():
            p = pos[g]
            sub = int(co[p])
            recv = int(cv[p])
            su.append(int(marks[arg[p]]))
            sv.append(recv)
            sw.append(float(w[p]))
            attached[sub] = True
            forest.marked[sub] = recv
        frontier_subs = co[pos[pick]]

    if not attached.all():
        raise ConstructionError("meta-tree left subtrees unattached")
    eu, ev, ew = [su], [sv], [sw]
    for t in subs:
        a, b, c = t.all_edges()
        eu.append(a)
        ev.append(b)
        ew.append(c)
    S = math.fsum(sw)
    tree = RootedTree.from_edges(np.concatenate(eu), np.concatenate(ev), np.concatenate(ew),
                                 forest.marked[0], vertices=allv,
                                 info={"builder": "splice", "splice_weight": S, "meta_depth": meta_depth})
    return tree, S


def sliced_and_spliced(seed: int, n: int, terminals=None, k: int | None = None, delta: int = 4,
                       epsilon="auto", meta_depth: int | None = None):
    """Bounded-depth tree from a light-stream MST (or Steiner tree) by slice and splice.

    Returns ``(tree, diagnostics)``. The tree's edge weights are the
    combined weights ``min(light, heavy)``, i.e. the original Exp(1) graph.
    """
    if delta < 2:
        raise DomainError(f"delta must be >= 2, got {delta}")
    if meta_depth is None:
        meta_depth = meta_depth_for(n)
    if k is None:
        k = meta_depth + delta
    if k < meta_depth + delta:
        warnings.warn(f"depth bound k={k} is below meta_depth + delta = {meta_depth + delta}", stacklevel=2)
    spanning = terminals is None or len(terminals) == n

    unit = EdgeOracle(n, seed, LIGHT_STREAM, Distribution.exponential(1.0))
    base = prim_mst(unit, n) if spanning else steiner_reference(unit, n, terminals)
    x_hat = base.weight
    if epsilon == "auto":
        eps = min(0.5, 1.0 / math.sqrt(max(x_hat, 1e-300) * delta))
    else:
        eps = float(epsilon)
    split = split_weights(seed, n, eps)
    # light stream is the unit stream divided by 1 - eps: same tree, rescaled
    light = RootedTree(base.vertices, base.parent, base.weight_to_parent / (1.0 - eps), base.level,
                       base.root, base.root_edge_weight / (1.0 - eps), base.info)
    forest, removed = slice_tree(light, delta)
    spliced, S = splice(forest, split.heavy, n, meta_depth)

    u, v, _ = spliced.edges()
    comb = split.weights(u, v)
    tree = RootedTree(spliced.vertices, spliced.parent, np.zeros(spliced.n_vertices), spliced.level,
                      spliced.root, 0.0, spliced.info)
    tree.weight_to_parent[tree.parent >= 0] = comb
    tree.info.update(builder="slice-splice")
    if tree.depth > k:
        raise ConstructionError(f"slice-and-splice depth {tree.depth} exceeds k = {k} (seed {seed})")
    diag = {
        "epsilon": eps,
        "base_weight_unit": x_hat,
        "light_weight": light.weight,
        "removed_weight": math.fsum(x for _, _, x in removed),
        "splice_weight": S,
        "n_subtrees": len(forest),
        "meta_depth": meta_depth,
        "max_subtree_diameter": max(t.diameter for t in forest.subtrees),
        "base_exact": bool(base.info.get("exact", True)),
    }
    return tree, diag
