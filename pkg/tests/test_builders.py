import itertools
import math
import warnings

import networkx as nx
import numpy as np
import pytest
from conftest import random_instance
from hypothesis import given, settings
from hypothesis import strategies as st

from bdtree import builders
from bdtree.builders import (greedy_levels, greedy_tree, kruskal_mst_weight, lightest_incident_edge,
                             meta_depth_for, prim_mst, slice, slice_tree, splice, steiner_reference,
                             sliced_and_spliced, weight_matrix)
from bdtree.errors import ConstructionError, DomainError
from bdtree.exact import DenseInstance
from bdtree.graph_model import Distribution, EdgeOracle, split_weights
from bdtree.level_sequences import IntegerLevelSequence, predicted_weight_depth
from bdtree.trees import Forest, RootedTree, heavy_edge_count, level_sizes


def nx_graph(M):
    g = nx.Graph()
    s = M.shape[0]
    g.add_nodes_from(range(s))
    for a, b in itertools.combinations(range(s), 2):
        if np.isfinite(M[a, b]):
            g.add_edge(a, b, weight=float(M[a, b]))
    return g


def nx_mst_weight(M):
    return math.fsum(d["weight"] for _, _, d in nx.minimum_spanning_edges(nx_graph(M), data=True))


def edge_set(t):
    u, v, _ = t.all_edges()
    return {tuple(sorted(e)) for e in zip(u.tolist(), v.tolist())}


# greedy ----------------------------------------------------------------------

def test_greedy_four_vertex(four):
    t = greedy_tree(four, 4, range(4), IntegerLevelSequence((1, 1, 2)), 0)
    assert edge_set(t) == {(0, 1), (1, 2), (1, 3)}
    assert t.weight == pytest.approx(1.1, abs=1e-15)
    assert list(level_sizes(t)) == [1, 1, 2]


def test_greedy_star():
    o = EdgeOracle(50, 3)
    t = greedy_tree(o, 50, range(50), IntegerLevelSequence((1, 49)), 7)
    assert t.depth == 1 and t.n_vertices == 50
    others = np.delete(np.arange(50), 7)
    assert t.weight == pytest.approx(math.fsum(o.weights(np.full(49, 7), others).tolist()), rel=1e-14)


def test_greedy_root_only():
    t = greedy_tree(EdgeOracle(20, 1), 20, [4], IntegerLevelSequence((1, 1)), 4)
    assert t.n_vertices == 1 and t.weight == 0


def test_greedy_errors():
    o = EdgeOracle(10, 0)
    with pytest.raises(DomainError):
        greedy_tree(o, 10, range(10), IntegerLevelSequence((1, 6, 6, 3)), 0)
    with pytest.raises(DomainError):
        greedy_tree(o, 10, range(10), IntegerLevelSequence((1,)), 0)
    with pytest.raises(DomainError):
        greedy_tree(o, 10, range(10), IntegerLevelSequence((2, 8)), 0)
    with pytest.raises(DomainError):
        greedy_tree(o, 10, [11], IntegerLevelSequence((1, 3)), 0)


@pytest.mark.parametrize("n,m,k,root", [(400, 400, 3, 0), (500, 120, 2, 9), (300, 300, 2, (0, 5)),
                                        (60, 60, 4, 2)])
def test_greedy_replay(n, m, k, root):
    o = EdgeOracle(n, 11)
    l0 = 2 if isinstance(root, tuple) else 1
    levels = greedy_levels(n, m, k, l0=l0)
    t = greedy_tree(o, n, range(m), levels, root)
    lv = dict(zip(t.vertices.tolist(), t.level.tolist()))
    par = dict(zip(t.vertices.tolist(), t.parent.tolist()))
    wt = dict(zip(t.vertices.tolist(), t.weight_to_parent.tolist()))
    by_level = [sorted(v for v in lv if lv[v] == i) for i in range(k + 1)]
    sizes = [len(x) for x in by_level]
    assert sizes[:k] == list(levels.sizes[:k])
    assert set(range(m)) <= set(lv)
    used = set(by_level[0])
    for i in range(1, k + 1):
        prev = np.asarray(by_level[i - 1])
        pool = [v for v in range(n) if v not in used]
        keys = {v: min(o.weight(v, u) for u in prev) for v in pool}
        for v in by_level[i]:
            assert wt[v] == keys[v] == o.weight(v, par[v])
            assert lv[par[v]] == i - 1
        if i < k:
            # chosen vertices carry the smallest keys of the pool
            chosen = max(keys[v] for v in by_level[i])
            rest = [keys[v] for v in pool if v not in set(by_level[i])]
            assert not rest or chosen <= min(rest)
        used |= set(by_level[i])


def test_greedy_odd_root_edge():
    o = EdgeOracle(200, 4)
    e = lightest_incident_edge(o, 200, 0)
    w = [o.weight(0, v) for v in range(1, 200)]
    assert e == (0, 1 + int(np.argmin(w)))
    t = greedy_tree(o, 200, range(200), greedy_levels(200, 200, 2, l0=2), e)
    assert t.is_edge_rooted and t.root_edge_weight == min(w)
    assert t.diameter <= 2 * 2 + 1


def test_greedy_matches_prediction_n1e4():
    n = 10_000
    ws = [greedy_tree(EdgeOracle(n, s), n, range(n), greedy_levels(n, n, 2), 0).weight for s in range(30)]
    r = np.mean(ws) / predicted_weight_depth(n, n, 2)
    assert 0.9 <= r <= 1.1


def test_greedy_no_heavy_edges():
    n = 10_000
    for s in range(30):
        t = greedy_tree(EdgeOracle(n, s), n, range(n), greedy_levels(n, n, 2), 0)
        assert heavy_edge_count(t, 0.1) == 0


def test_greedy_dominates_mst():
    for s in range(10):
        o = EdgeOracle(500, s)
        mst = prim_mst(o, 500).weight
        for k in (2, 3, 4):
            assert greedy_tree(o, 500, range(500), greedy_levels(500, 500, k), 0).weight >= mst


# minimum spanning trees ------------------------------------------------------------

def test_prim_triangle():
    M = np.array([[0, 0.1, 0.5], [0.1, 0, 0.9], [0.5, 0.9, 0]])
    assert prim_mst(DenseInstance(M)).weight == pytest.approx(0.6)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_prim_matches_kruskal_small(n):
    for s in range(20):
        inst = random_instance(n, s)
        t = prim_mst(inst)
        M = inst.matrix.copy()
        np.fill_diagonal(M, np.inf)
        assert t.weight == pytest.approx(kruskal_mst_weight(M), rel=1e-14, abs=1e-15)
        if n > 1:
            assert t.weight == pytest.approx(nx_mst_weight(M), rel=1e-14)


@pytest.mark.parametrize("dist", ["exp", "uniform", "trunc-high:0.2"])
def test_prim_oracle_matches_networkx(dist):
    o = EdgeOracle(150, 5, dist=Distribution.parse(dist))
    t = prim_mst(o, 150)
    M = weight_matrix(o)
    assert t.weight == pytest.approx(nx_mst_weight(M), rel=1e-12)
    assert t.n_vertices == 150 and t.root == (0,)


def test_prim_split_matches_networkx():
    s = split_weights(3, 200, 0.25)
    t = prim_mst(s, 200)
    assert t.weight == pytest.approx(nx_mst_weight(weight_matrix(s)), rel=1e-12)
    u, v, w = t.edges()
    assert np.allclose(w, s.weights(u, v), rtol=1e-14)


def test_mst_n4000_mean():
    mean = np.mean([prim_mst(EdgeOracle(4000, s), 4000).weight for s in range(20)])
    assert 1.166 <= mean <= 1.238


# Steiner --------------------------------------------------------------------------------

def brute_steiner(M, T):
    n = M.shape[0]
    others = [v for v in range(n) if v not in T]
    best = math.inf
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            vs = sorted(T) + list(extra)
            sub = M[np.ix_(vs, vs)]
            best = min(best, nx_mst_weight(sub))
    return best


def test_steiner_all_terminals_equals_mst():
    o = EdgeOracle(60, 2)
    assert steiner_reference(o, 60, range(60)).weight == pytest.approx(prim_mst(o, 60).weight, rel=1e-14)


def test_steiner_two_terminals_shortest_path(monkeypatch):
    for s in range(5):
        o = EdgeOracle(40, s)
        sp = nx.dijkstra_path_length(nx_graph(weight_matrix(o)), 3, 17)
        t = steiner_reference(o, 40, [3, 17])
        assert t.info["method"] == "metric-closure"
        assert t.weight == pytest.approx(sp, rel=1e-12)
        with monkeypatch.context() as mp:
            mp.setattr(builders, "METRIC_CLOSURE_MAX_N", 0)
            assert steiner_reference(o, 40, [3, 17]).weight >= sp - 1e-12
    inst = random_instance(9, 0)
    g = nx_graph(np.where(np.eye(9, dtype=bool), np.inf, inst.matrix))
    assert steiner_reference(inst, 9, [1, 6]).weight == pytest.approx(nx.dijkstra_path_length(g, 1, 6))


def test_steiner_exact_and_heuristic_n8(monkeypatch):
    for s in range(15):
        inst = random_instance(8, s)
        T = [0, 2, 5, 7]
        exact = steiner_reference(inst, 8, T)
        assert exact.info["exact"]
        M = inst.matrix.copy()
        np.fill_diagonal(M, np.inf)
        assert exact.weight == pytest.approx(brute_steiner(M, T), rel=1e-12)
        assert set(T) <= set(exact.vertices.tolist())
        with monkeypatch.context() as mp:
            mp.setattr(builders, "EXACT_STEINER_MAX_N", 0)
            heur = steiner_reference(inst, 8, T)
            mp.setattr(builders, "METRIC_CLOSURE_MAX_N", 0)
            prune = steiner_reference(inst, 8, T)
        assert heur.info["method"] == "metric-closure" and prune.info["method"] == "mst-prune"
        assert heur.weight >= exact.weight - 1e-12
        assert prune.weight >= exact.weight - 1e-12
        assert set(T) <= set(heur.vertices.tolist())


def test_steiner_monotone_nested():
    rng = np.random.default_rng(1)
    for s in range(10):
        inst = random_instance(10, s)
        order = rng.permutation(10)
        prev = 0.0
        for r in range(1, 11):
            w = steiner_reference(inst, 10, order[:r]).weight
            assert w >= prev - 1e-12
            prev = w


def test_steiner_errors():
    with pytest.raises(DomainError):
        steiner_reference(EdgeOracle(5, 0), 5, [])
    with pytest.raises(DomainError):
        steiner_reference(EdgeOracle(5, 0), 5, [5])


# slice -----------------------------------------------------------------------------------

def test_slice_path_example():
    t = RootedTree.from_edges([0, 1, 2, 3], [1, 2, 3, 4], [1.0, 2.0, 3.0, 4.0], 0)
    f, removed = slice_tree(t, 3)
    parts = sorted(tuple(x.vertices.tolist()) for x in f.subtrees)
    assert parts == [(0, 1, 2), (3, 4)]
    assert sorted(x.diameter for x in f.subtrees) == [1, 2]
    assert removed == [(2, 3, 3.0)]


def test_slice_noop():
    t = RootedTree.from_edges([0, 0, 0], [1, 2, 3], [1.0, 1.0, 1.0], 0)
    f = slice(t, 2)
    assert len(f) == 1 and f.weight == t.weight


def test_slice_rejects_small_delta():
    with pytest.raises(DomainError):
        slice(RootedTree.from_edges([0], [1], [1.0], 0), 1)


@settings(max_examples=60, deadline=None)
@given(nv=st.integers(2, 300), seed=st.integers(0, 10**6), delta=st.integers(2, 12))
def test_slice_properties(nv, seed, delta):
    g = nx.random_labeled_tree(nv, seed=seed)
    rng = np.random.default_rng(seed)
    e = np.asarray(list(g.edges()), dtype=np.int64).reshape(-1, 2)
    t = RootedTree.from_edges(e[:, 0], e[:, 1], rng.exponential(size=len(e)), 0, vertices=range(nv))
    f, removed = slice_tree(t, delta)
    assert sum(x.n_vertices for x in f.subtrees) == nv
    orig = edge_set(t)
    for x in f.subtrees:
        assert x.diameter <= delta
        assert x.diameter == nx.diameter(g.subgraph(x.vertices.tolist()))
        assert edge_set(x) <= orig
        if len(f) > 1:
            assert x.n_vertices >= delta // 2 + 1
    assert math.fsum([x.weight for x in f.subtrees] + [w for _, _, w in removed]) == pytest.approx(
        t.weight, rel=1e-14)
    assert len(removed) == len(f) - 1


# splice ---------------------------------------------------------------------------------

def test_splice_single():
    t = RootedTree.from_edges([0, 1], [1, 2], [0.5, 0.5], 1)
    out, S = splice(Forest([t]), EdgeOracle(3, 0), 3, 2)
    assert out is t and S == 0.0


def test_splice_two_subtrees():
    n = 10
    a = RootedTree.from_edges([0, 1, 2], [1, 2, 3], [1.0, 1.0, 1.0], 1)
    b = RootedTree.from_edges([4, 5, 6, 7, 8], [5, 6, 7, 8, 9], [1.0] * 5, 6)
    heavy = EdgeOracle(n, 9, 2)
    f = Forest([a, b])
    out, S = splice(f, heavy, n, 1)
    cands = {v: heavy.weight(1, v) for v in range(4, 10)}
    best = min(cands, key=cands.get)
    assert S == cands[best]
    assert f.marked == {0: 1, 1: best}
    assert out.root == (1,) and out.n_vertices == n
    assert out.weight == pytest.approx(8.0 + S)


def test_splice_depth_bound():
    rng = np.random.default_rng(3)
    for trial in range(100):
        nv = int(rng.integers(20, 400))
        g = nx.random_labeled_tree(nv, seed=trial)
        e = np.asarray(list(g.edges()), dtype=np.int64)
        t = RootedTree.from_edges(e[:, 0], e[:, 1], rng.exponential(size=len(e)), 0, vertices=range(nv))
        delta = int(rng.integers(2, 8))
        md = int(rng.integers(1, 4))
        f = slice(t, delta)
        out, S = splice(f, EdgeOracle(nv, trial, 2), nv, md)
        assert out.n_vertices == nv
        assert out.depth <= md + max(x.diameter for x in f.subtrees)
        assert out.weight == pytest.approx(f.weight + S, rel=1e-12)
        for i, x in enumerate(f.subtrees):
            assert f.marked[i] in x


def test_splice_errors():
    with pytest.raises(DomainError):
        splice(Forest([]), EdgeOracle(3, 0), 3, 1)
    with pytest.raises(DomainError):
        splice(Forest([RootedTree.from_edges([0], [1], [1.0], 0)]), EdgeOracle(3, 0), 3, 0)


# slice and splice ------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("delta", [2, 4, 9])
def test_sliced_and_spliced_properties(seed, delta):
    n = 2000
    tree, d = sliced_and_spliced(seed, n, None, None, delta)
    md = meta_depth_for(n)
    assert tree.n_vertices == n
    assert tree.depth <= md + delta
    assert d["max_subtree_diameter"] <= delta
    split = split_weights(seed, n, d["epsilon"])
    assert tree.weight >= prim_mst(split, n).weight
    assert tree.weight <= d["light_weight"] + d["splice_weight"] + 1e-12
    u, v, w = tree.edges()
    assert np.array_equal(w, split.weights(u, v))
    assert d["epsilon"] == pytest.approx(min(0.5, 1 / math.sqrt(d["base_weight_unit"] * delta)))


def test_sliced_and_spliced_fixed_epsilon_and_steiner():
    n = 1500
    tree, d = sliced_and_spliced(5, n, np.arange(300), None, 4, 0.2)
    assert d["epsilon"] == 0.2 and not d["base_exact"]
    assert set(range(300)) <= set(tree.vertices.tolist())
    assert tree.depth <= meta_depth_for(n) + 4


def test_sliced_and_spliced_depth_violation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ConstructionError):
            sliced_and_spliced(0, 3000, None, 2, 6)
    with pytest.raises(DomainError):
        sliced_and_spliced(0, 100, None, None, 1)


def test_meta_depth():
    assert meta_depth_for(30_000) == 3
    assert meta_depth_for(1000) == 2
    assert meta_depth_for(3) == 1
