"""The compiled kernels and the numpy fallback must agree exactly."""
import numpy as np
import pytest

from bdtree import kernels
from bdtree.graph_model import pair_uniform, stream_key

needs_compiled = pytest.mark.skipif(kernels.compiled is None, reason="extension not built")
KEY = stream_key(12345, 0)


def test_scalar_hash_matches_vector(backend):
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2**31, 500)
    v = rng.integers(0, 2**31, 500)
    got = backend.pair_uniforms(KEY, u, v)
    want = np.array([pair_uniform(KEY, int(a), int(b)) for a, b in zip(u, v)])
    assert np.array_equal(got, want)


def test_uniforms_in_unit_interval(backend):
    u = np.arange(10_000, dtype=np.int64)
    x = backend.pair_uniforms(KEY, u, u[::-1].copy())
    assert x.min() >= 0.0 and x.max() < 1.0


def test_min_to_set_brute(backend):
    rng = np.random.default_rng(2)
    cands = rng.choice(1000, 50, replace=False).astype(np.int64)
    front = rng.choice(1000, 17, replace=False).astype(np.int64)
    best, arg = backend.min_uniform_to_set(KEY, cands, front)
    for i, c in enumerate(cands):
        vals = [pair_uniform(KEY, int(f), int(c)) for f in front]
        assert best[i] == min(vals)
        assert arg[i] == int(np.argmin(vals))


def test_min_to_set_empty_frontier(backend):
    with pytest.raises(ValueError):
        backend.min_uniform_to_set(KEY, np.arange(3, dtype=np.int64), np.empty(0, dtype=np.int64))


@needs_compiled
def test_parity_min_to_set():
    rng = np.random.default_rng(3)
    cands = rng.integers(0, 10**6, 3000).astype(np.int64)
    front = rng.integers(0, 10**6, 40).astype(np.int64)
    a = kernels.compiled.min_uniform_to_set(KEY, cands, front)
    b = kernels.fallback.min_uniform_to_set(KEY, cands, front)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@needs_compiled
@pytest.mark.parametrize("n", [1, 2, 3, 50, 400])
def test_parity_prim_uniform(n):
    a = kernels.compiled.prim_uniform(KEY, n)
    b = kernels.fallback.prim_uniform(KEY, n)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@needs_compiled
@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_parity_prim_split(eps):
    k1, k2 = stream_key(9, 1), stream_key(9, 2)
    a = kernels.compiled.prim_split(k1, 1 - eps, k2, eps, 300)
    b = kernels.fallback.prim_split(k1, 1 - eps, k2, eps, 300)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[2], b[2])
    assert np.allclose(a[1], b[1], rtol=1e-14, atol=0)


def test_prim_uniform_is_mst(backend):
    # compare with an explicit dense Prim on the same uniforms
    n = 60
    iu, iv = np.triu_indices(n, 1)
    M = np.full((n, n), np.inf)
    w = backend.pair_uniforms(KEY, iu.astype(np.int64), iv.astype(np.int64))
    M[iu, iv] = w
    M[iv, iu] = w
    from scipy.sparse.csgraph import minimum_spanning_tree
    ref = minimum_spanning_tree(np.where(np.isfinite(M), M, 0)).sum()
    parent, score, order = backend.prim_uniform(KEY, n)
    assert parent[0] == -1 and sorted(order) == list(range(n))
    assert np.isclose(score.sum(), ref, rtol=1e-12)
    for v in range(1, n):
        assert score[v] == M[v, parent[v]]
