import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bdtree.errors import DomainError
from bdtree.graph_model import (Distribution, EdgeOracle, combined_weight, edge_weight,
                                split_weights)

N = 50_000


def _pairs(n_pairs, n=N, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, n, n_pairs)
    v = rng.integers(0, n - 1, n_pairs)
    v = np.where(v >= u, v + 1, v)
    return u, v


def test_symmetry_example():
    o = EdgeOracle(10, 5)
    assert edge_weight(o, 3, 7) == edge_weight(o, 7, 3)


def test_trunc_low_cap():
    o = EdgeOracle(N, 1, dist=Distribution.truncated_low(0.5))
    u, v = _pairs(10_000)
    assert o.weights(u, v).max() <= 0.5


def test_exp_mean_1e6():
    u, v = _pairs(10**6)
    w = EdgeOracle(N, 2).weights(u, v)
    assert 0.997 <= w.mean() <= 1.003


def test_errors():
    o = EdgeOracle(10, 0)
    with pytest.raises(DomainError):
        o.weight(3, 3)
    with pytest.raises(DomainError):
        o.weight(0, 10)
    with pytest.raises(DomainError):
        split_weights(0, 10, 0.0)
    with pytest.raises(DomainError):
        split_weights(0, 10, 0.51)
    with pytest.raises(DomainError):
        Distribution.exponential(-1)
    with pytest.raises(DomainError):
        Distribution.parse("pareto")


def test_determinism_and_symmetry_10k():
    rng = np.random.default_rng(4)
    for _ in range(3):
        seed = int(rng.integers(0, 2**63))
        a = EdgeOracle(N, seed)
        b = EdgeOracle(N, seed)
        u, v = _pairs(10_000, seed=seed % 1000)
        wa = a.weights(u, v)
        assert np.array_equal(wa, b.weights(u, v))
        assert np.array_equal(wa, a.weights(v, u))
        assert np.array_equal(wa, a.weights(u, v))
    o = EdgeOracle(N, 77)
    for x, y in zip(*_pairs(200, seed=5)):
        assert o.weight(x, y) == o.weight(y, x) == o.weights([x], [y])[0]


def test_split_min_mean():
    s = split_weights(3, N, 0.5)
    u, v = _pairs(10**6)
    assert s.light.dist == s.heavy.dist == Distribution.exponential(0.5)
    w = s.weights(u, v)
    assert 0.995 <= w.mean() <= 1.005


def test_split_ks_and_min():
    s = split_weights(8, N, 0.2)
    u, v = _pairs(10**5, seed=1)
    w = s.weights(u, v)
    assert stats.kstest(w, "expon").statistic < 0.01
    assert np.all(w <= s.light.weights(u, v))
    for x, y in zip(u[:50], v[:50]):
        c = combined_weight(s, x, y)
        assert c == min(s.light.weight(x, y), s.heavy.weight(x, y))


def test_stream_independence():
    s = split_weights(11, N, 0.3)
    u, v = _pairs(10**5, seed=2)
    rho = np.corrcoef(s.light.weights(u, v), s.heavy.weights(u, v))[0, 1]
    assert abs(rho) < 0.01


@pytest.mark.parametrize("dist", [Distribution.exponential(1.0), Distribution.exponential(2.5),
                                  Distribution.uniform()])
def test_ks_per_variant(dist):
    u, v = _pairs(10**5, seed=3)
    w = EdgeOracle(N, 21, dist=dist).weights(u, v)
    res = stats.kstest(w, lambda t: dist.cdf(t))
    assert res.statistic < 0.01


def test_trunc_low_law():
    # Exp(1) below the cap with the remaining mass sitting on the cap
    d = Distribution.truncated_low(0.7)
    u, v = _pairs(10**5, seed=6)
    w = EdgeOracle(N, 21, dist=d).weights(u, v)
    below = w[w < 0.7]
    assert abs(1 - below.size / w.size - np.exp(-0.7)) < 0.005
    assert stats.kstest(below, lambda t: d.cdf(t) / d.cdf(0.7 - 1e-12)).statistic < 0.01


def test_trunc_high_law():
    # conditional on being finite, trunc-high is Exp(1) below the cut
    d = Distribution.truncated_high(0.7)
    u, v = _pairs(10**5, seed=6)
    w = EdgeOracle(N, 21, dist=d).weights(u, v)
    fin = w[np.isfinite(w)]
    assert abs(fin.size / w.size - d.cdf(0.7)) < 0.005
    assert stats.kstest(fin, lambda t: d.cdf(t) / d.cdf(0.7)).statistic < 0.01


def test_uniform_density_one_at_zero():
    d = Distribution.uniform()
    t = np.linspace(0, 1, 11)
    assert np.allclose(d.cdf(t), t)


def test_sandwich_pathwise():
    eps = 0.4
    u, v = _pairs(20_000, seed=7)
    base = EdgeOracle(N, 5)
    lo = base.with_dist(Distribution.truncated_low(eps)).weights(u, v)
    mid = base.weights(u, v)
    hi = base.with_dist(Distribution.truncated_high(eps)).weights(u, v)
    assert np.all(lo <= mid) and np.all(mid <= hi)


def test_streams_differ():
    a = EdgeOracle(100, 1, 0)
    b = EdgeOracle(100, 1, 1)
    u, v = _pairs(100, n=100)
    assert not np.array_equal(a.weights(u, v), b.weights(u, v))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), u=st.integers(0, 9999), v=st.integers(0, 9999),
       spec=st.sampled_from(["exp", "exp:3", "uniform", "trunc-low:0.2", "trunc-high:1.5"]))
def test_weight_pure_and_symmetric(seed, u, v, spec):
    if u == v:
        return
    d = Distribution.parse(spec)
    o1, o2 = EdgeOracle(10_000, seed, 0, d), EdgeOracle(10_000, seed, 0, d)
    assert o1.weight(u, v) == o2.weight(v, u)
    assert o1.weight(u, v) >= 0


@settings(max_examples=40, deadline=None)
@given(x=st.floats(0, 1, exclude_max=True), y=st.floats(0, 1, exclude_max=True),
       spec=st.sampled_from(["exp", "exp:0.3", "uniform", "trunc-low:0.2", "trunc-high:1.5"]))
def test_inverse_cdf_monotone(x, y, spec):
    d = Distribution.parse(spec)
    a, b = sorted((x, y))
    assert d.from_uniform(a) <= d.from_uniform(b)
