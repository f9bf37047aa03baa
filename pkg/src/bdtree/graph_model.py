"""Randomly weighted complete graphs without stored weight matrices.

An :class:`EdgeOracle` derives the weight of edge ``{u, v}`` from a
counter-based hash of ``(seed, stream_id, min(u, v), max(u, v))`` pushed
through an inverse CDF, so a graph on ``n`` vertices costs O(1) memory and
the same logical edge always receives the same uniform variate regardless
of distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

BASE_STREAM = 0
LIGHT_STREAM = 1
HEAVY_STREAM = 2
AUX_STREAM = 3


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream_id: int) -> int:
    """64-bit key of one weight stream."""
    return mix64(mix64(seed) ^ (((stream_id + 1) * _GOLDEN) & MASK64))


def pair_uniform(key: int, u: int, v: int) -> float:
    """Scalar version of the kernels' pair hash, in plain Python integers."""
    lo, hi = (u, v) if u < v else (v, u)
    h = mix64((((lo << 32) | hi) * _GOLDEN + key) & MASK64)
    return (h >> 11) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class Distribution:
    """Edge-weight law, realised from a uniform variate by inverse CDF.

    ``kind`` is one of ``exp``, ``uniform``, ``trunc-low``, ``trunc-high``;
    ``param`` is the rate for ``exp`` and the cut-off ``eps`` for the
    truncated variants. ``trunc-low`` is ``min(W, eps)`` and ``trunc-high``
    is ``W`` if ``W <= eps`` else ``inf``, with ``W ~ Exp(1)``.
    """

    kind: str = "exp"
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "uniform", "trunc-low", "trunc-high"):
            raise DomainError(f"unknown distribution kind {self.kind!r}")
        if self.kind != "uniform" and not (self.param > 0 and math.isfinite(self.param)):
            raise DomainError(f"{self.kind} needs a positive finite parameter, got {self.param}")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> Distribution:
        return cls("exp", float(rate))

    @classmethod
    def uniform(cls) -> Distribution:
        return cls("uniform", 1.0)

    @classmethod
    def truncated_low(cls, eps: float) -> Distribution:
        return cls("trunc-low", float(eps))

    @classmethod
    def truncated_high(cls, eps: float) -> Distribution:
        return cls("trunc-high", float(eps))

    @classmethod
    def parse(cls, text: str) -> Distribution:
        """Parse ``exp``, ``exp:2``, ``uniform``, ``trunc-low:0.5`` and so on."""
        name, _, arg = text.partition(":")
        name = name.strip().lower()
        if name == "uniform":
            return cls.uniform()
        if name == "exp":
            return cls.exponential(float(arg) if arg else 1.0)
        if name in ("trunc-low", "trunc-high"):
            if not arg:
                raise DomainError(f"{name} needs a cut-off, e.g. {name}:0.5")
            return cls(name, float(arg))
        raise DomainError(f"unknown distribution {text!r}")

    def label(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        if self.kind == "exp" and self.param == 1.0:
            return "exp"
        return f"{self.kind}:{self.param!r}"

    def from_uniform(self, u):
        """Map uniforms in [0, 1) to weights; non-decreasing in ``u``."""
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "uniform":
            return u.copy()
        w = -np.log1p(-u)
        if self.kind == "exp":
            return w / self.param
        if self.kind == "trunc-low":
            return np.minimum(w, self.param)
        return np.where(w <= self.param, w, np.inf)

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "uniform":
            return np.clip(t, 0.0, 1.0)
        if self.kind == "exp":
            return np.where(t > 0, -np.expm1(-self.param * np.maximum(t, 0)), 0.0)
        base = np.where(t > 0, -np.expm1(-np.maximum(t, 0)), 0.0)
        if self.kind == "trunc-low":
            return np.where(t >= self.param, 1.0, base)
        cap = -math.expm1(-self.param)
        return np.where(np.isposinf(t), 1.0, np.minimum(base, cap))


@dataclass(frozen=True)
class EdgeOracle:
    """Deterministic weights on the complete graph ``K_n``.

    Immutable; safe to share between threads.
    """

    n: int
    seed: int
    stream_id: int = BASE_STREAM
    dist: Distribution = field(default_factory=Distribution)

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"need n >= 2, got {self.n}")
        if self.n >= 1 << 32:
            raise DomainError("vertex ids must fit in 32 bits")
        object.__setattr__(self, "seed", int(self.seed) & MASK64)

    @property
    def key(self) -> int:
        return stream_key(self.seed, self.stream_id)

    def _check_pair(self, u, v):
        if u == v:
            raise DomainError(f"no self-loop weight for vertex {u}")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise DomainError(f"vertex pair ({u}, {v}) outside [0, {self.n})")

    def uniform(self, u: int, v: int) -> float:
        self._check_pair(u, v)
        return pair_uniform(self.key, int(u), int(v))

    def weight(self, u: int, v: int) -> float:
        return float(self.dist.from_uniform(self.uniform(u, v)))

    def uniforms(self, us, vs) -> np.ndarray:
        us = np.ascontiguousarray(us, dtype=np.int64)
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        return kernels.pair_uniforms(self.key, us, vs)

    def weights(self, us, vs) -> np.ndarray:
        return self.dist.from_uniform(self.uniforms(us, vs))

    def min_to_set(self, cands, frontier):
        """Lightest edge from each candidate into ``frontier``.

        Returns ``(weights, arg)``; ``arg`` indexes ``frontier``.
        """
        cands = np.ascontiguousarray(cands, dtype=np.int64)
        frontier = np.ascontiguousarray(frontier, dtype=np.int64)
        u, arg = kernels.min_uniform_to_set(self.key, cands, frontier)
        return self.dist.from_uniform(u), arg

    def with_dist(self, dist: Distribution) -> EdgeOracle:
        return EdgeOracle(self.n, self.seed, self.stream_id, dist)


def edge_weight(oracle: EdgeOracle, u: int, v: int) -> float:
    return oracle.weight(u, v)


@dataclass(frozen=True)
class SplitOracle:
    """Edge weights written as ``min(light, heavy)`` of independent streams.

    With light ``~ Exp(1 - eps)`` and heavy ``~ Exp(eps)`` the minimum is
    ``Exp(1)``.
    """

    light: EdgeOracle
    heavy: EdgeOracle
    epsilon: float

    @property
    def n(self) -> int:
        return self.light.n

    def weight(self, u: int, v: int) -> float:
        return min(self.light.weight(u, v), self.heavy.weight(u, v))

    def weights(self, us, vs) -> np.ndarray:
        return np.minimum(self.light.weights(us, vs), self.heavy.weights(us, vs))

    def min_to_set(self, cands, frontier):
        cands = np.asarray(cands, dtype=np.int64)
        frontier = np.asarray(frontier, dtype=np.int64)
        if frontier.size == 0:
            raise DomainError("frontier is empty")
        best = np.full(cands.size, np.inf)
        arg = np.zeros(cands.size, dtype=np.int64)
        for j, f in enumerate(frontier.tolist()):
            w = self.weights(np.full(cands.size, f), cands)
            better = w < best
            best[better] = w[better]
            arg[better] = j
        return best, arg


def split_weights(seed: int, n: int, epsilon: float) -> SplitOracle:
    if not (0 < epsilon <= 0.5):
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    light = EdgeOracle(n, seed, LIGHT_STREAM, Distribution.exponential(1.0 - epsilon))
    heavy = EdgeOracle(n, seed, HEAVY_STREAM, Distribution.exponential(epsilon))
    return SplitOracle(light, heavy, float(epsilon))


def combined_weight(s: SplitOracle, u: int, v: int) -> float:
    return s.weight(u, v)


def aux_rng(seed: int) -> np.random.Generator:
    """Generator for per-trial choices that are not edge weights."""
    return np.random.default_rng([stream_key(seed, AUX_STREAM)])
