"""Level-size sequences, their cost functionals and the weight predictions.

Level ``i`` of a rooted tree holds ``sizes[i]`` vertices; ``sizes[0]`` is 1
for a root vertex and 2 for a root edge. The cost of joining ``b`` vertices
to ``a`` parents in a graph on ``n`` vertices is modelled as
``b**2 / (2 n a)``, with an extra factor ``c`` on the last level.
Logarithms are natural throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import pairwise

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class LevelSequence:
    sizes: tuple

    def __post_init__(self):
        sizes = tuple(float(x) for x in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 2:
            raise DomainError("a level sequence needs at least two levels")
        if sizes[0] not in (1.0, 2.0):
            raise DomainError(f"level 0 must hold 1 or 2 vertices, got {sizes[0]}")
        if min(sizes) <= 0:
            raise DomainError("level sizes must be positive")

    @property
    def k(self) -> int:
        return len(self.sizes) - 1

    @property
    def ratios(self) -> np.ndarray:
        s = np.asarray(self.sizes)
        return s[1:] / s[:-1]

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.sizes)

    def scaled(self, factor: float) -> LevelSequence:
        return LevelSequence(tuple(factor * x for x in self.sizes))

    def __len__(self):
        return len(self.sizes)

    def __getitem__(self, i):
        return self.sizes[i]


@dataclass(frozen=True)
class IntegerLevelSequence:
    """Buildable level sizes. Levels after a clipped one may be empty."""

    sizes: tuple
    clipped: bool = False

    def __post_init__(self):
        sizes = tuple(int(x) for x in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 1 or sizes[0] not in (1, 2):
            raise DomainError(f"level 0 must hold 1 or 2 vertices, got {sizes[:1]}")
        if min(sizes) < 0:
            raise DomainError("level sizes must be non-negative")

    @property
    def k(self) -> int:
        return len(self.sizes) - 1

    def __len__(self):
        return len(self.sizes)

    def __getitem__(self, i):
        return self.sizes[i]


@dataclass(frozen=True)
class CostParams:
    """``n`` vertices, ``m`` terminals, last-level factor ``c`` (default
    ``2n/m``) and truncation parameter ``delta`` for lower-bound costs."""

    n: float
    m: float
    c: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if not (1 <= self.m <= self.n):
            raise DomainError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.c is None:
            object.__setattr__(self, "c", 2.0 * self.n / self.m)
        if self.c < 1:
            raise DomainError(f"c must be >= 1, got {self.c}")
        if self.delta is not None and not (0 < self.delta <= 1):
            raise DomainError(f"delta must lie in (0, 1], got {self.delta}")

    @property
    def terminal_fraction(self) -> float:
        return self.m / self.n


def _pair_cost(n, a, b):
    return b * b / (2.0 * n * a)


def optimal_level_sequence(p: CostParams, k: int, l0: int = 1, lk: float | None = None) -> LevelSequence:
    """Interior sizes minimising ``f_cost`` with the end sizes held fixed.

    For ``l0 = 2`` the unit-rooted optimum for ``lk / 2`` is doubled; the
    cost is homogeneous so this preserves optimality.
    """
    if lk is None:
        lk = p.m
    if k < 1:
        raise DomainError(f"depth must be >= 1, got {k}")
    if l0 not in (1, 2):
        raise DomainError(f"l0 must be 1 or 2, got {l0}")
    if lk < l0:
        raise DomainError(f"last level {lk} is smaller than the root level {l0}")
    target = lk / l0
    base = target * math.sqrt(p.c) / 2.0**k
    denom = 2.0**k - 1.0
    sizes = [float(l0)]
    for i in range(1, k):
        expo = 1.0 - (2.0 ** (k - i) - 1.0) / denom
        sizes.append(l0 * 2.0**i * base**expo)
    sizes.append(float(lk))
    return LevelSequence(tuple(sizes))


def f_cost(p: CostParams, seq: LevelSequence) -> float:
    s = seq.sizes
    k = len(s) - 1
    total = math.fsum(_pair_cost(p.n, s[i - 1], s[i]) for i in range(1, k))
    return total + p.c * _pair_cost(p.n, s[k - 1], s[k])


def closed_form_cost(p: CostParams, k: int, lk: float | None = None) -> float:
    """Cost of the unit-rooted optimal sequence without building it."""
    if lk is None:
        lk = p.m
    x = lk * math.sqrt(p.c)
    return 2.0 * x / p.n * (1.0 - 2.0**-k) * (x / 2.0**k) ** (1.0 / (2.0**k - 1.0))


def predicted_weight_depth(n: float, m: float, k: int) -> float:
    """Leading-order weight of the minimum depth-``k`` (or diameter-``2k``) tree."""
    _check_nmk(n, m, k)
    return (1 - 2.0**-k) * math.sqrt(8 * m / n) * (math.sqrt(2 * m * n) / 2.0**k) ** (1 / (2.0**k - 1))


def predicted_weight_diam_odd(n: float, m: float, k: int) -> float:
    """Leading-order weight of the minimum diameter-``2k+1`` tree."""
    _check_nmk(n, m, k)
    return (1 - 2.0**-k) * math.sqrt(8 * m / n) * (math.sqrt(m * n / 2) / 2.0**k) ** (1 / (2.0**k - 1))


def _check_nmk(n, m, k):
    if k < 1:
        raise DomainError(f"depth must be >= 1, got {k}")
    if not (1 <= m <= n):
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")


def integerize(seq: LevelSequence, n: int, m: int) -> IntegerLevelSequence:
    """Round interior levels up, never letting the running total pass ``n``.

    The last entry is the number of terminals that can still be waiting,
    ``min(m, n - vertices placed above it)``; the builder attaches whatever is
    actually left.
    """
    l0 = int(seq.sizes[0])
    if n < l0:
        raise DomainError(f"n = {n} cannot hold a root level of size {l0}")
    sizes = [l0]
    used = l0
    clipped = False
    for x in seq.sizes[1:-1]:
        want = math.ceil(x - 1e-9)
        take = min(want, n - used)
        if take < want:
            clipped = True
        sizes.append(take)
        used += take
    sizes.append(min(m, n - used))
    return IntegerLevelSequence(tuple(sizes), clipped)


def expected_level_weight(l_prev: int, l_cur: int, pool: int) -> float:
    """Mean weight of joining the ``l_cur`` cheapest of ``pool`` vertices to
    ``l_prev`` parents under Exp(1) weights."""
    if not (1 <= l_cur <= pool):
        raise DomainError(f"need 1 <= l_cur <= pool, got l_cur={l_cur}, pool={pool}")
    i = np.arange(l_cur, dtype=np.float64)
    return math.fsum((l_cur - i) / (pool - i)) / l_prev


def R_threshold(delta: float, n: float, a: float) -> float:
    """Jump size above which joining to ``a`` parents is reliably costly."""
    if not (0 < delta <= 1):
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if not (1 <= a <= n):
        raise DomainError(f"a must lie in [1, n], got a={a}, n={n}")
    return 16.0 / delta**2 * a * math.log(n * math.e / a)


def f_cost_truncated(p: CostParams, seq: LevelSequence) -> float:
    """``f_cost`` with every small jump dropped: a level no larger than
    ``R_threshold`` of the level before it contributes nothing."""
    if p.delta is None:
        raise DomainError("truncated cost needs CostParams.delta")
    s = seq.sizes
    k = len(s) - 1
    terms = []
    for i, (a, b) in enumerate(pairwise(s), start=1):
        if b > R_threshold(p.delta, p.n, min(a, p.n)):
            terms.append((p.c if i == k else 1.0) * _pair_cost(p.n, a, b))
    return math.fsum(terms)


def small_jumps(p: CostParams, seq: LevelSequence) -> list[int]:
    """Indices ``i`` whose jump into level ``i`` is small."""
    return [i for i, (a, b) in enumerate(pairwise(seq.sizes), start=1)
            if b <= R_threshold(p.delta, p.n, min(a, p.n))]


def _grid(p: CostParams, k: int, points_per_decade: int, l0: float) -> np.ndarray:
    n = float(p.n)
    top = math.log10(n)
    steps = int(math.floor(top * points_per_decade + 1e-9))
    pts = 10.0 ** (np.arange(steps + 1) / points_per_decade)
    extra = [n, float(p.m), l0]
    for kk in range(1, k + 1):
        extra.extend(optimal_level_sequence(p, kk, int(l0), p.m).sizes)
    pts = np.concatenate([pts, np.asarray(extra)])
    pts = pts[(pts >= 1.0) & (pts <= n)]
    return np.unique(pts)


def minimize_truncated_cost(p: CostParams, k: int, grid_points_per_decade: int = 40,
                            l0: int = 1) -> tuple[LevelSequence, float]:
    """Exact minimum of ``f_cost_truncated`` over a log-spaced grid.

    Minimises over level sizes that start at ``l0``, take every later value
    from the grid and add up to at least ``m``. The dynamic program keeps, per level and
    grid value, the Pareto front of (cost so far, size so far); the last
    level only needs feasibility.
    """
    if p.delta is None:
        raise DomainError("truncated cost needs CostParams.delta")
    if not (1 <= k <= 6):
        raise DomainError(f"k must lie in [1, 6], got {k}")
    if grid_points_per_decade < 20:
        raise DomainError("grid needs at least 20 points per decade")
    if p.m > k * p.n:
        raise DomainError(f"m = {p.m} cannot be reached with {k} levels of at most {p.n}")

    g = _grid(p, k, grid_points_per_decade, float(l0))
    n = float(p.n)
    # jump cost from grid value a (row) to grid value b (column)
    R = 16.0 / p.delta**2 * g * np.log(n * math.e / g)
    jump = np.where(g[None, :] > R[:, None], g[None, :] ** 2 / (2.0 * n * g[:, None]), 0.0)
    R0 = R_threshold(p.delta, n, l0)
    first = np.where(g > R0, g**2 / (2.0 * n * l0), 0.0)

    if k == 1:
        feasible = l0 + g >= p.m
        cost = p.c * first
        cost = np.where(feasible, cost, np.inf)
        j = int(np.argmin(cost))
        return LevelSequence((l0, g[j])), float(cost[j])

    # fronts[j] = (cost array, sum array, back-pointer list) at current level value g[j]
    fronts = [(np.array([first[j]]), np.array([l0 + g[j]]), [(j,)]) for j in range(g.size)]
    for _level in range(2, k):
        new = []
        for b in range(g.size):
            costs, sums, paths = [], [], []
            for a, (fc, fs, fp) in enumerate(fronts):
                costs.append(fc + jump[a, b])
                sums.append(fs + g[b])
                paths.extend(path + (b,) for path in fp)
            c_all = np.concatenate(costs)
            s_all = np.concatenate(sums)
            keep = _pareto(c_all, s_all)
            new.append((c_all[keep], s_all[keep], [paths[i] for i in keep]))
        fronts = new

    best, best_path = math.inf, None
    for a, (fc, fs, fp) in enumerate(fronts):
        # last level: cost fc + c * jump[a, b], feasible when fs + g[b] >= m
        total = fc[:, None] + p.c * jump[a][None, :]
        total = np.where(fs[:, None] + g[None, :] >= p.m, total, np.inf)
        idx = np.unravel_index(int(np.argmin(total)), total.shape)
        if total[idx] < best:
            best = float(total[idx])
            best_path = fp[idx[0]] + (int(idx[1]),)
    if best_path is None:
        raise DomainError("no feasible sequence on the grid")
    return LevelSequence((l0,) + tuple(g[j] for j in best_path)), best


def _pareto(costs: np.ndarray, sums: np.ndarray) -> np.ndarray:
    """Indices of entries not dominated by (lower-or-equal cost, higher-or-equal sum)."""
    order = np.lexsort((-sums, costs))
    keep = []
    best_sum = -math.inf
    for i in order:
        if sums[i] > best_sum:
            keep.append(int(i))
            best_sum = sums[i]
    return np.asarray(keep, dtype=np.int64)
