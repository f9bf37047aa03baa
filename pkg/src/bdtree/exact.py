"""Ground truth for small cases: order statistics of exponential samples,
exhaustive optimal bounded-depth/diameter trees, and the lower-bound
functional ``F(a, b)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import CapacityError, DomainError, InfeasibleError
from .level_sequences import CostParams, LevelSequence, f_cost_truncated
from .trees import RootedTree, find_center, level_sizes, reroot

MAX_DENSE_N = 14
MAX_ENUM_N = 9
MAX_F_N = 12


# explicit instances -------------------------------------------------------------------

class DenseInstance:
    """Symmetric weight matrix on at most 14 vertices, with a terminal set."""

    def __init__(self, matrix, terminals=None):
        M = np.array(matrix, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DomainError("weight matrix must be square")
        n = M.shape[0]
        if n < 1:
            raise DomainError("instance needs at least one vertex")
        if n > MAX_DENSE_N:
            raise CapacityError(f"dense instances hold at most {MAX_DENSE_N} vertices, got {n}")
        np.fill_diagonal(M, 0.0)
        if not np.all(np.isfinite(M)) or np.any(M < 0):
            raise DomainError("weights must be finite and non-negative")
        if not np.array_equal(M, M.T):
            raise DomainError("weight matrix must be symmetric")
        self.matrix = M
        self.n = n
        if terminals is None:
            terminals = range(n)
        t = np.unique(np.asarray(list(terminals), dtype=np.int64))
        if t.size and (t[0] < 0 or t[-1] >= n):
            raise DomainError("terminals must be vertex ids of the instance")
        self.terminals = t

    @classmethod
    def random(cls, n, rng, m=None, dist="exp"):
        """Instance with i.i.d. Exp(1) (or Uniform(0, 1)) weights."""
        iu, iv = np.triu_indices(n, 1)
        w = rng.exponential(size=iu.size) if dist == "exp" else rng.random(iu.size)
        M = np.zeros((n, n))
        M[iu, iv] = w
        M[iv, iu] = w
        terms = None if m is None else np.sort(rng.choice(n, size=m, replace=False))
        return cls(M, terms)

    @classmethod
    def from_oracle(cls, oracle, terminals=None):
        n = oracle.n
        iu, iv = np.triu_indices(n, 1)
        M = np.zeros((n, n))
        w = oracle.weights(iu, iv)
        M[iu, iv] = w
        M[iv, iu] = w
        return cls(M, terminals)

    def _all_tree_weights(self, vs):
        # weights of every labelled tree on vertex set vs, kept per instance
        cache = self.__dict__.setdefault("_tw_cache", {})
        key = vs.tobytes()
        if key not in cache:
            if len(cache) > 64:
                cache.clear()
            cache[key] = _tree_weights(self.matrix, vs, labelled_trees(vs.size)[0])
        return cache[key]

    @property
    def m(self) -> int:
        return int(self.terminals.size)

    def weight(self, u, v) -> float:
        if u == v:
            raise DomainError(f"no self-loop weight for vertex {u}")
        return float(self.matrix[u, v])

    def weights(self, us, vs) -> np.ndarray:
        return self.matrix[np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)]

    def min_to_set(self, cands, frontier):
        cands = np.asarray(cands, dtype=np.int64)
        frontier = np.asarray(frontier, dtype=np.int64)
        if frontier.size == 0:
            raise DomainError("frontier is empty")
        sub = self.matrix[np.ix_(frontier, cands)]
        arg = np.argmin(sub, axis=0)
        return sub[arg, np.arange(cands.size)], arg

    # text format: "n m", then m terminal ids, then the upper triangle row by row
    def dumps(self) -> str:
        iu, iv = np.triu_indices(self.n, 1)
        parts = [f"{self.n} {self.m}", " ".join(str(t) for t in self.terminals.tolist())]
        parts.append(" ".join(repr(float(x)) for x in self.matrix[iu, iv]))
        return "\n".join(parts) + "\n"

    @classmethod
    def loads(cls, text: str) -> DenseInstance:
        tok = text.split()
        if len(tok) < 2:
            raise DomainError("instance text must start with 'n m'")
        try:
            n, m = int(tok[0]), int(tok[1])
        except ValueError as e:
            raise DomainError(f"bad instance header: {tok[:2]}") from e
        need = 2 + m + n * (n - 1) // 2
        if len(tok) != need:
            raise DomainError(f"instance with n={n}, m={m} needs {need} tokens, got {len(tok)}")
        terms = [int(x) for x in tok[2:2 + m]]
        w = np.asarray([float(x) for x in tok[2 + m:]])
        M = np.zeros((n, n))
        iu, iv = np.triu_indices(n, 1)
        M[iu, iv] = w
        M[iv, iu] = w
        return cls(M, terms)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> DenseInstance:
        with open(path) as fh:
            return cls.loads(fh.read())


# order statistics of exponentials -----------------------------------------------------------

@dataclass(frozen=True)
class OrderStatSpec:
    """Sum of the ``b`` smallest of ``p`` i.i.d. Exp(1) variables."""

    b: int
    p: int

    def __post_init__(self):
        if not (1 <= self.b <= self.p):
            raise DomainError(f"need 1 <= b <= p, got b={self.b}, p={self.p}")

    def coefficients(self) -> np.ndarray:
        i = np.arange(self.b, dtype=np.float64)
        return (self.b - i) / (self.p - i)


def exact_expected_W(s: OrderStatSpec) -> float:
    return math.fsum(s.coefficients().tolist())


def variance_W(s: OrderStatSpec) -> float:
    return math.fsum((s.coefficients() ** 2).tolist())


def approx_expected_W(s: OrderStatSpec) -> float:
    """``b + (p - b) ln(1 - b/p)``, equal to ``b`` at ``b = p``."""
    if s.b == s.p:
        return float(s.b)
    return s.b + (s.p - s.b) * math.log1p(-s.b / s.p)


def sample_W(s: OrderStatSpec, rng: np.random.Generator, size=None):
    """Exact draws via the spacing representation, ``b`` exponentials each.

    The ``i``-th spacing of sorted exponentials is ``X_i / (p - i)`` and
    counts toward ``b - i`` of the ``b`` smallest values.
    """
    c = s.coefficients()
    if size is None:
        return float(rng.standard_exponential(s.b) @ c)
    out = np.empty(size)
    chunk = max(1, 4_000_000 // s.b)
    for lo in range(0, size, chunk):
        hi = min(size, lo + chunk)
        out[lo:hi] = rng.standard_exponential((hi - lo, s.b)) @ c
    return out


def tail_bound(b: int, delta: float) -> float:
    """Upper bound ``exp(-delta^2 b / 8)`` on ``Pr[W < (1 - delta) E W]``."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return math.exp(-delta * delta * b / 8.0)


def empirical_tail(s: OrderStatSpec, delta: float, trials: int, rng: np.random.Generator) -> float:
    if trials < 10_000:
        raise DomainError(f"need at least 10^4 trials, got {trials}")
    thr = (1.0 - delta) * exact_expected_W(s)
    if thr <= 0:
        return 0.0
    w = sample_W(s, rng, size=trials)
    return float(np.count_nonzero(w < thr)) / trials


def empirical_exponent(frac: float, b: int, delta: float) -> float | None:
    """Constant ``c`` with ``frac = exp(-c delta^2 b)``; ``None`` if no draw fell below."""
    if frac <= 0:
        return None
    return -math.log(frac) / (delta * delta * b)


def binomial_se(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


# spanning-tree enumeration ----------------------------------------------------------------

@lru_cache(maxsize=None)
def labelled_trees(s: int):
    """All ``s**(s-2)`` labelled trees on ``s`` vertices.

    Returns ``(edges, ecc)``: ``edges[t]`` is an ``(s-1, 2)`` array of
    ``(lo, hi)`` pairs sorted lexicographically, ``ecc[t, v]`` the
    eccentricity of ``v`` in tree ``t``.
    """
    if s < 1 or s > MAX_ENUM_N:
        raise CapacityError(f"tree enumeration supports 1..{MAX_ENUM_N} vertices, got {s}")
    if s == 1:
        return np.zeros((1, 0, 2), dtype=np.int8), np.zeros((1, 1), dtype=np.int8)
    if s == 2:
        return np.asarray([[[0, 1]]], dtype=np.int8), np.ones((1, 2), dtype=np.int8)
    L = s - 2
    T = s ** L
    seq = (np.arange(T)[:, None] // (s ** np.arange(L - 1, -1, -1))[None, :]) % s
    deg = np.ones((T, s), dtype=np.int16)
    np.add.at(deg, (np.repeat(np.arange(T), L), seq.ravel()), 1)
    rows = np.arange(T)
    eu = np.empty((T, s - 1), dtype=np.int8)
    ev = np.empty((T, s - 1), dtype=np.int8)
    for j in range(L):
        # smallest current leaf
        leaf = np.argmax(deg == 1, axis=1)
        x = seq[:, j]
        eu[:, j] = leaf
        ev[:, j] = x
        deg[rows, leaf] = 0
        deg[rows, x] -= 1
    last = np.argsort(deg == 1, axis=1, kind="stable")[:, -2:]
    eu[:, L] = last[:, 0]
    ev[:, L] = last[:, 1]
    lo = np.minimum(eu, ev)
    hi = np.maximum(eu, ev)
    key = lo.astype(np.int16) * s + hi
    order = np.argsort(key, axis=1)
    lo = np.take_along_axis(lo, order, 1)
    hi = np.take_along_axis(hi, order, 1)
    edges = np.stack([lo, hi], axis=2)

    ecc = np.empty((T, s), dtype=np.int8)
    chunk = 200_000
    inf = np.int8(s)
    for a in range(0, T, chunk):
        b = min(T, a + chunk)
        D = np.full((b - a, s, s), inf, dtype=np.int8)
        D[:, np.arange(s), np.arange(s)] = 0
        r = np.arange(b - a)[:, None]
        D[r, lo[a:b], hi[a:b]] = 1
        D[r, hi[a:b], lo[a:b]] = 1
        for k in range(s):
            np.minimum(D, D[:, :, k:k + 1] + D[:, k:k + 1, :], out=D)
        ecc[a:b] = D.max(axis=2)
    return edges, ecc


def _tree_weights(M, vs, edges):
    g = vs[edges.astype(np.int64)]
    return M[g[:, :, 0], g[:, :, 1]].sum(axis=1)


def _lex_best(cands):
    """Pick the lightest ``(weight, sorted edge tuple)``; ties go to the smaller edge list."""
    best = None
    for w, el in cands:
        if best is None or w < best[0] or (w == best[0] and el < best[1]):
            best = (w, el)
    return best


def _vertex_sets(inst: DenseInstance, must):
    must = np.unique(np.asarray(must, dtype=np.int64))
    others = np.setdiff1d(np.arange(inst.n), must)
    for r in range(others.size + 1):
        for extra in combinations(others.tolist(), r):
            yield np.sort(np.concatenate([must, np.asarray(extra, dtype=np.int64)]))


def _best_over_sets(inst, must, accept):
    """Minimum-weight tree over every vertex set containing ``must``.

    ``accept(ecc, vs)`` returns a boolean mask of admissible trees.
    """
    if inst.n > MAX_ENUM_N:
        raise CapacityError(f"exhaustive search supports n <= {MAX_ENUM_N}, got {inst.n}")
    M = inst.matrix
    cands = []
    for vs in _vertex_sets(inst, must):
        edges, ecc = labelled_trees(vs.size)
        ok = accept(ecc, vs)
        if not ok.any():
            continue
        w = inst._all_tree_weights(vs)
        w = np.where(ok, w, np.inf)
        wmin = w.min()
        for t in np.flatnonzero(w == wmin).tolist():
            el = tuple(map(tuple, vs[edges[t].astype(np.int64)].tolist()))
            cands.append((float(math.fsum(M[a, b] for a, b in el)), el))
    if not cands:
        return None
    # the sums above were re-done with fsum so ties compare exactly
    return _lex_best(cands)


def _to_tree(inst, el, root, info):
    if not el:
        return RootedTree([root[0]], [-1], [0.0], [0], root, info=info)
    u = [a for a, _ in el]
    v = [b for _, b in el]
    w = [inst.matrix[a, b] for a, b in el]
    t = RootedTree.from_edges(u, v, w, root[0], info=info)
    return t if len(root) == 1 else reroot(t, root)


def exact_bounded_depth_tree(inst: DenseInstance, k: int, root: int) -> RootedTree:
    """Minimum tree containing all terminals with every vertex within ``k`` of ``root``."""
    if k < 0:
        raise DomainError(f"depth must be >= 0, got {k}")
    if not (0 <= root < inst.n):
        raise DomainError(f"root {root} outside the instance")
    must = np.union1d(inst.terminals, [root])
    if k == 0 and must.size > 1:
        raise InfeasibleError("depth 0 cannot connect terminals other than the root")

    def accept(ecc, vs):
        return ecc[:, int(np.searchsorted(vs, root))] <= k

    best = _best_over_sets(inst, must, accept)
    if best is None:
        raise InfeasibleError(f"no tree of depth <= {k} exists")
    return _to_tree(inst, best[1], (root,), {"builder": "exact-depth", "k": k, "exact": True})


def exact_bounded_diameter_tree(inst: DenseInstance, D: int) -> RootedTree:
    """Minimum tree containing all terminals with diameter at most ``D``.

    Rooted at its center vertex (even diameter) or center edge (odd).
    """
    if D < 0:
        raise DomainError(f"diameter bound must be >= 0, got {D}")
    must = inst.terminals if inst.terminals.size else np.asarray([0])
    if D == 0 and must.size > 1:
        raise InfeasibleError("diameter 0 cannot connect more than one terminal")

    def accept(ecc, vs):
        return ecc.max(axis=1) <= D

    best = _best_over_sets(inst, must, accept)
    if best is None:
        raise InfeasibleError(f"no tree of diameter <= {D} exists")
    el = best[1]
    if not el:
        return _to_tree(inst, el, (int(must[0]),), {"builder": "exact-diameter", "D": D, "exact": True})
    t = _to_tree(inst, el, (int(el[0][0]),), {})
    return _to_tree(inst, el, find_center(t), {"builder": "exact-diameter", "D": D, "exact": True})


# lower-bound functional ----------------------------------------------------------------------

def brute_force_F(inst: DenseInstance, a: int, b: int, restrict_to_terminals: bool = False) -> float:
    """Cheapest way to join ``b`` vertices, each to some member of a disjoint ``a``-set.

    With ``restrict_to_terminals`` the ``b`` joined vertices must be
    terminals. Only the ``a``-sets are enumerated; given ``A`` the best
    ``B`` is the ``b`` cheapest connection costs.
    """
    if inst.n > MAX_F_N:
        raise CapacityError(f"brute_force_F supports n <= {MAX_F_N}, got {inst.n}")
    if a < 1 or b < 0 or a + b > inst.n:
        raise DomainError(f"infeasible sizes a={a}, b={b} for n={inst.n}")
    if b == 0:
        return 0.0
    M = inst.matrix
    pool_mask = np.zeros(inst.n, dtype=bool)
    if restrict_to_terminals:
        pool_mask[inst.terminals] = True
    else:
        pool_mask[:] = True
    best = math.inf
    for A in combinations(range(inst.n), a):
        A = list(A)
        free = pool_mask.copy()
        free[A] = False
        if np.count_nonzero(free) < b:
            continue
        cost = M[np.ix_(A, np.flatnonzero(free))].min(axis=0)
        part = np.sort(cost)[:b]
        val = math.fsum(part.tolist())
        if val < best:
            best = val
    if not math.isfinite(best):
        raise DomainError(f"no {a}-set leaves {b} terminals to connect")
    return best


def tree_lower_bound(tree: RootedTree, source, restrict_to_terminals: bool = False,
                     delta: float | None = None) -> float:
    """Lower bound on the weight of any tree with ``tree``'s level sizes.

    On a :class:`DenseInstance` this is the certified sum of
    ``brute_force_F(size of level i - 1, size of level i)`` over levels (last
    term over terminals only when restricted).
    Otherwise it is the high-probability bound ``(1 - delta)`` times the
    truncated cost, with last-level factor ``2n/m`` when restricted and 1
    for spanning trees; ``source`` then only needs ``n`` (and ``m`` when
    restricted, else the tree's terminal count is taken as ``n``).
    """
    sizes = level_sizes(tree).tolist()
    k = len(sizes) - 1
    if k == 0:
        return 0.0
    if isinstance(source, DenseInstance):
        terms = []
        for i in range(1, k + 1):
            a, b = sizes[i - 1], sizes[i]
            if i == k and restrict_to_terminals:
                at_k = tree.vertices[tree.level == k]
                b = int(np.isin(at_k, source.terminals).sum())
                terms.append(brute_force_F(source, a, b, True))
            else:
                terms.append(brute_force_F(source, a, b, False))
        return math.fsum(terms)
    if delta is None:
        raise DomainError("the analytic bound needs delta")
    n = source.n
    if restrict_to_terminals:
        m = getattr(source, "m", None) or sizes[-1]
        p = CostParams(n, m, 2.0 * n / m, delta)
    else:
        p = CostParams(n, n, 1.0, delta)
    seq = LevelSequence(tuple(float(x) for x in sizes))
    return (1.0 - delta) * f_cost_truncated(p, seq)


def analytic_lower_bound(n: float, m: float, seq: LevelSequence, delta: float,
                         restrict_to_terminals: bool = False) -> float:
    """``(1 - delta)`` times the truncated cost of a real level sequence."""
    c = 2.0 * n / m if restrict_to_terminals else 1.0
    return (1.0 - delta) * f_cost_truncated(CostParams(n, m, c, delta), seq)


def no_cheap_sets_bound(n: int, a: int, b: int, delta: float) -> float:
    """Union bound ``exp(a ln(ne/a) - delta^2 b / 8)`` on a cheap ``F(a, b)``."""
    return math.exp(a * math.log(n * math.e / a) - delta * delta * b / 8.0)
