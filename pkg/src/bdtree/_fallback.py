"""Pure numpy versions of the scan kernels in ``_kernels.pyx``.

Hashing is done in wrapping uint64 arithmetic, so hashes and uniforms are
bit-identical to the compiled path. Argmin tie rules mirror the compiled loops.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
TWO_M53 = 1.0 / 9007199254740992.0
_UMAX = np.uint64(0xFFFFFFFFFFFFFFFF)

_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S32 = np.uint64(32)


def _mix64(z):
    z = (z ^ (z >> _S30)) * MIX1
    z = (z ^ (z >> _S27)) * MIX2
    return z ^ (z >> _S31)


def _hashes(key, u, v):
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    lo = np.minimum(u, v).astype(np.uint64)
    hi = np.maximum(u, v).astype(np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(((lo << _S32) | hi) * GOLDEN + np.uint64(key))


def _to_uniform(h):
    return (h >> _S11).astype(np.float64) * TWO_M53


def _uniforms(key, u, v):
    return _to_uniform(_hashes(key, u, v))


def pair_uniforms(key, us, vs):
    return _uniforms(key, us, vs)


def min_uniform_to_set(key, cands, frontier):
    cands = np.asarray(cands, dtype=np.int64)
    frontier = np.asarray(frontier, dtype=np.int64)
    if frontier.size == 0:
        raise ValueError("frontier is empty")
    best = np.full(cands.size, _UMAX, dtype=np.uint64)
    arg = np.zeros(cands.size, dtype=np.int64)
    for j, u in enumerate(frontier):
        x = _hashes(key, np.full(cands.size, u, dtype=np.int64), cands)
        better = x < best
        best[better] = x[better]
        arg[better] = j
    return _to_uniform(best), arg


def prim_uniform(key, n):
    parent = np.full(n, -1, dtype=np.int64)
    score = np.zeros(n)
    order = np.empty(n, dtype=np.int64)
    if n == 0:
        return parent, score, order
    keys = np.full(n, _UMAX, dtype=np.uint64)
    rem = np.arange(n, dtype=np.int64)
    rem[0] = rem[n - 1]
    r = n - 1
    cur = 0
    order[0] = 0
    step = 1
    while r > 0:
        live = rem[:r]
        x = _hashes(key, np.full(r, cur, dtype=np.int64), live)
        better = x < keys[live]
        keys[live[better]] = x[better]
        parent[live[better]] = cur
        bi = int(np.argmin(keys[live]))
        cur = int(live[bi])
        score[cur] = _to_uniform(keys[cur:cur + 1])[0]
        order[step] = cur
        step += 1
        rem[bi] = rem[r - 1]
        r -= 1
    return parent, score, order


def prim_split(key_light, rate_light, key_heavy, rate_heavy, n):
    parent = np.full(n, -1, dtype=np.int64)
    weight = np.zeros(n)
    order = np.empty(n, dtype=np.int64)
    if n == 0:
        return parent, weight, order
    keys = np.full(n, np.inf)
    rem = np.arange(n, dtype=np.int64)
    rem[0] = rem[n - 1]
    r = n - 1
    cur = 0
    order[0] = 0
    step = 1
    while r > 0:
        live = rem[:r]
        src = np.full(r, cur, dtype=np.int64)
        w = np.minimum(-np.log1p(-_uniforms(key_light, src, live)) / rate_light,
                       -np.log1p(-_uniforms(key_heavy, src, live)) / rate_heavy)
        better = w < keys[live]
        keys[live[better]] = w[better]
        parent[live[better]] = cur
        bi = int(np.argmin(keys[live]))
        cur = int(live[bi])
        weight[cur] = keys[cur]
        order[step] = cur
        step += 1
        rem[bi] = rem[r - 1]
        r -= 1
    return parent, weight, order
