# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scan kernels over the implicit complete graph.

Single-stream kernels compare raw 64-bit hashes: every supported
distribution maps the derived uniform monotonically onto a weight, so an
argmin over hashes is an argmin over weights.
The split kernel works on actual combined Exp weights.

``_fallback.py`` implements the same functions with numpy and must agree
with this module bit-for-bit on uniforms and on all argmin decisions.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.math cimport log1p, INFINITY

cnp.import_array()

cdef uint64_t GOLDEN = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t MIX1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t MIX2 = <uint64_t>0x94D049BB133111EB
cdef uint64_t UMAX = <uint64_t>0xFFFFFFFFFFFFFFFF
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t pair_hash(uint64_t key, int64_t u, int64_t v) noexcept nogil:
    # splitmix64 output for counter (min(u,v) << 32 | max(u,v)) in stream ``key``
    cdef uint64_t lo = <uint64_t>(u if u < v else v)
    cdef uint64_t hi = <uint64_t>(v if u < v else u)
    return mix64(((lo << 32) | hi) * GOLDEN + key)


cdef inline double to_uniform(uint64_t h) noexcept nogil:
    return <double>(h >> 11) * TWO_M53


cdef inline double pair_uniform(uint64_t key, int64_t u, int64_t v) noexcept nogil:
    return to_uniform(pair_hash(key, u, v))


def pair_uniforms(uint64_t key, const int64_t[::1] us, const int64_t[::1] vs):
    """Uniform variates for the pairs ``(us[i], vs[i])``."""
    cdef Py_ssize_t i, m = us.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = pair_uniform(key, us[i], vs[i])
    return out


def min_uniform_to_set(uint64_t key, const int64_t[::1] cands, const int64_t[::1] frontier):
    """For each candidate, the smallest uniform over edges into ``frontier``.

    Returns ``(best, arg)`` where ``arg`` indexes ``frontier``; ties keep the
    earliest frontier position.
    """
    cdef Py_ssize_t i, j, nc = cands.shape[0], nf = frontier.shape[0]
    cdef uint64_t b, x
    cdef int64_t a, v
    best = np.empty(nc, dtype=np.float64)
    arg = np.empty(nc, dtype=np.int64)
    cdef double[::1] bo = best
    cdef int64_t[::1] ao = arg
    if nf == 0:
        raise ValueError("frontier is empty")
    with nogil:
        for i in range(nc):
            v = cands[i]
            b = UMAX
            a = 0
            for j in range(nf):
                x = pair_hash(key, frontier[j], v)
                if x < b:
                    b = x
                    a = j
            bo[i] = to_uniform(b)
            ao[i] = a
    return best, arg


def prim_uniform(uint64_t key, Py_ssize_t n):
    """Dense Prim over all ``n`` vertices from vertex 0, scored by uniforms.

    Returns ``(parent, score, order)``; ``order`` lists vertices in the order
    they joined the tree.
    """
    parent = np.full(n, -1, dtype=np.int64)
    score = np.zeros(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    rem_arr = np.arange(n, dtype=np.int64)
    keys_arr = np.full(n, np.iinfo(np.uint64).max, dtype=np.uint64)
    cdef int64_t[::1] par = parent
    cdef double[::1] sc = score
    cdef int64_t[::1] od = order
    cdef int64_t[::1] rem = rem_arr
    cdef uint64_t[::1] kk = keys_arr
    cdef Py_ssize_t r, idx, bi, step
    cdef int64_t cur, v
    cdef uint64_t x, bk
    if n == 0:
        return parent, score, order
    with nogil:
        od[0] = 0
        cur = 0
        r = n - 1
        rem[0] = rem[n - 1]
        step = 1
        while r > 0:
            bk = UMAX
            bi = 0
            for idx in range(r):
                v = rem[idx]
                x = pair_hash(key, cur, v)
                if x < kk[v]:
                    kk[v] = x
                    par[v] = cur
                if kk[v] < bk:
                    bk = kk[v]
                    bi = idx
            cur = rem[bi]
            sc[cur] = to_uniform(bk)
            od[step] = cur
            step += 1
            rem[bi] = rem[r - 1]
            r -= 1
    return parent, score, order


def prim_split(uint64_t key_light, double rate_light, uint64_t key_heavy,
               double rate_heavy, Py_ssize_t n):
    """Dense Prim on weights ``min(Exp(rate_light), Exp(rate_heavy))``.

    Since ``-log1p(-u) >= u``, a stream whose ``u / rate`` already reaches the
    current key cannot improve it and its logarithm is skipped.
    """
    parent = np.full(n, -1, dtype=np.int64)
    weight = np.zeros(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    rem_arr = np.arange(n, dtype=np.int64)
    keys_arr = np.full(n, INFINITY, dtype=np.float64)
    cdef int64_t[::1] par = parent
    cdef double[::1] wt = weight
    cdef int64_t[::1] od = order
    cdef int64_t[::1] rem = rem_arr
    cdef double[::1] kk = keys_arr
    cdef Py_ssize_t r, idx, bi, step
    cdef int64_t cur, v
    cdef double u, w, w2, bk
    if n == 0:
        return parent, weight, order
    with nogil:
        od[0] = 0
        cur = 0
        r = n - 1
        rem[0] = rem[n - 1]
        step = 1
        while r > 0:
            bk = INFINITY
            bi = 0
            for idx in range(r):
                v = rem[idx]
                u = pair_uniform(key_light, cur, v)
                if u < kk[v] * rate_light:
                    w = -log1p(-u) / rate_light
                else:
                    w = INFINITY
                u = pair_uniform(key_heavy, cur, v)
                if u < kk[v] * rate_heavy:
                    w2 = -log1p(-u) / rate_heavy
                    if w2 < w:
                        w = w2
                if w < kk[v]:
                    kk[v] = w
                    par[v] = cur
                if kk[v] < bk:
                    bk = kk[v]
                    bi = idx
            cur = rem[bi]
            wt[cur] = bk
            od[step] = cur
            step += 1
            rem[bi] = rem[r - 1]
            r -= 1
    return parent, weight, order
