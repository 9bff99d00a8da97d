# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled int64 twins of the kernels in ``_pykernels``.

Callers guarantee that no intermediate value overflows int64; the selector
in ``kernels`` falls back to Python integers otherwise.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline void _update(const int64_t[::1] src, int64_t[::1] dst, Py_ssize_t n,
                         Py_ssize_t k, const int64_t[::1] w, const int64_t[::1] pw,
                         Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t idx, j, dj, size = src.shape[0]
    cdef int64_t best, v
    cdef bint have
    for idx in range(size):
        have = False
        best = 0
        for j in range(k):
            dj = (idx // pw[j]) % n
            if dj == p:
                best = src[idx]
                have = True
                break
            v = src[idx + (p - dj) * pw[j]] + w[j]
            if not have or v < best:
                best = v
                have = True
        dst[idx] = best


def init_table(Py_ssize_t n, Py_ssize_t k, w, c0):
    cdef int64_t[::1] wv = np.asarray(w, dtype=np.int64)
    cdef int64_t[::1] pw = np.asarray([n ** (k - 1 - j) for j in range(k)], dtype=np.int64)
    cdef int64_t[::1] cv = np.asarray(c0, dtype=np.int64)
    cdef Py_ssize_t size = n ** k, idx, j
    out = np.zeros(size, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef int64_t v
    with nogil:
        for idx in range(size):
            v = 0
            for j in range(k):
                if (idx // pw[j]) % n != cv[j]:
                    v += wv[j]
            o[idx] = v
    return out


def wf_update(src, Py_ssize_t n, Py_ssize_t k, w, Py_ssize_t p):
    cdef int64_t[::1] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef int64_t[::1] wv = np.asarray(w, dtype=np.int64)
    cdef int64_t[::1] pw = np.asarray([n ** (k - 1 - j) for j in range(k)], dtype=np.int64)
    dst = np.empty(s.shape[0], dtype=np.int64)
    cdef int64_t[::1] d = dst
    with nogil:
        _update(s, d, n, k, wv, pw, p)
    return dst


def wf_advance(vals, Py_ssize_t n, Py_ssize_t k, w, requests):
    a = np.array(vals, dtype=np.int64, copy=True)
    b = np.empty_like(a)
    cdef int64_t[::1] x = a
    cdef int64_t[::1] y = b
    cdef int64_t[::1] tmp
    cdef int64_t[::1] wv = np.asarray(w, dtype=np.int64)
    cdef int64_t[::1] pw = np.asarray([n ** (k - 1 - j) for j in range(k)], dtype=np.int64)
    cdef int64_t[::1] req = np.ascontiguousarray(requests, dtype=np.int64)
    cdef Py_ssize_t t, m = req.shape[0]
    with nogil:
        for t in range(m):
            _update(x, y, n, k, wv, pw, req[t])
            tmp = x
            x = y
            y = tmp
    return np.asarray(x)


def wfa_run(vals, Py_ssize_t n, Py_ssize_t k, w, int64_t lam_num, int64_t lam_den,
            Py_ssize_t cur, requests, Py_ssize_t start, Py_ssize_t stop,
            Py_ssize_t stop_level, out):
    a = np.array(vals, dtype=np.int64, copy=True)
    b = np.empty_like(a)
    cdef int64_t[::1] x = a
    cdef int64_t[::1] y = b
    cdef int64_t[::1] tmp
    cdef int64_t[::1] wv = np.asarray(w, dtype=np.int64)
    cdef int64_t[::1] pw = np.asarray([n ** (k - 1 - j) for j in range(k)], dtype=np.int64)
    cdef int64_t[::1] req = requests
    cdef int64_t[::1] o
    cdef bint record = out is not None
    if record:
        o = out
    cdef Py_ssize_t size = x.shape[0], t = start, idx, j, dj, p, best_idx, moved
    cdef int64_t cost = 0, d, score, best_score = 0, best_d = 0
    cdef bint hit
    cdef int64_t cd[64]
    cdef char used[4096]
    if k > 64:
        raise ValueError("compiled kernel supports k <= 64")
    with nogil:
        while t < stop:
            for j in range(k):
                cd[j] = (cur // pw[j]) % n
            p = req[t]
            if p < 0:
                p = 0
                if n <= 4096:
                    for j in range(n):
                        used[j] = 0
                    for j in range(k):
                        used[cd[j]] = 1
                    for j in range(n):
                        if not used[j]:
                            p = j
                            break
                req[t] = p
            _update(x, y, n, k, wv, pw, p)
            tmp = x
            x = y
            y = tmp
            best_idx = -1
            for idx in range(size):
                d = 0
                hit = False
                for j in range(k):
                    dj = (idx // pw[j]) % n
                    if dj == p:
                        hit = True
                    if dj != cd[j]:
                        d += wv[j]
                if not hit:
                    continue
                score = lam_den * x[idx] + lam_num * d
                if best_idx < 0 or score < best_score or (score == best_score and d < best_d):
                    best_idx = idx
                    best_score = score
                    best_d = d
            moved = 0
            for j in range(k):
                if (best_idx // pw[j]) % n != cd[j]:
                    moved = j + 1
            cost += best_d
            cur = best_idx
            if record:
                o[t] = cur
            t += 1
            if moved >= stop_level:
                break
    return np.asarray(x), cur, t, cost
