"""Pure-Python work-function kernels.

Reference implementation of the hot loops; ``_ckernels.pyx`` mirrors these
signatures for int64 tables.  Tables are flat sequences indexed by the
mixed-radix code ``sum_j (C[j]-1) * n**(k-1-j)``, so server 1 is the most
significant digit and index order is lexicographic placement order.  Points
inside kernels are 0-based; a request of ``-1`` means "adaptive": request the
lowest point not covered by the current configuration.
"""


def powers(n, k):
    return [n ** (k - 1 - j) for j in range(k)]


def digits(idx, n, k):
    out = [0] * k
    for j in range(k - 1, -1, -1):
        out[j] = idx % n
        idx //= n
    return out


def init_table(n, k, w, c0):
    """``WF_0(C) = d(C_0, C)`` for every configuration."""
    pw = powers(n, k)
    size = n ** k
    vals = [0] * size
    for idx in range(size):
        v = 0
        for j in range(k):
            if (idx // pw[j]) % n != c0[j]:
                v += w[j]
        vals[idx] = v
    return vals


def wf_update(src, n, k, w, p):
    """One work-function step for a request at 0-based point ``p``."""
    pw = powers(n, k)
    size = len(src)
    dst = [0] * size
    for idx in range(size):
        best = None
        for j in range(k):
            dj = (idx // pw[j]) % n
            if dj == p:
                best = src[idx]
                break
            v = src[idx + (p - dj) * pw[j]] + w[j]
            if best is None or v < best:
                best = v
        dst[idx] = best
    return dst


def wf_advance(vals, n, k, w, requests):
    for p in requests:
        vals = wf_update(vals, n, k, w, p)
    return vals


def _lowest_uncovered(cur, n, k, pw):
    used = set((cur // pw[j]) % n for j in range(k))
    for q in range(n):
        if q not in used:
            return q
    return 0


def wfa_run(vals, n, k, w, lam_num, lam_den, cur, requests, start, stop, stop_level, out):
    """Run the generalized WFA from ``requests[start]`` until ``stop``.

    Stops early right after a step where a server with 1-based index
    ``>= stop_level`` moved.  Adaptive requests are written back into
    ``requests``; chosen configuration indices go to ``out`` when given.
    Returns ``(vals, cur, next_t, cost)`` with ``cost`` in scaled units.
    """
    pw = powers(n, k)
    size = len(vals)
    cost = 0
    t = start
    while t < stop:
        p = requests[t]
        if p < 0:
            p = _lowest_uncovered(cur, n, k, pw)
            requests[t] = p
        vals = wf_update(vals, n, k, w, p)
        cd = [(cur // pw[j]) % n for j in range(k)]
        best_idx = -1
        best_score = best_d = 0
        for idx in range(size):
            d = 0
            hit = False
            for j in range(k):
                dj = (idx // pw[j]) % n
                if dj == p:
                    hit = True
                if dj != cd[j]:
                    d += w[j]
            if not hit:
                continue
            score = lam_den * vals[idx] + lam_num * d
            if best_idx < 0 or score < best_score or (score == best_score and d < best_d):
                best_idx, best_score, best_d = idx, score, d
        moved = 0
        for j in range(k):
            if (best_idx // pw[j]) % n != cd[j]:
                moved = j + 1
        cost += best_d
        cur = best_idx
        if out is not None:
            out[t] = cur
        t += 1
        if moved >= stop_level:
            break
    return vals, cur, t, cost
