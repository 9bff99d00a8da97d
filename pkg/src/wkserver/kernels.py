"""Kernel selection: compiled int64 loops when available and safe, else Python.

Set ``WKSERVER_PURE_PYTHON=1`` to force the fallback.  Values that could
leave the int64 range always take the Python-integer path, so results are
exact either way.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("WKSERVER_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

INT64_SAFE = 1 << 62


def compiled_available() -> bool:
    return _ckernels is not None


def backend_name() -> str:
    return "cython" if _ckernels is not None else "python"


def _fits(bound: int) -> bool:
    return _ckernels is not None and bound < INT64_SAFE


def _vmax(vals) -> int:
    if isinstance(vals, np.ndarray):
        return int(vals.max()) if vals.size else 0
    return max(vals) if vals else 0


def as_list(vals) -> list:
    return vals.tolist() if isinstance(vals, np.ndarray) else vals


def init_table(n: int, k: int, w: tuple, c0: tuple):
    c0z = [c - 1 for c in c0]
    if _fits(sum(w)):
        return _ckernels.init_table(n, k, w, c0z)
    return _pykernels.init_table(n, k, list(w), c0z)


def advance(vals, n: int, k: int, w: tuple, requests, *, force_python: bool = False):
    """Apply a batch of 1-based requests to a table."""
    reqs = [p - 1 for p in requests]
    if not reqs:
        return vals
    bound = _vmax(vals) + 2 * w[0] * len(reqs) + sum(w)
    if not force_python and _fits(bound):
        return _ckernels.wf_advance(np.asarray(vals, dtype=np.int64), n, k, w, np.asarray(reqs, dtype=np.int64))
    return _pykernels.wf_advance(as_list(vals), n, k, list(w), reqs)


def wfa_run(vals, n: int, k: int, w: tuple, lam: tuple, cur: int, requests: np.ndarray,
            start: int, stop: int, stop_level: int, out=None, *, force_python: bool = False):
    """Run WFA over ``requests[start:stop]`` (0-based points, ``-1`` adaptive).

    ``requests`` must be an int64 array; adaptive entries are filled in.
    Returns ``(vals, cur, next_t, cost)``.
    """
    lam_num, lam_den = lam
    steps = stop - start
    bound = lam_den * (_vmax(vals) + 2 * w[0] * steps + sum(w)) + lam_num * sum(w) + sum(w) * steps
    if not force_python and _fits(bound):
        return _ckernels.wfa_run(np.asarray(vals, dtype=np.int64), n, k, w, lam_num, lam_den,
                                 cur, requests, start, stop, stop_level, out)
    vals, cur, t, cost = _pykernels.wfa_run(as_list(vals), n, k, list(w), lam_num, lam_den, cur,
                                            _ReqView(requests), start, stop, stop_level,
                                            None if out is None else _ReqView(out))
    return vals, cur, t, cost


class _ReqView:
    """Python-int view of an int64 array for the fallback loop."""

    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def __getitem__(self, i):
        return int(self.a[i])

    def __setitem__(self, i, v):
        self.a[i] = v
