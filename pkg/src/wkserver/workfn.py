"""Exact work functions over dense configuration tables.

A flat table stores ``WF_t(C)`` for all ``n**k`` configurations as integers
in units of ``1 / weights.scale()``; lookups return :class:`Fraction`.  The
one-step recurrence only needs single-server replacements::

    WF_t(C) = WF_{t-1}(C)                               if C serves p
    WF_t(C) = min_j WF_{t-1}(C with s_j at p) + w_j     otherwise

which follows from the 1-Lipschitz property of the previous table.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .core import (CapacityError, DimensionError, WeightProfile, class_distance, cost_str,
                   make_class_configuration, wfa_weight_check)

DEFAULT_LIMIT = 2_000_000
INF = math.inf


def capacity_limit(limit: int | None = None) -> int:
    if limit is not None:
        return int(limit)
    env = os.environ.get("WKSERVER_LIMIT")
    return int(env) if env else DEFAULT_LIMIT


def _check_capacity(size: int, limit: int | None):
    lim = capacity_limit(limit)
    if size > lim:
        raise CapacityError(f"table of {size} configurations exceeds limit {lim}")


class WorkFunctionTable:
    """Immutable snapshot of ``WF_t`` over ``{1..n}^k``."""

    __slots__ = ("n", "weights", "c0", "t", "_vals", "_w")

    def __init__(self, n, weights, c0, t, vals):
        self.n = n
        self.weights = weights
        self.c0 = tuple(c0)
        self.t = t
        self._vals = vals
        self._w = weights.scaled()

    @property
    def k(self) -> int:
        return self.weights.k

    @property
    def size(self) -> int:
        return self.n ** self.k

    def index(self, config: Sequence[int]) -> int:
        if len(config) != self.k:
            raise DimensionError(f"configuration {tuple(config)} for k={self.k}")
        idx = 0
        for c in config:
            if not 1 <= c <= self.n:
                raise ValueError(f"point {c} outside 1..{self.n}")
            idx = idx * self.n + (c - 1)
        return idx

    def config(self, idx: int) -> tuple:
        out = []
        for _ in range(self.k):
            out.append(idx % self.n + 1)
            idx //= self.n
        return tuple(reversed(out))

    def _frac(self, v) -> Fraction:
        return Fraction(int(v), self.weights.scale())

    def __getitem__(self, config) -> Fraction:
        return self._frac(self._vals[self.index(config)])

    def raw(self):
        """Scaled integer values (numpy int64 or list of Python ints)."""
        return self._vals

    def items(self):
        for idx, v in enumerate(kernels.as_list(self._vals)):
            yield self.config(idx), self._frac(v)

    def min_value(self) -> Fraction:
        return self._frac(_vmin(self._vals))

    def pinned(self, p: int) -> Fraction:
        """Minimum over configurations with the heaviest server at ``p``."""
        return self._frac(_vmin(self._vals[p - 1::self.n]))

    def pinned_argmin(self, p: int) -> tuple:
        """Cheapest configuration with ``C(k) = p``; lexicographic tie-break."""
        sl = self._vals[p - 1::self.n]
        if isinstance(sl, np.ndarray):
            j = int(np.argmin(sl))
        else:
            j = min(range(len(sl)), key=sl.__getitem__)
        return self.config(j * self.n + p - 1)

    def to_text(self) -> str:
        """Sorted ``configuration -> cost`` lines with exact rational strings."""
        lines = [" ".join(map(str, c)) + " " + cost_str(v) for c, v in self.items()]
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, WorkFunctionTable):
            return NotImplemented
        return (self.n, self.weights, self.t) == (other.n, other.weights, other.t) and \
            kernels.as_list(self._vals) == kernels.as_list(other._vals)

    def __repr__(self):
        return f"WorkFunctionTable(n={self.n}, k={self.k}, t={self.t})"


def _vmin(vals) -> int:
    if isinstance(vals, np.ndarray):
        return int(vals.min())
    return min(vals)


def init_wf(n: int, weights: WeightProfile, c0: Sequence[int], limit: int | None = None) -> WorkFunctionTable:
    """Table at time 0: ``WF_0(C) = d(C_0, C)``."""
    if len(c0) != weights.k:
        raise DimensionError(f"initial configuration {tuple(c0)} for k={weights.k}")
    if any(not 1 <= c <= n for c in c0):
        raise ValueError(f"initial configuration {tuple(c0)} outside 1..{n}")
    _check_capacity(n ** weights.k, limit)
    vals = kernels.init_table(n, weights.k, weights.scaled(), tuple(c0))
    return WorkFunctionTable(n, weights, c0, 0, vals)


def update_wf(tbl: WorkFunctionTable, p: int) -> WorkFunctionTable:
    return advance_wf(tbl, [p])


def advance_wf(tbl: WorkFunctionTable, requests: Iterable[int]) -> WorkFunctionTable:
    reqs = list(requests)
    for p in reqs:
        if not 1 <= p <= tbl.n:
            raise ValueError(f"request {p} outside 1..{tbl.n}")
    vals = kernels.advance(tbl.raw(), tbl.n, tbl.k, tbl._w, reqs)
    return WorkFunctionTable(tbl.n, tbl.weights, tbl.c0, tbl.t + len(reqs), vals)


def min_wf(tbl: WorkFunctionTable) -> Fraction:
    return tbl.min_value()


def pinned_wf(tbl: WorkFunctionTable, p: int) -> Fraction:
    return tbl.pinned(p)


def opt_cost(requests: Sequence[int], c0: Sequence[int], weights: WeightProfile,
             n: int | None = None, limit: int | None = None) -> Fraction:
    """Offline optimum: minimum of the table after all requests."""
    if n is None:
        n = max([*requests, *c0], default=1)
    return min_wf(advance_wf(init_wf(n, weights, c0, limit), requests))


def static_wf(requests: Sequence[int], start: Sequence[int], p: int, weights: WeightProfile,
              t1: int = 0, t2: int | None = None, n: int | None = None):
    """Cheapest service of ``requests[t1:t2]`` with the heaviest server fixed at ``p``.

    Lighter servers start at ``start[:k-1]`` (the heavy entry of ``start`` is
    ignored).  Returns ``math.inf`` when ``k == 1`` and some request is not ``p``.
    """
    k = weights.k
    if len(start) != k:
        raise DimensionError(f"start configuration {tuple(start)} for k={k}")
    if t2 is None:
        t2 = len(requests)
    if not 0 <= t1 <= t2 <= len(requests):
        raise ValueError(f"bad window [{t1}, {t2}] for {len(requests)} requests")
    rest = [q for q in requests[t1:t2] if q != p]
    if not rest:
        return Fraction(0)
    if k == 1:
        return INF
    if n is None:
        n = max([*requests, *start, p])
    light = WeightProfile(weights.weights[:-1])
    tbl = advance_wf(init_wf(n, light, start[:-1]), rest)
    return tbl.min_value()


def swf_start(tbl: WorkFunctionTable, p: int) -> tuple:
    """Start state for per-phase static work functions pinned at ``p``."""
    return tbl.pinned_argmin(p)


# ---------------------------------------------------------------- phases

@dataclass(frozen=True)
class PhaseRecord:
    start: int
    end: int
    heavy: object
    completed: bool
    m_start: Fraction
    m_end: Fraction
    wf_start: Fraction
    wf_end: Fraction
    delta_swf: dict = field(repr=False)
    lucky: frozenset = frozenset()
    violations: tuple = ()

    @property
    def delta_m(self) -> Fraction:
        return self.m_end - self.m_start

    @property
    def delta_wf(self) -> Fraction:
        return self.wf_end - self.wf_start


def _heavy_positions(transcript, n, k, c0):
    arr = np.asarray(transcript)
    if arr.ndim == 1:
        heavy = arr % n + 1          # index form: last digit is server k
    else:
        heavy = arr[:, k - 1] if arr.size else np.zeros(0, dtype=np.int64)
    return np.concatenate([[c0[k - 1]], heavy]).astype(np.int64)


def phase_diagnostics(transcript, requests: Sequence[int], c0: Sequence[int], weights: WeightProfile,
                      n: int | None = None, dichotomy_n=None) -> list[PhaseRecord]:
    """Split a run into phases at heavy-server moves and check the phase invariants.

    ``transcript[t-1]`` is the algorithm's configuration after serving
    ``requests[t-1]``; it may also be given as an int array of table indices.
    ``dichotomy_n`` is the dichotomy constant ``n_k`` in log2 form (int
    exponent or BoundValue); it sets the lucky threshold ``w_k/(4 k n_k)``.
    The inequality checks assume a WFA_0.5 transcript; the lower bound of the
    phase-growth bound and the WF/SWF agreement are only checked when the
    weights pass :func:`wfa_weight_check`.
    """
    from .bounds import dichotomy_constants

    k = weights.k
    T = len(requests)
    if len(transcript) != T:
        raise ValueError(f"transcript has {len(transcript)} steps for {T} requests")
    if n is None:
        n = max([*requests, *c0])
    ns = dichotomy_constants(k)
    if dichotomy_n is not None:
        ns[k] = dichotomy_n
    separated = wfa_weight_check(weights, ns)
    coef, exp = _coef_exp(ns[k])
    wk = weights.weights[-1]
    Wk1 = weights.prefix(k - 1)
    lucky_bar = wk / (4 * k * coef)     # still to divide by 2**exp

    heavy = _heavy_positions(transcript, n, k, c0)
    cuts = [t for t in range(1, T + 1) if heavy[t] != heavy[t - 1]]
    bounds_ = [0, *cuts]
    if bounds_[-1] != T:
        bounds_.append(T)
    reqs = list(requests)

    records = []
    tbl = init_wf(n, weights, c0)
    for i in range(len(bounds_) - 1):
        t1, t2 = bounds_[i], bounds_[i + 1]
        completed = t2 in cuts
        p = int(heavy[t1])
        end = advance_wf(tbl, reqs[t1:t2])
        m1, m2 = tbl.min_value(), end.min_value()
        dswf = {}
        for q in range(1, n + 1):
            dswf[q] = static_wf(reqs, swf_start(tbl, q), q, weights, t1, t2, n=n)
        lucky = frozenset(q for q, v in dswf.items() if _below_pow2(v, lucky_bar, exp))
        viol = []
        wf1, wf2 = tbl.pinned(p), end.pinned(p)
        if not (m1 <= wf1 <= m1 + Wk1):
            viol.append("phase-start")
        if not (wf2 - wf1 <= (m2 - m1) + wk / 2 + 2 * Wk1):
            viol.append("phase-growth-upper")
        if completed and separated:
            if not (wf2 - wf1 >= wk / 2 - 2 * Wk1):
                viol.append("phase-growth-lower")
            if not (abs((wf2 - wf1) - dswf[p]) <= Wk1):
                viol.append("wf-swf")
        for q in range(1, n + 1):
            lhs = end.pinned(q)
            rhs = min(tbl.pinned(q) + dswf[q] - Wk1, m1 + wk)
            if lhs < rhs:
                viol.append(f"wf-vs-swf@{q}")
        if completed and separated and _exceeds_pow2(len(lucky), coef, exp):
            viol.append("lucky-set")
        records.append(PhaseRecord(t1, t2, p, completed, m1, m2, wf1, wf2, dswf, lucky, tuple(viol)))
        tbl = end
    return records


def _coef_exp(x):
    if isinstance(x, int):
        return 1, x
    return int(x.coef), int(x.exp)


def _below_pow2(v, bar: Fraction, exp: int) -> bool:
    """``v < bar / 2**exp`` exactly (``v`` may be ``inf``)."""
    if v == INF:
        return False
    v = Fraction(v)
    return (v.numerator * bar.denominator) << exp < bar.numerator * v.denominator


def _exceeds_pow2(m: int, coef: int, exp: int) -> bool:
    if m.bit_length() <= exp:
        return False
    return m > coef << exp


# ---------------------------------------------------------------- classes

class ClassWorkFunctionTable:
    """``WF_t`` over class configurations with the lump-charge distance."""

    __slots__ = ("n", "weights", "c0", "t", "domain", "_pos", "values")

    def __init__(self, n, weights, c0, t, domain, pos, values):
        self.n = n
        self.weights = weights
        self.c0 = c0
        self.t = t
        self.domain = domain
        self._pos = pos
        self.values = values

    def __getitem__(self, config) -> Fraction:
        key = tuple(frozenset(s) for s in config)
        return self.values[self._pos[key]]

    def items(self):
        return zip(self.domain, self.values)

    def min_value(self) -> Fraction:
        return min(self.values)

    def pinned(self, heavy_set) -> Fraction:
        """Minimum over class configurations whose heaviest class sits at ``heavy_set``."""
        hs = frozenset(heavy_set)
        return min(v for c, v in zip(self.domain, self.values) if c[-1] == hs)

    def pinned_argmin(self, heavy_set) -> tuple:
        hs = frozenset(heavy_set)
        best = None
        for c, v in zip(self.domain, self.values):
            if c[-1] == hs and (best is None or v < best[1]):
                best = (c, v)
        return best[0]

    def to_text(self) -> str:
        lines = []
        for c, v in self.items():
            lines.append(" | ".join(",".join(map(str, sorted(s))) for s in c) + " " + cost_str(v))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"ClassWorkFunctionTable(n={self.n}, counts={self.weights.counts}, t={self.t})"


def class_domain(n: int, counts: Sequence[int]) -> list:
    per = [[frozenset(s) for s in itertools.combinations(range(1, n + 1), c)] for c in counts]
    return [tuple(x) for x in itertools.product(*per)]


def class_init_wf(n: int, weights: WeightProfile, c0, limit: int | None = None) -> ClassWorkFunctionTable:
    if weights.counts is None:
        raise DimensionError("class tables need a class-structured profile")
    c0 = make_class_configuration(c0, weights.counts, n)
    size = math.prod(math.comb(n, c) for c in weights.counts)
    _check_capacity(size, limit)
    domain = class_domain(n, weights.counts)
    pos = {c: i for i, c in enumerate(domain)}
    values = [class_distance(c0, c, weights) for c in domain]
    return ClassWorkFunctionTable(n, weights, c0, 0, domain, pos, values)


def class_update_wf(tbl: ClassWorkFunctionTable, p: int) -> ClassWorkFunctionTable:
    if not 1 <= p <= tbl.n:
        raise ValueError(f"request {p} outside 1..{tbl.n}")
    w = tbl.weights
    lumps = [c * wi for c, wi in zip(w.counts, w.class_weights)]
    with_p = [[frozenset(s) | {p} for s in itertools.combinations(
        [q for q in range(1, tbl.n + 1) if q != p], c - 1)] for c in w.counts]
    old = tbl.values
    new = []
    for c, v in zip(tbl.domain, old):
        if any(p in s for s in c):
            new.append(v)
            continue
        best = None
        for i, sets in enumerate(with_p):
            for s in sets:
                cand = old[tbl._pos[c[:i] + (s,) + c[i + 1:]]] + lumps[i]
                if best is None or cand < best:
                    best = cand
        new.append(best)
    return ClassWorkFunctionTable(tbl.n, w, tbl.c0, tbl.t + 1, tbl.domain, tbl._pos, new)


def class_advance_wf(tbl: ClassWorkFunctionTable, requests: Iterable[int]) -> ClassWorkFunctionTable:
    for p in requests:
        tbl = class_update_wf(tbl, p)
    return tbl


def class_opt_cost(requests, c0, weights: WeightProfile, n: int, limit: int | None = None) -> Fraction:
    return class_advance_wf(class_init_wf(n, weights, c0, limit), requests).min_value()


def class_static_wf(requests: Sequence[int], start, heavy_set, weights: WeightProfile, n: int,
                    t1: int = 0, t2: int | None = None):
    """Static work function with the heaviest class fixed at ``heavy_set``."""
    hs = frozenset(heavy_set)
    if t2 is None:
        t2 = len(requests)
    rest = [q for q in requests[t1:t2] if q not in hs]
    if not rest:
        return Fraction(0)
    if weights.d == 1:
        return INF
    light = WeightProfile.from_classes(weights.class_weights[:-1], weights.counts[:-1])
    tbl = class_advance_wf(class_init_wf(n, light, tuple(start)[:-1]), rest)
    return tbl.min_value()
