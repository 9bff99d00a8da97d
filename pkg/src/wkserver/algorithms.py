"""Online algorithms behind one small stepping contract.

Every algorithm keeps its configuration and accumulated cost and exposes
``step(p)``; the adversary in :mod:`wkserver.lbgen` drives any of them.
"""

from __future__ import annotations

import random
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .core import WeightProfile, as_cost, class_distance, distance, make_class_configuration, serves
from .workfn import (ClassWorkFunctionTable, WorkFunctionTable, class_init_wf, class_update_wf,
                     init_wf)


class ProtocolError(RuntimeError):
    """An algorithm returned a configuration that does not serve the request."""


class OnlineAlgorithm(ABC):
    name = "abstract"

    def __init__(self, n: int, weights: WeightProfile, c0: Sequence):
        self.n = n
        self.weights = weights
        self.config = tuple(c0)
        self.cost = Fraction(0)
        self.t = 0

    @abstractmethod
    def _choose(self, p: int) -> tuple:
        ...

    def _distance(self, a, b) -> Fraction:
        return distance(a, b, self.weights)

    def step(self, p: int) -> tuple:
        if not 1 <= p <= self.n:
            raise ValueError(f"request {p} outside 1..{self.n}")
        new = tuple(self._choose(p))
        if not serves(new, p):
            raise ProtocolError(f"{self.name} moved to {new}, which does not serve {p}")
        self.cost += self._distance(self.config, new)
        self.config = new
        self.t += 1
        return new

    def run(self, requests: Sequence[int]) -> list:
        return [self.step(p) for p in requests]

    def __repr__(self):
        return f"{type(self).__name__}(t={self.t}, config={self.config}, cost={self.cost})"


class WFA(OnlineAlgorithm):
    """Generalized work function algorithm ``argmin WF_t(C) + lam * d(C, C_{t-1})``.

    Ties go to the current configuration, then the smallest moved weight,
    then the lexicographically smallest placement.  The argmin ranges over
    configurations that serve the request.
    """

    name = "wfa"

    def __init__(self, n, weights, c0, lam=Fraction(1, 2), limit=None):
        super().__init__(n, weights, c0)
        lam = as_cost(lam)
        if not 0 < lam <= 1:
            raise ValueError(f"lambda must lie in (0, 1], got {lam}")
        self.lam = lam
        self.table: WorkFunctionTable = init_wf(n, weights, self.config, limit)
        self._w = weights.scaled()
        self._cur = self.table.index(self.config)

    def _choose(self, p):
        req = np.array([p - 1], dtype=np.int64)
        self._advance(req, 0, 1, self.weights.k + 1)
        return self.table.config(self._cur)

    def _advance(self, req, start, stop, stop_level, out=None):
        vals, cur, t, _ = kernels.wfa_run(self.table.raw(), self.n, self.weights.k, self._w,
                                          (self.lam.numerator, self.lam.denominator), self._cur,
                                          req, start, stop, stop_level, out)
        self.table = WorkFunctionTable(self.n, self.weights, self.table.c0, self.table.t + (t - start), vals)
        self._cur = cur
        return t

    def run_batch(self, requests: Sequence[int], record: bool = True):
        """Serve a fixed sequence inside the kernel; returns configuration indices."""
        req = np.asarray([p - 1 for p in requests], dtype=np.int64)
        return self._run_array(req, record)

    def run_cruel(self, steps: int, heavy_moves: int | None = None, record: bool = True):
        """Always request the lowest point no server covers (needs ``n > k``).

        Stops after ``steps`` requests or right after the heaviest server has
        moved ``heavy_moves`` times.  Returns ``(requests, transcript)`` where
        the transcript holds table indices of the chosen configurations.
        """
        if self.n <= self.weights.k:
            raise ValueError("adaptive requests need n > k")
        req = np.full(steps, -1, dtype=np.int64)
        out = np.zeros(steps, dtype=np.int64) if record else None
        k = self.weights.k
        t = 0
        moves = 0
        while t < steps:
            stop_level = k if heavy_moves is not None else k + 1
            before = self.config
            t_next = self._advance_tracked(req, t, steps, stop_level, out, before)
            t = t_next
            if heavy_moves is not None and self.config[-1] != before[-1]:
                moves += 1
                if moves >= heavy_moves:
                    break
        return (req[:t] + 1).tolist(), (out[:t] if record else None)

    def _run_array(self, req, record):
        out = np.zeros(len(req), dtype=np.int64) if record else None
        self._advance_tracked(req, 0, len(req), self.weights.k + 1, out, self.config)
        return out

    def _advance_tracked(self, req, start, stop, stop_level, out, before):
        vals, cur, t, cost = kernels.wfa_run(self.table.raw(), self.n, self.weights.k, self._w,
                                             (self.lam.numerator, self.lam.denominator), self._cur,
                                             req, start, stop, stop_level, out)
        self.table = WorkFunctionTable(self.n, self.weights, self.table.c0, self.table.t + (t - start), vals)
        self._cur = cur
        self.config = self.table.config(cur)
        self.cost += Fraction(int(cost), self.weights.scale())
        self.t += t - start
        return t


class ClassWFA(OnlineAlgorithm):
    """WFA over class configurations with the lump-charge distance.

    ``cost`` accumulates the lump-charge distance the algorithm optimizes.
    """

    name = "wfa-class"

    def __init__(self, n, weights, c0, lam=Fraction(1, 2), limit=None):
        if weights.counts is None:
            raise ValueError("class WFA needs a class-structured profile")
        super().__init__(n, weights, make_class_configuration(c0, weights.counts, n))
        lam = as_cost(lam)
        if not 0 < lam <= 1:
            raise ValueError(f"lambda must lie in (0, 1], got {lam}")
        self.lam = lam
        self.table: ClassWorkFunctionTable = class_init_wf(n, weights, self.config, limit)

    def _distance(self, a, b):
        return class_distance(a, b, self.weights)

    def _choose(self, p):
        self.table = class_update_wf(self.table, p)
        cur = self.config
        best = None
        for c, v in self.table.items():
            if not any(p in s for s in c):
                continue
            d = class_distance(c, cur, self.weights)
            key = (v + self.lam * d, d, tuple(sorted(s) for s in c))
            if best is None or key < best[0]:
                best = (key, c)
        return best[1]


class Greedy(OnlineAlgorithm):
    """Move the lightest server to every uncovered request."""

    name = "greedy"

    def _choose(self, p):
        if p in self.config:
            return self.config
        return (p, *self.config[1:])


class Memoryless(OnlineAlgorithm):
    """On an uncovered request move server ``i`` with probability ``q_i``."""

    name = "memoryless"

    def __init__(self, n, weights, c0, q, seed=0):
        super().__init__(n, weights, c0)
        q = tuple(as_cost(x) for x in q)
        if len(q) != weights.k or any(x < 0 for x in q) or sum(q) != 1:
            raise ValueError(f"invalid move distribution {q}")
        self.q = q
        self.seed = seed
        self._rng = random.Random(seed)

    def _choose(self, p):
        if p in self.config:
            return self.config
        i = self._rng.choices(range(self.weights.k), weights=[float(x) for x in self.q])[0]
        c = list(self.config)
        c[i] = p
        return tuple(c)


def parse_algorithm_spec(spec: str) -> tuple[str, dict]:
    """Split ``"wfa:lambda=1/2"`` into ``("wfa", {"lambda": "1/2"})``."""
    name, _, rest = spec.partition(":")
    params = {}
    for part in filter(None, rest.split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise ValueError(f"malformed parameter {part!r} in {spec!r}")
        params[key.strip()] = val.strip()
    return name.strip(), params


ALGORITHMS = ("wfa", "wfa-class", "greedy", "memoryless")


def make_algorithm(spec: str, n: int, weights: WeightProfile, c0, limit=None) -> OnlineAlgorithm:
    """Build an algorithm from a harness spec string.

    ``wfa:lambda=1/2``, ``wfa-class:lambda=1/2``, ``greedy``,
    ``memoryless:q=1/4+3/4,seed=7``.
    """
    name, params = parse_algorithm_spec(spec)
    if name == "wfa":
        return WFA(n, weights, c0, Fraction(params.get("lambda", "1/2")), limit)
    if name == "wfa-class":
        return ClassWFA(n, weights, c0, Fraction(params.get("lambda", "1/2")), limit)
    if name == "greedy":
        return Greedy(n, weights, c0)
    if name == "memoryless":
        q = [Fraction(x) for x in params["q"].split("+")] if "q" in params else \
            [Fraction(1, weights.k)] * weights.k
        return Memoryless(n, weights, c0, q, int(params.get("seed", 0)))
    raise ValueError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
