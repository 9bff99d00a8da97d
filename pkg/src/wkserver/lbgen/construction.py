"""The recursive point-set construction behind the lower bound.

``T_l(P)`` is a request sequence on ``n_{l+1}`` points whose level-``l``
root interval has every point of ``P`` as a singleton in its request list:
whichever point an ancestor holds, the subtree can serve the rest.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from ..patterns import ServicePattern


@lru_cache(maxsize=None)
def n_seq(i: int) -> int:
    """``n_2 = 2`` and ``n_{i+1} = (ceil(n_i/2)+1) (floor(n_i/2)+1)``."""
    if i < 2:
        raise ValueError(f"construction sizes start at n_2, got i={i}")
    if i == 2:
        return 2
    m = n_seq(i - 1)
    return (-(-m // 2) + 1) * (m // 2 + 1)


def mask_sizes(n_i: int) -> tuple[int, int]:
    """``(|M|, |Q_q|)`` for sets of size ``n_i`` built from ``n_{i+1}`` points."""
    return -(-n_i // 2) + 1, n_i // 2


def priority_order(points, seed: int | None) -> list:
    """Points in their decision order: ascending ids, or a seeded shuffle."""
    pts = sorted(points)
    if seed is not None:
        random.Random(seed).shuffle(pts)
    return pts


@dataclass(frozen=True)
class MaskDecomposition:
    points: tuple          # P' in decision order
    mask: tuple            # M in decision order
    q_sets: dict           # q -> Q_q (tuple in decision order)

    def P(self, q: int) -> frozenset:
        """``P_q = (M minus {q}) union Q_q``."""
        return frozenset(self.mask).difference([q]).union(self.q_sets[q])

    def owner(self, p: int) -> int | None:
        """The ``q`` with ``p`` in ``Q_q``, or ``None`` for mask points."""
        for q, qs in self.q_sets.items():
            if p in qs:
                return q
        return None

    def avoiders(self, p: int) -> list:
        """All ``q`` (in decision order) with ``p`` outside ``P_q``."""
        return [q for q in self.mask if p not in self.P(q)]

    def avoid(self, p: int) -> int:
        """First ``q`` in decision order whose ``P_q`` misses ``p``.

        Points outside ``P'`` are missed by every ``P_q``.
        """
        return self.avoiders(p)[0]

    def partner(self, p: int) -> int:
        """A point ``pbar`` such that every ``P_q`` holds ``p`` or ``pbar``."""
        if p in self.q_sets:
            return self.q_sets[p][0]
        q = self.owner(p)
        if q is None:
            raise KeyError(f"{p} is not in the decomposed set")
        return q

    def verify(self) -> None:
        pts = set(self.points)
        sizes = {len(self.P(q)) for q in self.mask}
        if len(sizes) != 1:
            raise AssertionError(f"P_q sizes differ: {sizes}")
        for p in pts:
            if not self.avoiders(p):
                raise AssertionError(f"no P_q avoids {p}")
            pb = self.partner(p)
            if any(p not in self.P(q) and pb not in self.P(q) for q in self.mask):
                raise AssertionError(f"partner {pb} of {p} misses some P_q")


def decompose(points: Sequence[int], n_i: int, seed: int | None = None, order: Sequence[int] | None = None
              ) -> MaskDecomposition:
    """Split ``n_{i+1}`` points into a mask and per-mask-point satellites.

    The mask takes the first ``ceil(n_i/2)+1`` points in decision order and
    each mask point, in order, takes the next ``floor(n_i/2)`` points.  The
    decision order is ``order`` restricted to ``points`` if given, else the
    seeded order of :func:`priority_order`.
    """
    m, qs = mask_sizes(n_i)
    if len(set(points)) != m * (qs + 1):
        raise ValueError(f"decompose needs {m * (qs + 1)} points for n_i={n_i}, got {len(set(points))}")
    if order is not None:
        pset = set(points)
        pts = [p for p in order if p in pset]
    else:
        pts = priority_order(points, seed)
    mask = tuple(pts[:m])
    rest = pts[m:]
    q_sets = {q: tuple(rest[j * qs:(j + 1) * qs]) for j, q in enumerate(mask)}
    d = MaskDecomposition(tuple(pts), mask, q_sets)
    d.verify()
    return d


@dataclass(frozen=True)
class LowerBoundTree:
    level: int
    points: tuple
    children: tuple
    requests: tuple
    decomposition: MaskDecomposition | None
    pattern: ServicePattern

    @property
    def size(self) -> int:
        return len(self.requests)


def build_tree(level: int, points: Sequence[int], seed: int | None = None) -> LowerBoundTree:
    """``T_level(P)`` with its pattern; the pattern adds one level-``level+1`` root."""
    return _build(level, tuple(priority_order(points, seed)), seed)


def _build(level: int, pts: tuple, seed) -> LowerBoundTree:
    need = n_seq(level + 1)
    if len(set(pts)) != need:
        raise ValueError(f"T_{level} needs {need} points, got {len(set(pts))}")
    if level == 1:
        reqs = tuple(pts)
        return LowerBoundTree(1, pts, (), reqs, None, _pattern(1, [[len(reqs)]], len(reqs)))
    d = decompose(pts, n_seq(level), order=pts)
    kids = tuple(_build(level - 1, tuple(p for p in pts if p in d.P(q)), seed) for q in d.mask)
    reqs = tuple(r for c in kids for r in c.requests)
    # block ends per level: the ends of each child's blocks, shifted
    ends = [[] for _ in range(level)]
    off = 0
    for c in kids:
        for lv in range(level - 1):
            ends[lv].extend(off + e for e in _block_ends(c, lv + 1))
        off += c.size
    ends[level - 1] = [off]
    return LowerBoundTree(level, pts, kids, reqs, d, _pattern(level, ends, off))


def _block_ends(tree: LowerBoundTree, level: int) -> list:
    """Last request time of each level-``level`` block inside ``tree``."""
    if level == tree.level:
        return [tree.size]
    out = []
    off = 0
    for c in tree.children:
        out.extend(off + e for e in _block_ends(c, level))
        off += c.size
    return out


def _pattern(level: int, ends: list, T: int) -> ServicePattern:
    # a block ending at time e is followed by one starting at e+1
    levels = [sorted({0, T + 1, *(e + 1 for e in lv)}) for lv in ends]
    levels.append([0, T + 1])
    return ServicePattern(T, tuple(tuple(lv) for lv in levels))
