"""Request lists: which point sets the ancestors of an interval must hold.

``L(I)`` is the antichain of inclusion-wise minimal sets ``S`` such that,
when the ancestors of ``I`` jointly hold ``S``, the subtree of ``I`` can be
labeled to serve every request inside ``I``.  The empty list means no such
``S`` fits the ancestors' capacity; ``{{}}`` means no help is needed.  Flat
patterns are the class case with every capacity equal to 1, so one engine
serves both.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Iterable, Sequence

from .core import CapacityError
from .patterns import PatternError, ServicePattern


class RequestList(frozenset):
    """Antichain of frozensets; non-minimal members are dropped on construction."""

    def __new__(cls, members: Iterable = ()):
        return super().__new__(cls, _antichain(frozenset(m) for m in members))

    @property
    def infeasible(self) -> bool:
        return not self

    @property
    def trivial(self) -> bool:
        return self == NO_HELP

    def by_size(self) -> dict:
        out = {}
        for s in self:
            out.setdefault(len(s), set()).add(s)
        return {t: frozenset(v) for t, v in sorted(out.items())}

    def to_text(self) -> str:
        if not self:
            return "infeasible"
        return " ".join("{" + ",".join(map(str, sorted(s))) + "}" for s in _sorted_sets(self))

    def __repr__(self):
        return f"RequestList({self.to_text()})"


def _sorted_sets(sets) -> list:
    return sorted(sets, key=lambda s: (len(s), sorted(s)))


def _antichain(sets) -> frozenset:
    out = []
    for s in sorted(set(sets), key=len):
        if not any(m <= s for m in out):
            out.append(s)
    return frozenset(out)


NO_HELP = frozenset([frozenset()])


class AllOfU:
    """Sentinel: every point is a feasible root label."""

    def __repr__(self):
        return "AllOfU"

    def __eq__(self, other):
        return isinstance(other, AllOfU)

    def __hash__(self):
        return hash("AllOfU")


ALL_OF_U = AllOfU()


# ----------------------------------------------------------------- list algebra

def leaf_list(points: Iterable[int], k: int, capacity: int = 1) -> RequestList:
    """List of a leaf interval requesting ``points``.

    ``k`` is the ancestors' capacity plus the leaf's own ``capacity`` (so the
    number of servers in flat mode).  The leaf label serves ``capacity``
    points; the ancestors must hold the rest.
    """
    pts = frozenset(points)
    cap = k - capacity
    need = len(pts) - capacity
    if need <= 0:
        return RequestList([frozenset()])
    if need > cap:
        return RequestList()
    return RequestList(frozenset(c) for c in combinations(sorted(pts), need))


def joint_list(children: Sequence[RequestList], cap: int) -> RequestList:
    """Minimal sets of size at most ``cap`` containing a member of every child list."""
    acc = {frozenset()}
    for child in children:
        acc = _antichain(s | x for s in acc for x in child if len(s | x) <= cap)
        if not acc:
            break
    return RequestList(acc)


def lift_list(joint: RequestList, capacity: int = 1) -> RequestList:
    """List of an interval whose children have joint list ``joint``.

    The interval's own label removes up to ``capacity`` points from a member.
    """
    out = []
    for s in joint:
        r = min(capacity, len(s))
        out.extend(s - frozenset(c) for c in combinations(sorted(s), r))
    return RequestList(out)


# ----------------------------------------------------------------- pipeline

def _requested(p: ServicePattern, sigma, level, idx) -> frozenset:
    return frozenset(sigma[t - 1] for t in p.request_times(level, idx))


def _check(p: ServicePattern, sigma):
    if not p.is_hierarchical():
        raise PatternError("request lists need a hierarchical pattern")
    if len(sigma) != p.T:
        raise PatternError(f"sequence of length {len(sigma)} for horizon {p.T}")


def pipeline_lists(p: ServicePattern, sigma: Sequence[int]) -> dict:
    """``L(I)`` for every interval, bottom-up through leaf, joint and lift steps."""
    _check(p, sigma)
    total = p.above(0)
    out = {}
    for idx in range(p.count(1)):
        out[(1, idx)] = leaf_list(_requested(p, sigma, 1, idx), total, p.capacity(1))
    for level in range(2, p.k + 1):
        for idx in range(p.count(level)):
            out[(level, idx)] = _cap(lift_list(joint_of(p, out, level, idx), p.capacity(level)), p.above(level))
    return out


def _cap(lst: RequestList, cap: int) -> RequestList:
    return RequestList(s for s in lst if len(s) <= cap)


def joint_of(p: ServicePattern, lists: dict, level: int, idx: int) -> RequestList:
    """Joint list of the children of ``(level, idx)``."""
    kids = [lists[(level - 1, j)] for j in p.children(level, idx)]
    return joint_list(kids, p.above(level - 1))


def root_labels(p: ServicePattern, sigma: Sequence[int], root: int = 0, lists: dict | None = None):
    """Feasible labels of the top-level interval ``root``.

    Returns :data:`ALL_OF_U` when the children need no help.  Otherwise flat
    mode gives the frozenset of points ``p`` with ``{p}`` in the children's
    joint list, and class mode gives that joint list split by size.  An
    infeasible subtree gives an empty result of the same shape.
    """
    if lists is None:
        lists = pipeline_lists(p, sigma)
    if p.k == 1:
        pts = _requested(p, sigma, 1, root)
        if not pts:
            return ALL_OF_U
        if len(pts) > p.capacity(1):
            return frozenset() if not p.class_mode else {}
        return frozenset(pts) if not p.class_mode else {len(pts): frozenset([pts])}
    joint = joint_of(p, lists, p.k, root)
    if joint.trivial:
        return ALL_OF_U
    if p.class_mode:
        return joint.by_size()
    return frozenset(x for s in joint for x in s)


# ----------------------------------------------------------------- oracle

BRUTE_LIMIT = 2_000_000


def _label_options(pts: frozenset, capacity: int) -> list:
    """Labels worth trying on an interval requesting ``pts``: subsets up to ``capacity``."""
    opts = []
    for r in range(min(capacity, len(pts)) + 1):
        opts.extend(frozenset(c) for c in combinations(sorted(pts), r))
    return opts


def brute_force_list(p: ServicePattern, sigma: Sequence[int], level: int, idx: int,
                     limit: int = BRUTE_LIMIT) -> RequestList:
    """``L(I)`` by exhaustive search over ancestor sets and subtree labelings.

    Labels are restricted to points requested inside their interval, which
    loses nothing: any other label serves no request.  Leaves are checked
    directly: after the ancestors and internal labels, at most ``k_1``
    distinct requests may remain.
    """
    _check(p, sigma)
    cap = p.above(level)
    inner = [(lv, j) for (lv, j) in p.subtree(level, idx) if lv > 1]
    leaves = [(lv, j) for (lv, j) in p.subtree(level, idx) if lv == 1]
    options = [_label_options(_requested(p, sigma, lv, j), p.capacity(lv)) for (lv, j) in inner]
    pts = sorted(_requested(p, sigma, level, idx))
    space = 1
    for o in options:
        space *= len(o)
    n_sets = sum(1 for r in range(min(cap, len(pts)) + 1) for _ in combinations(pts, r))
    if space * n_sets > limit:
        raise CapacityError(f"brute force over {space * n_sets} cases exceeds limit {limit}")
    leaf_times = {leaf: list(p.request_times(*leaf)) for leaf in leaves}
    # which inner intervals cover each leaf
    cover = {leaf: [i for i, (lv, j) in enumerate(inner) if p.locate(lv, p.interval(*leaf)[0]) == j]
             for leaf in leaves}

    def ok(S: frozenset) -> bool:
        for choice in product(*options):
            good = True
            for leaf in leaves:
                have = S.union(*(choice[i] for i in cover[leaf]))
                rest = {sigma[t - 1] for t in leaf_times[leaf]} - have
                if len(rest) > p.capacity(1):
                    good = False
                    break
            if good:
                return True
        return False

    found = []
    for r in range(min(cap, len(pts)) + 1):
        for c in combinations(pts, r):
            S = frozenset(c)
            if any(f <= S for f in found):
                continue
            if ok(S):
                found.append(S)
    return RequestList(found)


def brute_force_root_labels(p: ServicePattern, sigma: Sequence[int], root: int = 0, n: int | None = None):
    """Feasible root labels by exhaustive search (flat mode only)."""
    if p.class_mode:
        raise PatternError("brute-force root labels are implemented for flat patterns")
    pts = _requested(p, sigma, p.k, root)
    if p.k == 1:
        return ALL_OF_U if not pts else (frozenset(pts) if len(pts) == 1 else frozenset())
    kids = p.children(p.k, root)
    per = [brute_force_list(p, sigma, p.k - 1, j) for j in kids]
    if all(lst.trivial for lst in per):
        return ALL_OF_U
    return frozenset(x for x in pts if all(any(s <= {x} for s in lst) for lst in per))
