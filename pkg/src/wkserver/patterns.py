"""Service patterns, labelings and the pattern text format.

A pattern has one breakpoint list per level.  Each list starts at 0, ends at
the sentinel ``T+1`` and splits ``[0, T+1)`` into half-open intervals.
Requests occupy times ``1..T``.  Intervals are addressed as ``(level, idx)``
with both counted from 1 and 0 respectively: ``(2, 0)`` is the first
level-2 interval.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .bounds import BoundValue, bound_eval, dichotomy_constants  # noqa: F401  (re-exported)
from .core import WeightProfile, cost_str


class PatternError(ValueError):
    """Malformed pattern, labeling or pattern document."""


@dataclass(frozen=True)
class ServicePattern:
    T: int
    levels: tuple
    counts: tuple | None = None     # class mode: servers per level

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(tuple(int(b) for b in lv) for lv in self.levels))
        if self.T < 0:
            raise PatternError("horizon must be non-negative")
        if not self.levels:
            raise PatternError("a pattern needs at least one level")
        for i, lv in enumerate(self.levels, 1):
            if len(lv) < 2 or lv[0] != 0 or lv[-1] != self.T + 1:
                raise PatternError(f"level {i} must run from 0 to {self.T + 1}, got {list(lv)}")
            if any(a >= b for a, b in zip(lv, lv[1:])):
                raise PatternError(f"level {i} breakpoints must increase strictly: {list(lv)}")
        if self.counts is not None:
            object.__setattr__(self, "counts", tuple(self.counts))
            if len(self.counts) != len(self.levels) or any(c < 1 for c in self.counts):
                raise PatternError(f"class counts {self.counts} do not fit {len(self.levels)} levels")

    @classmethod
    def from_breakpoints(cls, T: int, levels: Iterable[Iterable[int]], counts=None) -> "ServicePattern":
        """Build from possibly unsorted breakpoint sets; 0 and ``T+1`` are added."""
        return cls(T, tuple(tuple(sorted(set(lv) | {0, T + 1})) for lv in levels), counts)

    @property
    def k(self) -> int:
        return len(self.levels)

    @property
    def class_mode(self) -> bool:
        return self.counts is not None

    def capacity(self, level: int) -> int:
        """How many servers level ``level`` holds (1 in flat mode)."""
        return 1 if self.counts is None else self.counts[level - 1]

    def above(self, level: int) -> int:
        """Total capacity of the levels strictly above ``level``."""
        return sum(self.capacity(j) for j in range(level + 1, self.k + 1))

    def intervals(self, level: int) -> list:
        lv = self.levels[level - 1]
        return list(zip(lv, lv[1:]))

    def interval(self, level: int, idx: int) -> tuple:
        lv = self.levels[level - 1]
        return lv[idx], lv[idx + 1]

    def count(self, level: int) -> int:
        return len(self.levels[level - 1]) - 1

    def locate(self, level: int, t: int) -> int:
        """Index of the level-``level`` interval containing time ``t``."""
        if not 0 <= t <= self.T:
            raise PatternError(f"time {t} outside [0, {self.T + 1})")
        return bisect_right(self.levels[level - 1], t) - 1

    def is_hierarchical(self) -> bool:
        return all(set(self.levels[i]) <= set(self.levels[i - 1]) for i in range(1, self.k))

    def children(self, level: int, idx: int) -> list:
        """Level-(level-1) intervals inside ``(level, idx)``; needs a hierarchical pattern."""
        if level < 2:
            return []
        a, b = self.interval(level, idx)
        lo = self.locate(level - 1, a)
        out = []
        j = lo
        while j < self.count(level - 1) and self.interval(level - 1, j)[0] < b:
            out.append(j)
            j += 1
        return out

    def parent(self, level: int, idx: int) -> int | None:
        if level >= self.k:
            return None
        return self.locate(level + 1, self.interval(level, idx)[0])

    def ancestors(self, level: int, idx: int) -> list:
        out = []
        while level < self.k:
            idx = self.parent(level, idx)
            level += 1
            out.append((level, idx))
        return out

    def subtree(self, level: int, idx: int) -> list:
        """All intervals of the subtree rooted at ``(level, idx)``, root first."""
        out = [(level, idx)]
        for j in self.children(level, idx):
            out.extend(self.subtree(level - 1, j))
        return out

    def request_times(self, level: int, idx: int) -> range:
        a, b = self.interval(level, idx)
        return range(max(a, 1), min(b, self.T + 1))


@dataclass(frozen=True)
class Labeling:
    """Partial map ``(level, idx) -> point`` (flat) or ``-> frozenset`` (class)."""

    labels: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", dict(self.labels))

    def get(self, level: int, idx: int):
        return self.labels.get((level, idx))

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return isinstance(other, Labeling) and self.labels == other.labels

    def __hash__(self):
        return hash(frozenset(self.labels.items()))


def _covers(label, p) -> bool:
    if label is None:
        return False
    if isinstance(label, (frozenset, set)):
        return p in label
    return label == p


def validate_labeling(p: ServicePattern, alpha: Labeling) -> None:
    for (level, idx), lab in alpha.labels.items():
        if not 1 <= level <= p.k or not 0 <= idx < p.count(level):
            raise PatternError(f"label on missing interval ({level}, {idx})")
        if p.class_mode:
            if not isinstance(lab, frozenset) or len(lab) > p.capacity(level):
                raise PatternError(f"class label {lab!r} at level {level} exceeds k_{level}={p.capacity(level)}")
        elif isinstance(lab, (set, frozenset)):
            raise PatternError(f"flat labels are single points, got {lab!r}")


def check_labeling(p: ServicePattern, alpha: Labeling, sigma: Sequence[int]) -> bool:
    """True iff every request time is inside some interval whose label serves it."""
    if len(sigma) != p.T:
        raise PatternError(f"sequence of length {len(sigma)} for horizon {p.T}")
    validate_labeling(p, alpha)
    for t, q in enumerate(sigma, 1):
        if not any(_covers(alpha.get(lv, p.locate(lv, t)), q) for lv in range(1, p.k + 1)):
            return False
    return True


def pattern_cost(p: ServicePattern, w: WeightProfile) -> Fraction:
    """``sum_i w_i (|I_i| - 1)``; in class mode each term carries the lump factor ``k_i``."""
    if p.class_mode:
        if w.counts is None or tuple(w.counts) != p.counts:
            raise PatternError(f"class pattern {p.counts} needs a profile with the same counts")
        cw = w.class_weights
        return sum((c * x * (p.count(i + 1) - 1) for i, (c, x) in enumerate(zip(p.counts, cw))), Fraction(0))
    if w.k != p.k:
        raise PatternError(f"pattern has {p.k} levels, profile has {w.k} servers")
    return sum((x * (p.count(i + 1) - 1) for i, x in enumerate(w.weights)), Fraction(0))


def hierarchicalize(p: ServicePattern) -> ServicePattern:
    """End every lower-level interval whenever a higher-level one ends."""
    levels = [set(lv) for lv in p.levels]
    for i in range(p.k - 2, -1, -1):
        levels[i] |= levels[i + 1]
    return ServicePattern(p.T, tuple(tuple(sorted(lv)) for lv in levels), p.counts)


def refine(ps: Sequence[ServicePattern]) -> ServicePattern:
    """Per level, the union of all breakpoints."""
    if not ps:
        raise PatternError("nothing to refine")
    first = ps[0]
    for q in ps[1:]:
        if q.T != first.T or q.k != first.k or q.counts != first.counts:
            raise PatternError("patterns to refine must share horizon, level count and class counts")
    return ServicePattern(first.T, tuple(tuple(sorted(set().union(*(q.levels[i] for q in ps))))
                                         for i in range(first.k)), first.counts)


def extend_labeling(src: ServicePattern, alpha: Labeling, dst: ServicePattern) -> Labeling:
    """Copy each label of ``src`` to every ``dst`` interval it contains."""
    out = {}
    for level in range(1, dst.k + 1):
        for idx, (a, _) in enumerate(dst.intervals(level)):
            lab = alpha.get(level, src.locate(level, a))
            if lab is not None:
                out[(level, idx)] = lab
    return Labeling(out)


# ------------------------------------------------------------------ text format

def _mode_str(p: ServicePattern) -> str:
    return "flat" if p.counts is None else "class:" + ",".join(map(str, p.counts))


def _label_str(lab) -> str:
    if isinstance(lab, frozenset):
        return ",".join(map(str, sorted(lab))) if lab else "-"
    return str(lab)


def emit_pattern(p: ServicePattern, alpha: Labeling | None = None, sigma: Sequence[int] | None = None) -> str:
    """Serialize a pattern, optionally with its request sequence and labeling.

    Header ``T levels mode``, one breakpoint line per level, an optional
    ``sigma`` line, then ``level idx label[,label]`` lines in sorted order.
    """
    lines = [f"{p.T} {p.k} {_mode_str(p)}"]
    lines += [" ".join(map(str, lv)) for lv in p.levels]
    if sigma is not None:
        lines.append(" ".join(["sigma", *map(str, sigma)]))
    if alpha is not None:
        for (level, idx) in sorted(alpha.labels):
            lines.append(f"{level} {idx} {_label_str(alpha.labels[(level, idx)])}")
    return "\n".join(lines) + "\n"


def parse_pattern(text: str) -> tuple:
    """Inverse of :func:`emit_pattern`; returns ``(pattern, labeling, sigma)``.

    ``labeling`` and ``sigma`` are ``None`` when absent.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise PatternError("empty pattern document")
    head = lines[0].split()
    if len(head) != 3:
        raise PatternError(f"line 1: expected 'T k mode', got {lines[0]!r}")
    try:
        T, k = int(head[0]), int(head[1])
    except ValueError:
        raise PatternError(f"line 1: T and k must be integers, got {lines[0]!r}") from None
    mode = head[2]
    counts = None
    if mode.startswith("class:"):
        try:
            counts = tuple(int(x) for x in mode[6:].split(","))
        except ValueError:
            raise PatternError(f"line 1: bad class counts in {mode!r}") from None
    elif mode != "flat":
        raise PatternError(f"line 1: mode must be 'flat' or 'class:k1,...', got {mode!r}")
    if len(lines) < 1 + k:
        raise PatternError(f"expected {k} breakpoint lines, found {len(lines) - 1}")
    try:
        levels = tuple(tuple(int(x) for x in lines[1 + i].split()) for i in range(k))
    except ValueError as e:
        raise PatternError(f"breakpoint lines: {e}") from None
    p = ServicePattern(T, levels, counts)
    sigma = None
    labels = None
    for lineno, ln in enumerate(lines[1 + k:], 2 + k):
        parts = ln.split()
        if parts[0] == "sigma":
            if sigma is not None or labels is not None:
                raise PatternError(f"line {lineno}: sigma must come once, before labels")
            sigma = [int(x) for x in parts[1:]]
            continue
        if len(parts) != 3:
            raise PatternError(f"line {lineno}: expected 'level idx label', got {ln!r}")
        labels = {} if labels is None else labels
        level, idx = int(parts[0]), int(parts[1])
        if counts is None:
            lab = int(parts[2])
        else:
            lab = frozenset() if parts[2] == "-" else frozenset(int(x) for x in parts[2].split(","))
        if (level, idx) in labels:
            raise PatternError(f"line {lineno}: interval ({level}, {idx}) labeled twice")
        labels[(level, idx)] = lab
    alpha = None if labels is None else Labeling(labels)
    if alpha is not None:
        validate_labeling(p, alpha)
    return p, alpha, sigma


def pattern_summary(p: ServicePattern, w: WeightProfile | None = None) -> str:
    sizes = " ".join(f"|I_{i}|={p.count(i)}" for i in range(1, p.k + 1))
    return sizes if w is None else f"{sizes} cost={cost_str(pattern_cost(p, w))}"
