"""Problem primitives for weighted k-server on a uniform metric.

Points are the integers ``1..n``.  A flat :class:`Configuration` is a tuple
whose entry ``i`` is the position of server ``s_{i+1}``; a
:class:`ClassConfiguration` groups equal-weight servers into sets.  All costs
are :class:`fractions.Fraction` (integers in the common case), never floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence, Union

Cost = Fraction
Configuration = tuple
ClassConfiguration = tuple  # tuple of frozensets, one per weight class


class DimensionError(ValueError):
    """Configuration sizes do not match the weight profile."""


class CapacityError(RuntimeError):
    """A table or enumeration would exceed the configured size limit."""


def as_cost(x) -> Fraction:
    """Parse an int, Fraction or string like ``"20/3"`` into an exact cost."""
    if isinstance(x, float):
        raise TypeError("floating point costs are not allowed")
    return Fraction(x)


def cost_str(x) -> str:
    """Exact rational string; integers print without a denominator."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Universe:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"universe size must be a positive integer, got {self.n!r}")

    @property
    def points(self) -> range:
        return range(1, self.n + 1)

    def __contains__(self, p) -> bool:
        return isinstance(p, int) and 1 <= p <= self.n


@dataclass(frozen=True)
class WeightProfile:
    """Server weights ``w_1 <= ... <= w_k``.

    With ``counts`` set, the profile also carries a class structure: class
    ``i`` holds ``counts[i]`` servers of weight ``class_weights[i]`` and the
    flat ``weights`` is the expansion by multiplicity.
    """

    weights: tuple
    counts: tuple | None = None

    def __post_init__(self):
        ws = tuple(as_cost(w) for w in self.weights)
        if not ws:
            raise ValueError("at least one server is required")
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        if any(a > b for a, b in zip(ws, ws[1:])):
            raise ValueError("weights must be sorted nondecreasing")
        object.__setattr__(self, "weights", ws)
        if self.counts is not None:
            counts = tuple(int(c) for c in self.counts)
            if any(c < 1 for c in counts) or sum(counts) != len(ws):
                raise ValueError("class counts must be positive and sum to k")
            cw = self._class_weights(ws, counts)
            if any(a >= b for a, b in zip(cw, cw[1:])):
                raise ValueError("class weights must be strictly increasing")
            object.__setattr__(self, "counts", counts)

    @staticmethod
    def _class_weights(ws, counts):
        out, i = [], 0
        for c in counts:
            block = ws[i:i + c]
            if len(set(block)) != 1:
                raise ValueError("servers within a class must share one weight")
            out.append(block[0])
            i += c
        return tuple(out)

    @classmethod
    def from_classes(cls, class_weights: Sequence, counts: Sequence[int]) -> "WeightProfile":
        flat = [as_cost(w) for w, c in zip(class_weights, counts) for _ in range(c)]
        return cls(tuple(flat), tuple(counts))

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def d(self) -> int:
        return len(self.counts) if self.counts is not None else self.k

    @property
    def class_weights(self) -> tuple:
        if self.counts is None:
            raise ValueError("profile has no class structure")
        return self._class_weights(self.weights, self.counts)

    def prefix(self, i: int) -> Fraction:
        """``W_i``: total weight of the ``i`` lightest servers (``W_0 = 0``)."""
        return sum(self.weights[:i], Fraction(0))

    def class_prefix(self, i: int) -> Fraction:
        """Class analogue ``sum_{j<=i} k_j w_j``."""
        return sum((c * w for c, w in zip(self.counts[:i], self.class_weights[:i])), Fraction(0))

    @property
    def total(self) -> Fraction:
        return self.prefix(self.k)

    def scale(self) -> int:
        """Least common denominator of the weights."""
        return lcm(*(w.denominator for w in self.weights))

    def scaled(self) -> tuple:
        """Weights as integers in units of ``1/scale()``."""
        s = self.scale()
        return tuple(int(w * s) for w in self.weights)


def _check_point(p, n=None):
    if not isinstance(p, int) or p < 1 or (n is not None and p > n):
        raise ValueError(f"invalid point {p!r}")


def make_configuration(placement: Iterable[int], n: int | None = None) -> Configuration:
    c = tuple(placement)
    for p in c:
        _check_point(p, n)
    return c


def make_class_configuration(placement: Iterable[Iterable[int]], counts: Sequence[int] | None = None,
                             n: int | None = None) -> ClassConfiguration:
    c = tuple(frozenset(s) for s in placement)
    for s in c:
        for p in s:
            _check_point(p, n)
    if counts is not None:
        if len(c) != len(counts) or any(len(s) != m for s, m in zip(c, counts)):
            raise DimensionError(f"class configuration {sorted(map(sorted, c))} does not match counts {tuple(counts)}")
    return c


def distance(a: Sequence[int], b: Sequence[int], w: WeightProfile) -> Fraction:
    """Movement cost between flat configurations: sum of ``w_i`` over differing servers."""
    if len(a) != w.k or len(b) != w.k:
        raise DimensionError(f"configurations of sizes {len(a)}, {len(b)} for k={w.k}")
    return sum((wi for x, y, wi in zip(a, b, w.weights) if x != y), Fraction(0))


def class_distance(a: Sequence, b: Sequence, w: WeightProfile) -> Fraction:
    """Lump-charge distance: ``k_i w_i`` whenever the level-``i`` sets differ."""
    if w.counts is None:
        raise DimensionError("class distance needs a class-structured profile")
    if len(a) != w.d or len(b) != w.d:
        raise DimensionError(f"class configurations of sizes {len(a)}, {len(b)} for d={w.d}")
    total = Fraction(0)
    for x, y, c, wi in zip(a, b, w.counts, w.class_weights):
        if len(x) != c or len(y) != c:
            raise DimensionError(f"class set sizes {len(x)}, {len(y)} for k_i={c}")
        if frozenset(x) != frozenset(y):
            total += c * wi
    return total


def serves(c: Sequence, p: int) -> bool:
    """True iff some server of ``c`` (flat or class configuration) sits at ``p``."""
    _check_point(p)
    for x in c:
        if isinstance(x, (set, frozenset)):
            if p in x:
                return True
        elif x == p:
            return True
    return False


def separated_weights(k: int, n_k: int) -> WeightProfile:
    """Weights with ``w_1 = 1`` and ``w_{i+1} = n_k * (w_1 + ... + w_i)``."""
    if k < 1 or n_k < 1:
        raise ValueError("k and n_k must be positive")
    ws = [1]
    for _ in range(k - 1):
        ws.append(n_k * sum(ws))
    return WeightProfile(tuple(ws))


def wfa_weight_check(w: WeightProfile, dichotomy_ns: Sequence) -> bool:
    """Check ``W_{i-1} <= w_i / (20 i n_i)`` for ``i = 2..k`` exactly.

    ``dichotomy_ns[i]`` is ``n_i`` as a log2 bound: either an integer exponent
    ``e`` (meaning ``2**e``) or any object with ``coef`` and ``exp``
    attributes meaning ``coef * 2**exp``.  Index 0 and 1 are ignored.
    """
    for i in range(2, w.k + 1):
        coef, exp = _log2_form(dichotomy_ns[i])
        lhs = 20 * i * coef * w.prefix(i - 1)   # W_{i-1} * 20 i n_i / 2**exp
        rhs = w.weights[i - 1]
        if lhs == 0:
            continue
        if rhs == 0:
            return False
        # compare lhs * 2**exp <= rhs without materializing huge powers
        num = lhs.numerator * rhs.denominator
        den = rhs.numerator * lhs.denominator
        if num.bit_length() + exp - 1 > den.bit_length():
            return False
        if (num << exp) > den:
            return False
    return True


def _log2_form(x) -> tuple[int, int]:
    if isinstance(x, int):
        return 1, x
    return int(x.coef), int(x.exp)


Placement = Union[Configuration, ClassConfiguration]
