"""Closed-form upper bounds on request-list sizes, kept in exact log2 form.

A :class:`BoundValue` ``(coef, exp)`` stands for ``coef * 2**exp``.  The
exponents grow doubly exponentially in ``k``, so values are compared against
integers without ever expanding ``2**exp``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from math import comb, prod
from typing import Sequence

MATERIALIZE_LIMIT = 64


@total_ordering
@dataclass(frozen=True)
class BoundValue:
    coef: int
    exp: int

    def __post_init__(self):
        if self.coef < 1 or self.exp < 0:
            raise ValueError(f"bound must be coef >= 1, exp >= 0, got {self.coef}, {self.exp}")

    def log2_ceil(self) -> int:
        """Smallest integer ``e`` with ``2**e >= self``."""
        return self.exp + (self.coef - 1).bit_length()

    def as_int(self) -> int:
        if self.exp > MATERIALIZE_LIMIT:
            raise OverflowError(f"refusing to materialize 2**{self.exp}")
        return self.coef << self.exp

    def _cmp_int(self, m: int) -> int:
        if m <= 0:
            return 1
        if m.bit_length() <= self.exp:      # m < 2**exp <= self
            return 1
        v = self.coef << self.exp           # now exp < bit_length(m), so this is small
        return (v > m) - (v < m)

    def __eq__(self, other):
        if isinstance(other, BoundValue):
            return self.coef << max(0, self.exp - other.exp) == other.coef << max(0, other.exp - self.exp)
        if isinstance(other, int):
            return self._cmp_int(other) == 0
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, BoundValue):
            return self.coef << max(0, self.exp - other.exp) < other.coef << max(0, other.exp - self.exp)
        if isinstance(other, int):
            return self._cmp_int(other) < 0
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, int):
            return self._cmp_int(other) > 0
        return BoundValue.__lt__(other, self) if isinstance(other, BoundValue) else NotImplemented

    def __hash__(self):
        c, e = self.coef, self.exp
        while c % 2 == 0:
            c //= 2
            e += 1
        return hash((c, e))

    def __str__(self):
        return f"2^{self.exp}" if self.coef == 1 else f"{self.coef}*2^{self.exp}"


def _flat_n_exp(l: int, t: int, h: int) -> int:
    return (l - 1) * (l - 1 + t) ** 2 * 2 ** (l - 1 + t - h)


def _class_n_exp(l: int, t: int, h: int, counts: Sequence[int]) -> int:
    k = sum(counts)
    return l * 4 * k * k * (t - h) * prod(c + 1 for c in counts[:l - 1])


def _check(l, t, h, top, k):
    if not (2 <= l <= top and 0 <= h <= t <= k):
        raise ValueError(f"parameters out of range: l={l}, t={t}, h={h} (need 2 <= l <= {top}, 0 <= h <= t <= {k})")


BOUND_KINDS = ("flat_n", "flat_f", "thm_flat", "class_n", "class_f")


def bound_eval(kind: str, *, k: int | None = None, l: int | None = None, t: int | None = None,
               h: int | None = None, counts: Sequence[int] | None = None) -> BoundValue:
    """Evaluate one bound formula.

    ``flat_n``   n(l,t,h) <= 2^((l-1)(l-1+t)^2 2^(l-1+t-h))
    ``flat_f``   f(l,t,h) <= (t-h+1) n(l,t+1,h)
    ``thm_flat`` n(k,1) <= 2^(2^(k + ceil(3 log2 k)))
    ``class_n``  n(l,t,h) <= 2^(l 4k^2 (t-h) prod_{i<l}(k_i+1))
    ``class_f``  f(l,t,h) <= C(t+k_l-h, k_l) n(l,t+1,h)
    """
    if kind == "thm_flat":
        if k is None or k < 1:
            raise ValueError("thm_flat needs k >= 1")
        return BoundValue(1, 2 ** (k + _ceil_3log2(k)))
    if kind in ("flat_n", "flat_f"):
        if None in (k, l, t, h):
            raise ValueError(f"{kind} needs k, l, t, h")
        _check(l, t, h, k, k)
        if kind == "flat_n":
            return BoundValue(1, _flat_n_exp(l, t, h))
        return BoundValue(t - h + 1, _flat_n_exp(l, t + 1, h))
    if kind in ("class_n", "class_f"):
        if counts is None or None in (l, t, h):
            raise ValueError(f"{kind} needs counts, l, t, h")
        counts = tuple(counts)
        _check(l, t, h, len(counts), sum(counts))
        if kind == "class_n":
            return BoundValue(1, _class_n_exp(l, t, h, counts))
        kl = counts[l - 1]
        return BoundValue(comb(t + kl - h, kl), _class_n_exp(l, t + 1, h, counts))
    raise ValueError(f"unknown bound kind {kind!r}; expected one of {', '.join(BOUND_KINDS)}")


def _ceil_3log2(k: int) -> int:
    """``ceil(3 log2 k)`` exactly: the least ``e`` with ``2**e >= k**3``."""
    return (k ** 3 - 1).bit_length()


def dichotomy_constants(k: int) -> list:
    """``[n_0, ..., n_k]`` with ``n_i = n(i,1,0)`` in log2 form; ``n_0 = n_1 = 1``."""
    return [0, 0, *(bound_eval("flat_n", k=i, l=i, t=1, h=0) for i in range(2, k + 1))]
