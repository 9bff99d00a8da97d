"""Instance documents and random instance generation.

An instance is one JSON object.  Weights travel as exact rational strings
(``"20/3"``), so a document round-trips byte for byte.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..core import WeightProfile, cost_str, make_class_configuration, separated_weights
from ..lbgen.construction import n_seq

FORMAT = "wkserver-instance/1"


class SchemaError(ValueError):
    """A document does not match the expected shape; the message names the field."""


@dataclass(frozen=True)
class Instance:
    n: int
    weights: WeightProfile
    initial: tuple
    requests: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        object.__setattr__(self, "meta", dict(self.meta))
        if self.n < 1:
            raise SchemaError(f"n: must be positive, got {self.n}")
        if self.weights.counts is None:
            init = tuple(self.initial)
            if len(init) != self.weights.k:
                raise SchemaError(f"initial: {len(init)} positions for k={self.weights.k}")
            for i, c in enumerate(init):
                if not 1 <= c <= self.n:
                    raise SchemaError(f"initial[{i}]: {c} outside 1..{self.n}")
        else:
            init = make_class_configuration(self.initial, self.weights.counts, self.n)
        object.__setattr__(self, "initial", init)
        for i, p in enumerate(self.requests):
            if not isinstance(p, int) or not 1 <= p <= self.n:
                raise SchemaError(f"requests[{i}]: {p!r} outside 1..{self.n}")

    @property
    def k(self) -> int:
        return self.weights.k

    @property
    def T(self) -> int:
        return len(self.requests)

    @property
    def class_mode(self) -> bool:
        return self.weights.counts is not None

    def __eq__(self, other):
        return isinstance(other, Instance) and emit_instance(self) == emit_instance(other)

    def __hash__(self):
        return hash(emit_instance(self))


def emit_instance(inst: Instance) -> str:
    w = inst.weights
    doc = {"format": FORMAT, "n": inst.n}
    if w.counts is None:
        doc["weights"] = [cost_str(x) for x in w.weights]
        doc["initial"] = list(inst.initial)
    else:
        doc["weights"] = [cost_str(x) for x in w.class_weights]
        doc["counts"] = list(w.counts)
        doc["initial"] = [sorted(s) for s in inst.initial]
    doc["requests"] = list(inst.requests)
    if inst.meta:
        doc["meta"] = inst.meta
    return json.dumps(doc, separators=(",", ":")) + "\n"


_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


def _weight(x, where) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SchemaError(f"{where}: weights must be integers or rational strings, got {x!r}")
    if isinstance(x, str) and not _RATIONAL.match(x):
        raise SchemaError(f"{where}: {x!r} is not an exact rational")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"{where}: {x!r} is not an exact rational") from None


def _int(doc, key):
    v = doc.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{key}: expected an integer, got {v!r}")
    return v


def parse_instance(data: bytes | str) -> Instance:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document: expected a JSON object")
    if doc.get("format") != FORMAT:
        raise SchemaError(f"format: expected {FORMAT!r}, got {doc.get('format')!r}")
    unknown = set(doc) - {"format", "n", "weights", "counts", "initial", "requests", "meta"}
    if unknown:
        raise SchemaError(f"unknown fields: {', '.join(sorted(unknown))}")
    n = _int(doc, "n")
    ws = doc.get("weights")
    if not isinstance(ws, list) or not ws:
        raise SchemaError("weights: expected a non-empty list")
    weights = tuple(_weight(x, f"weights[{i}]") for i, x in enumerate(ws))
    reqs = doc.get("requests")
    if not isinstance(reqs, list):
        raise SchemaError("requests: expected a list")
    for i, p in enumerate(reqs):
        if isinstance(p, bool) or not isinstance(p, int):
            raise SchemaError(f"requests[{i}]: expected an integer, got {p!r}")
    init = doc.get("initial")
    if not isinstance(init, list):
        raise SchemaError("initial: expected a list")
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise SchemaError("meta: expected an object")
    try:
        if "counts" in doc:
            counts = doc["counts"]
            if not isinstance(counts, list) or not all(isinstance(c, int) for c in counts):
                raise SchemaError("counts: expected a list of integers")
            wp = WeightProfile.from_classes(weights, counts)
        else:
            wp = WeightProfile(weights)
    except SchemaError:
        raise
    except ValueError as e:
        raise SchemaError(f"weights: {e}") from None
    try:
        return Instance(n, wp, tuple(init) if "counts" not in doc else tuple(map(tuple, init)), tuple(reqs), meta)
    except SchemaError:
        raise
    except (ValueError, TypeError) as e:
        raise SchemaError(f"initial: {e}") from None


def load_instance(path) -> Instance:
    with open(path, "rb") as f:
        return parse_instance(f.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(emit_instance(inst))


# ----------------------------------------------------------------- generation

_STYLE = re.compile(r"^(uniform|geometric|separated)(?:\(([^)]*)\))?$")


def style_weights(style: str, k: int) -> WeightProfile:
    """``uniform``, ``geometric(r)`` (``w_i = r^(i-1)``), ``separated(n_k)`` or explicit ``w_1,...,w_k``."""
    if not _STYLE.match(style.strip()):
        parts = [x.strip() for x in style.split(",")]
        if all(_RATIONAL.match(x) for x in parts):
            if len(parts) != k:
                raise SchemaError(f"weights: {len(parts)} values given for k={k}")
            try:
                return WeightProfile(tuple(_weight(x, "weights") for x in parts))
            except ValueError as e:
                raise SchemaError(f"weights: {e}") from None
    m = _STYLE.match(style.strip())
    if not m:
        raise SchemaError(f"weights: unknown style {style!r}; use uniform, geometric(r) or separated(n_k)")
    kind, arg = m.groups()
    if kind == "uniform":
        return WeightProfile((Fraction(1),) * k)
    if kind == "geometric":
        r = _weight(arg or "2", "weights")
        if r <= 1:
            raise SchemaError(f"weights: geometric ratio must exceed 1, got {arg}")
        return WeightProfile(tuple(r ** i for i in range(k)))
    n_k = int(arg) if arg else (n_seq(k) if k >= 2 else 1)
    return separated_weights(k, n_k)


def gen_random(n: int, k: int, T: int, style: str = "uniform", seed: int = 0) -> Instance:
    """A random flat instance, determined by its arguments."""
    if min(n, k) < 1 or T < 0:
        raise ValueError("n and k must be positive and T non-negative")
    rng = random.Random(f"wkserver:{n}:{k}:{T}:{style}:{seed}")
    w = style_weights(style, k)
    init = tuple(rng.sample(range(1, n + 1), k)) if n >= k else tuple(rng.randint(1, n) for _ in range(k))
    reqs = tuple(rng.randint(1, n) for _ in range(T))
    return Instance(n, w, init, reqs, {"generator": f"random:{style}", "seed": seed})
