"""Experiment orchestration and reports."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..algorithms import WFA, make_algorithm, parse_algorithm_spec
from ..core import CapacityError, cost_str, separated_weights
from ..lbgen import adversary_run, n_seq
from ..workfn import class_opt_cost, opt_cost, phase_diagnostics
from .instances import Instance, gen_random, load_instance

COLUMNS = ("algo", "k", "n", "T", "seed", "alg_cost", "opt_cost", "ratio", "phases", "violations")


@dataclass
class ExperimentConfig:
    algorithms: Sequence[str]
    source: str = "generator"               # generator | file | adversary
    n: int = 4
    k: int = 2
    T: int = 10
    weights: str = "uniform"
    seeds: Sequence[int] = (0,)
    files: Sequence[str] = ()
    phases: int = 5
    limit: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.source not in ("generator", "file", "adversary"):
            raise ValueError(f"unknown source {self.source!r}")
        for spec in self.algorithms:
            name, _ = parse_algorithm_spec(spec)
            if name not in ("wfa", "wfa-class", "greedy", "memoryless"):
                raise ValueError(f"unknown algorithm {spec!r}")
        if self.limit is not None and self.limit <= 0:
            raise ValueError("limit must be positive")


def ratio_str(alg: Fraction, opt: Fraction) -> str:
    if opt == 0:
        return "inf" if alg > 0 else "1"
    return cost_str(Fraction(alg) / opt)


def _phases(configs, c0, k) -> int:
    if not configs:
        return 0
    return 1 + sum(1 for a, b in zip([tuple(c0), *configs], configs) if a[k - 1] != b[k - 1])


def _instance_row(spec: str, inst: Instance, seed, limit) -> dict:
    row = {"algo": spec, "k": inst.k, "n": inst.n, "T": inst.T, "seed": seed}
    try:
        alg = make_algorithm(spec, inst.n, inst.weights, inst.initial, limit)
        configs = alg.run(inst.requests)
        if inst.class_mode:
            opt = class_opt_cost(inst.requests, inst.initial, inst.weights, inst.n, limit)
        else:
            opt = opt_cost(inst.requests, inst.initial, inst.weights, inst.n, limit)
    except CapacityError as e:
        row.update(alg_cost="", opt_cost="", ratio="", phases="", violations=f"capacity: {e}")
        return row
    viol = []
    if isinstance(alg, WFA) and alg.lam == Fraction(1, 2) and inst.k >= 2:
        for rec in phase_diagnostics(configs, inst.requests, inst.initial, inst.weights, inst.n):
            viol.extend(rec.violations)
    phases = _phases(configs, inst.initial, inst.k) if not inst.class_mode else ""
    row.update(alg_cost=cost_str(alg.cost), opt_cost=cost_str(opt), ratio=ratio_str(alg.cost, opt),
               phases=phases, violations=";".join(sorted(set(viol))))
    return row


def _adversary_row(spec: str, cfg: ExperimentConfig, seed) -> dict:
    k = cfg.k
    n = max(cfg.n, 2 * n_seq(k) + 1)
    w = separated_weights(k, n_seq(k))
    alg = make_algorithm(spec, n, w, tuple(range(1, k + 1)), cfg.limit)
    rep = adversary_run(alg, k, cfg.phases, seed)
    try:
        opt = opt_cost(rep.sigma, tuple(range(1, k + 1)), w, n, cfg.limit)
        opt_s = cost_str(opt)
        ratio = ratio_str(rep.alg_cost, opt)
    except CapacityError:
        opt_s = ratio = ""
    bad = [f for f, v in rep.flags.items() if v is False]
    if rep.regime != "ok":
        bad.append(rep.regime)
    pr = rep.prefix_ratio()
    return {"algo": spec, "k": k, "n": n, "T": len(rep.sigma), "seed": seed, "alg_cost": cost_str(rep.alg_cost),
            "opt_cost": opt_s, "ratio": ratio, "phases": rep.phases_completed, "violations": ";".join(bad),
            "adv_cost": cost_str(rep.adv_cost), "prefix_ratio": "" if pr is None else cost_str(pr)}


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """One row per (source item, algorithm), ordered by seed and then algorithm."""
    rows = []
    if cfg.source == "file":
        for i, path in enumerate(cfg.files):
            inst = load_instance(path)
            for spec in cfg.algorithms:
                rows.append(_instance_row(spec, inst, inst.meta.get("seed", i), cfg.limit))
        return rows
    for seed in sorted(cfg.seeds):
        for spec in sorted(cfg.algorithms):
            if cfg.source == "generator":
                inst = gen_random(cfg.n, cfg.k, cfg.T, cfg.weights, seed)
                rows.append(_instance_row(spec, inst, seed, cfg.limit))
            else:
                rows.append(_adversary_row(spec, cfg, seed))
    return rows


def report(rows: Sequence[dict], fmt: str = "csv", path=None) -> str:
    """Render rows as CSV (fixed columns) or JSON lines (all fields); optionally write ``path``."""
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.DictWriter(buf, fieldnames=COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    elif fmt == "jsonl":
        for r in rows:
            buf.write(json.dumps(r, separators=(",", ":")) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return text
