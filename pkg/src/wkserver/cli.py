"""Command-line entry point: ``wkserver <subcommand> ...``.

Exit codes: 0 ok, 2 schema error, 3 capacity error, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from .algorithms import make_algorithm
from .bounds import bound_eval
from .core import CapacityError, WeightProfile, cost_str, separated_weights
from .harness import (ExperimentConfig, SchemaError, emit_instance, gen_random, load_instance, report,
                      run_experiment, save_instance, style_weights)
from .lbgen import adversary_run, build_tree, general_metric_run, line_metric, metric_weights, n_seq
from .patterns import PatternError, emit_pattern, parse_pattern
from .requestlists import ALL_OF_U, pipeline_lists, root_labels
from .workfn import class_opt_cost, opt_cost, phase_diagnostics

EXIT_OK, EXIT_SCHEMA, EXIT_CAPACITY, EXIT_INVARIANT = 0, 2, 3, 4


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _weights(args, k) -> WeightProfile:
    return style_weights(args.weights or "uniform", k)


def cmd_opt(args):
    inst = load_instance(args.instance)
    if inst.class_mode:
        v = class_opt_cost(inst.requests, inst.initial, inst.weights, inst.n, args.limit)
    else:
        v = opt_cost(inst.requests, inst.initial, inst.weights, inst.n, args.limit)
    _emit(cost_str(v) + "\n", args.out)
    return EXIT_OK


def cmd_run(args):
    inst = load_instance(args.instance)
    spec = args.algo
    if args.lam is not None and spec.split(":")[0].startswith("wfa"):
        spec = f"{spec.split(':')[0]}:lambda={args.lam}"
    alg = make_algorithm(spec, inst.n, inst.weights, inst.initial, args.limit)
    configs = alg.run(inst.requests)
    lines = [f"algo {spec}", f"cost {cost_str(alg.cost)}"]
    if args.trace:
        lines += [f"{t} {p} {' '.join(map(str, _flat(c)))}" for t, (p, c) in enumerate(zip(inst.requests, configs), 1)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _flat(c):
    return [",".join(map(str, sorted(s))) if isinstance(s, frozenset) else s for s in c]


def cmd_adversary(args):
    k = args.k
    n_k = n_seq(k)
    n = args.n or 2 * n_k + 1
    w = _weights(args, k) if args.weights else separated_weights(k, n_k)
    spec = args.algo if args.lam is None else f"wfa:lambda={args.lam}"
    alg = make_algorithm(spec, n, w, tuple(range(1, k + 1)), args.limit)
    rep = adversary_run(alg, k, args.phases, args.seed, max_steps=args.steps)
    _emit(rep.transcript(), args.out)
    pr = rep.prefix_ratio()
    sys.stderr.write(f"phases {rep.phases_completed} steps {len(rep.sigma)} regime {rep.regime} "
                     f"alg {cost_str(rep.alg_cost)} adv {cost_str(rep.adv_cost)} "
                     f"prefix_ratio {'-' if pr is None else cost_str(pr)} flags "
                     + " ".join(f"{f}={v}" for f, v in rep.flags.items()) + "\n")
    return EXIT_OK if all(v is not False for v in rep.flags.values()) else EXIT_INVARIANT


def cmd_metric(args):
    k = args.k
    n = n_seq(k) + 1
    metric = line_metric(n)
    D = max(max(r.values()) for r in metric.values())
    w = metric_weights(k, D)
    alg = make_algorithm(args.algo, n, w, tuple(range(1, k + 1)), args.limit)
    rep = general_metric_run(metric, alg, k, args.steps, args.seed)
    _emit(" ".join(f"{f}={v}" for f, v in rep.flags.items()) + f" alg={cost_str(rep.alg_cost)} "
          f"adv_total={cost_str(rep.adv_total)}\n", args.out)
    return EXIT_OK if rep.ok else EXIT_INVARIANT


def cmd_construct(args):
    l = args.level
    pts = list(range(1, n_seq(l + 1) + 1))
    tree = build_tree(l, pts, args.seed)
    _emit(emit_pattern(tree.pattern, None, tree.requests), args.out)
    return EXIT_OK


def cmd_lists(args):
    with open(args.pattern, encoding="utf-8") as f:
        p, _, sigma = parse_pattern(f.read())
    if sigma is None:
        raise PatternError("the pattern file needs a sigma line")
    lists = pipeline_lists(p, sigma)
    lines = [f"{lv} {idx} {lists[(lv, idx)].to_text()}" for (lv, idx) in sorted(lists)]
    roots = []
    for r in range(p.count(p.k)):
        lab = root_labels(p, sigma, r, lists)
        if lab == ALL_OF_U:
            roots.append(f"root {r} all")
        elif isinstance(lab, dict):
            roots.append(f"root {r} " + (" ".join(f"{t}:{len(v)}" for t, v in lab.items()) or "infeasible"))
        else:
            roots.append(f"root {r} " + (",".join(map(str, sorted(lab))) or "infeasible"))
    _emit("\n".join(lines + roots) + "\n", args.out)
    return EXIT_OK


def cmd_bounds(args):
    k = args.k
    lines = ["kind l t h log2"]
    for l in range(2, k + 1):
        for t in range(0, k + 1):
            for h in range(0, t + 1):
                b = bound_eval("flat_n", k=k, l=l, t=t, h=h)
                lines.append(f"flat_n {l} {t} {h} {b.log2_ceil()}")
    lines.append(f"thm_flat {k} - - {bound_eval('thm_flat', k=k).log2_ceil()}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_diagnose(args):
    inst = load_instance(args.instance)
    recs = phase_diagnostics(_run_wfa(inst, args), inst.requests, inst.initial, inst.weights, inst.n)
    lines = ["start end heavy completed dWF dM lucky violations"]
    bad = False
    for r in recs:
        bad |= bool(r.violations)
        lines.append(f"{r.start} {r.end} {r.heavy} {int(r.completed)} {cost_str(r.delta_wf)} {cost_str(r.delta_m)} "
                     f"{len(r.lucky)} {';'.join(r.violations) or '-'}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_INVARIANT if bad else EXIT_OK


def _run_wfa(inst, args):
    lam = args.lam or "1/2"
    alg = make_algorithm(f"wfa:lambda={lam}", inst.n, inst.weights, inst.initial, args.limit)
    return alg.run(inst.requests)


def cmd_gen(args):
    inst = gen_random(args.n, args.k, args.t, args.weights or "uniform", args.seed)
    if args.out:
        save_instance(inst, args.out)
    else:
        sys.stdout.write(emit_instance(inst))
    return EXIT_OK


def cmd_report(args):
    cfg = ExperimentConfig(algorithms=args.algo.split(";"), source=args.source, n=args.n or 4, k=args.k,
                           T=args.t, weights=args.weights or "uniform",
                           seeds=range(args.seed, args.seed + args.count), files=args.instances or (),
                           phases=args.phases, limit=args.limit)
    rows = run_experiment(cfg)
    text = report(rows, args.format)
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wkserver", description="Weighted k-server laboratory.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, *names):
        if "n" in names:
            p.add_argument("--n", type=int, default=None, help="number of points")
        if "k" in names:
            p.add_argument("--k", type=int, default=2, help="number of servers")
        if "t" in names:
            p.add_argument("--t", type=int, default=10, help="number of requests")
        if "weights" in names:
            p.add_argument("--weights", default=None,
                           help="comma-separated rationals, or uniform | geometric(r) | separated(n_k)")
        if "lambda" in names:
            p.add_argument("--lambda", dest="lam", default=None, help="WFA parameter, e.g. 1/2")
        if "seed" in names:
            p.add_argument("--seed", type=int, default=0)
        if "phases" in names:
            p.add_argument("--phases", type=int, default=5)
        p.add_argument("--limit", type=int, default=None, help="work-function table size limit")
        p.add_argument("--out", default=None, help="output file (default: stdout)")

    p = sub.add_parser("opt", help="offline optimum of an instance")
    p.add_argument("instance")
    common(p)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("run", help="run an online algorithm on an instance")
    p.add_argument("instance")
    p.add_argument("--algo", default="wfa:lambda=1/2")
    p.add_argument("--trace", action="store_true")
    common(p, "lambda")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adversary", help="play the adaptive adversary; writes a transcript")
    p.add_argument("--algo", default="wfa:lambda=1/2")
    p.add_argument("--steps", type=int, default=1_000_000)
    common(p, "n", "k", "weights", "lambda", "seed", "phases")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("metric", help="many-adversary game on a line metric with n_k+1 points")
    p.add_argument("--algo", default="wfa:lambda=1/2")
    p.add_argument("--steps", type=int, default=1000)
    common(p, "k", "seed")
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("construct", help="emit the recursive construction with its pattern")
    p.add_argument("--level", type=int, default=2)
    common(p, "seed")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("lists", help="request lists of every interval of a pattern file")
    p.add_argument("pattern")
    common(p)
    p.set_defaults(func=cmd_lists)

    p = sub.add_parser("bounds", help="table of list-size bounds (log2)")
    common(p, "k")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("diagnose", help="phase diagnostics of WFA on an instance")
    p.add_argument("instance")
    common(p, "lambda")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, default=4, help="number of points")
    common(p, "k", "t", "weights", "seed")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("report", help="run an experiment batch and write CSV or JSON lines")
    p.add_argument("--algo", default="wfa:lambda=1/2", help="algorithm specs separated by ';'")
    p.add_argument("--source", choices=("generator", "file", "adversary"), default="generator")
    p.add_argument("--instances", nargs="*")
    p.add_argument("--count", type=int, default=10, help="number of seeds starting at --seed")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common(p, "n", "k", "t", "weights", "seed", "phases")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, PatternError) as e:
        sys.stderr.write(f"schema error: {e}\n")
        return EXIT_SCHEMA
    except CapacityError as e:
        sys.stderr.write(f"capacity error: {e}\n")
        return EXIT_CAPACITY
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
