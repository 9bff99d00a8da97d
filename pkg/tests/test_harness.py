import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from wkserver import cli
from wkserver.core import WeightProfile
from wkserver.harness import (COLUMNS, ExperimentConfig, Instance, SchemaError, emit_instance, gen_random,
                              load_instance, parse_instance, ratio_str, report, run_experiment, save_instance,
                              style_weights)
from wkserver.lbgen import build_tree
from wkserver.patterns import emit_pattern
from wkserver.workfn import opt_cost


def test_minimal_instance_round_trip():
    text = '{"format":"wkserver-instance/1","n":1,"weights":["1"],"initial":[1],"requests":[1,1]}\n'
    inst = parse_instance(text.encode())
    assert emit_instance(inst) == text
    assert inst.k == 1 and inst.T == 2


def test_rational_weight_round_trip():
    inst = Instance(3, WeightProfile((1, Fraction(20, 3))), (1, 2), (3, 1))
    text = emit_instance(inst)
    assert '"20/3"' in text
    back = parse_instance(text)
    assert back.weights.weights[1] == Fraction(20, 3) and emit_instance(back) == text


def test_class_instance_round_trip():
    inst = Instance(4, WeightProfile.from_classes((1, 10), (2, 1)), ((2, 1), (4,)), (3, 1), {"seed": 3})
    text = emit_instance(inst)
    assert '"counts":[2,1]' in text and '"initial":[[1,2],[4]]' in text
    assert parse_instance(text) == inst


@pytest.mark.parametrize("doc,needle", [
    ({"n": 2, "weights": ["1"], "initial": [1], "requests": [1, 3]}, "requests[1]"),
    ({"n": 2, "weights": ["1"], "initial": [3], "requests": []}, "initial[0]"),
    ({"n": 2, "weights": [0.5], "initial": [1], "requests": []}, "weights[0]"),
    ({"n": 2, "weights": ["1/0"], "initial": [1], "requests": []}, "weights[0]"),
    ({"n": 2, "weights": ["2", "1"], "initial": [1, 1], "requests": []}, "weights"),
    ({"n": 2, "weights": ["1"], "initial": [1], "requests": ["x"]}, "requests[0]"),
    ({"n": "2", "weights": ["1"], "initial": [1], "requests": []}, "n:"),
    ({"n": 2, "weights": ["1"], "initial": [1], "requests": [], "extra": 1}, "unknown fields"),
])
def test_schema_errors_name_the_field(doc, needle):
    doc = {"format": "wkserver-instance/1", **doc}
    with pytest.raises(SchemaError) as e:
        parse_instance(json.dumps(doc))
    assert needle in str(e.value)


def test_schema_errors_for_bad_documents():
    with pytest.raises(SchemaError, match="line 1"):
        parse_instance("{not json")
    with pytest.raises(SchemaError, match="format"):
        parse_instance('{"format":"other"}')


def test_generator():
    a = gen_random(5, 2, 12, "geometric(3)", 4)
    assert a == gen_random(5, 2, 12, "geometric(3)", 4)
    assert a != gen_random(5, 2, 12, "geometric(3)", 5)
    assert a.weights.weights == (1, 3)
    assert set(gen_random(1, 1, 6, "uniform", 0).requests) == {1}
    assert gen_random(9, 3, 4, "separated(4)", 0).weights.weights == (1, 4, 20)
    assert style_weights("separated", 2).weights == (1, 2)
    with pytest.raises(SchemaError):
        style_weights("zipf", 2)
    with pytest.raises(SchemaError):
        style_weights("geometric(1)", 2)
    assert style_weights("1, 5/2", 2).weights == (1, Fraction(5, 2))
    with pytest.raises(SchemaError):
        style_weights("1,2,3", 2)
    with pytest.raises(SchemaError):
        style_weights("1,0", 2)


def test_save_load(tmp_path):
    inst = gen_random(4, 2, 8, "uniform", 1)
    path = tmp_path / "i.json"
    save_instance(inst, path)
    assert load_instance(path) == inst
    assert path.read_bytes() == emit_instance(inst).encode()


def test_ratio_strings():
    assert ratio_str(Fraction(3), Fraction(0)) == "inf"
    assert ratio_str(Fraction(0), Fraction(0)) == "1"
    assert ratio_str(Fraction(10), Fraction(4)) == "5/2"


def test_empty_report_is_header_only():
    assert report([], "csv") == ",".join(COLUMNS) + "\n"
    assert report([], "jsonl") == ""
    with pytest.raises(ValueError):
        report([], "xml")


def test_generator_experiment_rows_match_opt():
    cfg = ExperimentConfig(["wfa:lambda=1", "greedy"], n=4, k=2, T=9, weights="geometric(2)", seeds=[2, 1])
    rows = run_experiment(cfg)
    assert [(r["seed"], r["algo"]) for r in rows] == [(1, "greedy"), (1, "wfa:lambda=1"), (2, "greedy"),
                                                     (2, "wfa:lambda=1")]
    for r in rows:
        inst = gen_random(4, 2, 9, "geometric(2)", r["seed"])
        assert Fraction(r["opt_cost"]) == opt_cost(inst.requests, inst.initial, inst.weights, inst.n)
    assert report(rows) == report(run_experiment(cfg))


def test_greedy_on_constant_instance(tmp_path):
    inst = Instance(3, WeightProfile((1, 5)), (1, 2), (3, 3, 3))
    path = tmp_path / "c.json"
    save_instance(inst, path)
    rows = run_experiment(ExperimentConfig(["greedy"], source="file", files=[str(path)]))
    assert rows[0]["alg_cost"] == "1" and rows[0]["opt_cost"] == "1" and rows[0]["ratio"] == "1"


def test_capacity_errors_are_reported_per_row():
    rows = run_experiment(ExperimentConfig(["wfa"], n=9, k=3, T=3, seeds=[0], limit=100))
    assert rows[0]["violations"].startswith("capacity:")


def test_adversary_rows():
    rows = run_experiment(ExperimentConfig(["wfa:lambda=1/2", "greedy"], source="adversary", k=2, phases=2,
                                           seeds=[0]))
    by = {r["algo"]: r for r in rows}
    assert by["wfa:lambda=1/2"]["phases"] == 2 and by["wfa:lambda=1/2"]["violations"] == ""
    assert "unbounded-ratio regime" in by["greedy"]["violations"]
    assert "prefix_ratio" in json.loads(report(rows, "jsonl").splitlines()[0])


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(["lru"])
    with pytest.raises(ValueError):
        ExperimentConfig(["greedy"], source="web")
    with pytest.raises(ValueError):
        ExperimentConfig(["greedy"], limit=0)


# ------------------------------------------------------------------- CLI

def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_gen_opt_run(tmp_path, capsys):
    path = tmp_path / "i.json"
    assert run_cli(capsys, "gen", "--n", "3", "--k", "2", "--t", "6", "--weights", "geometric(2)", "--seed", "1",
                   "--out", str(path))[0] == 0
    inst = load_instance(path)
    code, out, _ = run_cli(capsys, "opt", str(path))
    assert code == 0 and Fraction(out.strip()) == opt_cost(inst.requests, inst.initial, inst.weights, inst.n)
    code, out, _ = run_cli(capsys, "run", str(path), "--algo", "greedy", "--trace")
    assert code == 0 and out.startswith("algo greedy\ncost ") and len(out.splitlines()) == 8
    code, out, _ = run_cli(capsys, "diagnose", str(path))
    assert code == 0 and out.startswith("start end heavy")


def test_cli_construct_and_lists(tmp_path, capsys):
    path = tmp_path / "t2.pat"
    assert run_cli(capsys, "construct", "--level", "2", "--out", str(path))[0] == 0
    tree = build_tree(2, [1, 2, 3, 4], seed=0)
    assert path.read_text() == emit_pattern(tree.pattern, None, tree.requests)
    code, out, _ = run_cli(capsys, "lists", str(path))
    assert code == 0 and out.splitlines()[-1] == "root 0 1,2,3,4"
    assert "2 0 {1} {2} {3} {4}" in out.splitlines()


def test_cli_bounds_and_metric(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--k", "2")
    assert code == 0 and "flat_n 2 1 0 16" in out.splitlines()
    code, out, _ = run_cli(capsys, "metric", "--k", "2", "--steps", "100")
    assert code == 0 and "heavy_identity=True" in out


def test_cli_adversary(capsys):
    code, out, err = run_cli(capsys, "adversary", "--k", "2", "--phases", "2", "--seed", "7")
    assert code == 0 and out.startswith("# t request") and "phases 2" in err


def test_cli_report_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run_cli(capsys, "report", "--algo", "wfa:lambda=1;greedy", "--count", "3", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == ",".join(COLUMNS)
    code, out, _ = run_cli(capsys, "report", "--format", "jsonl", "--count", "1")
    assert code == 0 and json.loads(out)["algo"] == "wfa:lambda=1/2"


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format":"wkserver-instance/1","n":2,"weights":["1"],"initial":[1],"requests":[5]}')
    code, _, err = run_cli(capsys, "opt", str(bad))
    assert code == 2 and "requests[0]" in err
    assert run_cli(capsys, "opt", str(tmp_path / "missing.json"))[0] == 2
    big = tmp_path / "big.json"
    save_instance(gen_random(20, 4, 3, "uniform", 0), big)
    assert run_cli(capsys, "opt", str(big), "--limit", "1000")[0] == 3
    pat = tmp_path / "p.pat"
    pat.write_text("3 1 flat\n0 4\n")
    assert run_cli(capsys, "lists", str(pat))[0] == 2


def test_cli_invariant_exit_code(tmp_path, capsys, monkeypatch):
    # WFA runs satisfy the phase invariants, so a failing record is injected
    from wkserver.workfn import PhaseRecord

    path = tmp_path / "i.json"
    save_instance(Instance(3, WeightProfile((1, 3)), (1, 2), (3, 1) * 3), path)
    assert run_cli(capsys, "diagnose", str(path))[0] == 0
    rec = PhaseRecord(0, 6, 2, False, Fraction(0), Fraction(1), Fraction(0), Fraction(1), {}, frozenset(),
                      ("phase-start",))
    monkeypatch.setattr(cli, "phase_diagnostics", lambda *a, **k: [rec])
    code, out, _ = run_cli(capsys, "diagnose", str(path))
    assert code == 4 and out.splitlines()[1].endswith("phase-start")


def test_capacity_limit_environment_variable(tmp_path):
    path = tmp_path / "i.json"
    save_instance(gen_random(6, 3, 3, "uniform", 0), path)
    env = dict(os.environ, WKSERVER_LIMIT="50")
    r = subprocess.run([sys.executable, "-m", "wkserver.cli", "opt", str(path)], env=env, capture_output=True,
                       text=True)
    assert r.returncode == 3 and "exceeds limit 50" in r.stderr
