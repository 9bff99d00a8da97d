import os
import random
from fractions import Fraction
from pathlib import Path

import pytest

from wkserver.algorithms import WFA, Greedy, Memoryless, OnlineAlgorithm, make_algorithm
from wkserver.core import WeightProfile, separated_weights
from wkserver.lbgen import (DEGENERATE, AdversaryState, adversary_next, adversary_run, build_tree, decompose,
                            general_metric_run, line_metric, metric_weights, n_seq, uniform_metric)
from wkserver.lbgen.construction import mask_sizes, priority_order
from wkserver.lbgen.general import check_metric, metric_from_rows
from wkserver.requestlists import brute_force_root_labels, root_labels

GOLDEN = Path(__file__).parent / "golden"


# ----------------------------------------------------------- construction

def test_n_seq():
    assert [n_seq(i) for i in range(2, 9)] == [2, 4, 9, 30, 256, 16641, 69247362]
    for k in range(4, 9):
        assert n_seq(k) >= 2 ** (2 ** (k - 4))
        assert n_seq(k + 1) * 4 >= n_seq(k) ** 2
    with pytest.raises(ValueError):
        n_seq(1)


def test_mask_sizes():
    assert mask_sizes(4) == (3, 2) and mask_sizes(2) == (2, 1) and mask_sizes(9) == (6, 4)


def test_decompose_nine_points():
    d = decompose(range(1, 10), 4)
    assert d.mask == (1, 2, 3)
    assert d.q_sets == {1: (4, 5), 2: (6, 7), 3: (8, 9)}
    assert d.P(1) == frozenset({2, 3, 4, 5})
    assert all(len(d.P(q)) == 4 for q in d.mask)
    assert d.avoiders(4) == [2, 3] and d.avoid(4) == 2
    assert d.partner(1) in d.q_sets[1] and d.partner(4) == 1
    assert d.avoid(1) == 1


def test_decompose_four_points():
    d = decompose([4, 3, 2, 1], 2)
    assert len(d.mask) == 2 and all(len(q) == 1 for q in d.q_sets.values())


def test_decompose_properties_random():
    for seed in range(30):
        for i in (2, 3, 4, 5):
            pts = list(range(1, n_seq(i + 1) + 1))
            d = decompose(pts, n_seq(i), seed=seed)
            d.verify()
            assert d == decompose(pts, n_seq(i), seed=seed)
            for p in pts:
                pb = d.partner(p)
                assert all(p in d.P(q) or pb in d.P(q) for q in d.mask)
                assert p not in d.P(d.avoid(p))


def test_decompose_wrong_size():
    with pytest.raises(ValueError):
        decompose(range(1, 9), 4)


def test_priority_order_is_seeded():
    assert priority_order([3, 1, 2], None) == [1, 2, 3]
    assert priority_order(range(10), 5) == priority_order(range(10), 5)


def test_t1_and_t2():
    t1 = build_tree(1, [7, 3])
    assert t1.requests == (3, 7)
    assert root_labels(t1.pattern, list(t1.requests)) == frozenset({3, 7})
    t2 = build_tree(2, [1, 2, 3, 4])
    assert t2.decomposition.mask == (1, 2)
    assert [c.points for c in t2.children] == [(2, 3), (1, 4)]
    assert t2.requests == (2, 3, 1, 4)
    # each T_1 child is one level-1 interval; one level-2 interval; the extra root
    assert t2.pattern.levels == ((0, 3, 5), (0, 5), (0, 5))


def test_tree_sizes():
    assert [build_tree(l, range(1, n_seq(l + 1) + 1)).size for l in (1, 2, 3, 4)] == [2, 4, 12, 72]


@pytest.mark.parametrize("level", [1, 2, 3])
def test_construction_root_labels_by_brute_force(level):
    pts = list(range(1, n_seq(level + 1) + 1))
    tree = build_tree(level, pts, seed=level)
    sigma = list(tree.requests)
    assert brute_force_root_labels(tree.pattern, sigma) == frozenset(pts)
    assert root_labels(tree.pattern, sigma) == frozenset(pts)


def test_construction_level4_by_pipeline():
    pts = list(range(1, 31))
    tree = build_tree(4, pts, seed=0)
    assert root_labels(tree.pattern, list(tree.requests)) == frozenset(pts)


# ----------------------------------------------------------- adversary

def _setup(k, spec, seed=0):
    nk = n_seq(k)
    w = separated_weights(k, nk)
    return make_algorithm(spec, 2 * nk + 1, w, tuple(range(1, k + 1)))


def test_level1_frame_requests_the_other_point():
    st = AdversaryState(5, 2, (1, 2), seed=None)
    a, b = st.frames[1].node.points
    p = st.next_request()
    assert p == (a if st.alg[0] == b else b)
    st.react((p, 2))
    assert st.next_request() == ({a, b} - {p}).pop()
    with pytest.raises(ValueError):
        AdversaryState(3, 1, (1,))


def test_adversary_next_rejects_protocol_violations():
    st = AdversaryState(5, 2, (1, 2), seed=0)
    p = adversary_next(st, None)
    with pytest.raises(Exception):
        adversary_next(st, (1, 2) if p not in (1, 2) else (3, 4))


def test_k2_wfa_two_phases():
    rep = adversary_run(_setup(2, "wfa:lambda=1/2"), 2, phases=2, seed=7)
    assert rep.phases_completed == 2 and rep.regime == "ok"
    assert all(v is True for v in rep.flags.values())
    assert rep.heavy_moves == [3, 3]           # frozen; the heavy_visits flag needs >= n_2 = 2
    assert rep.prefix_ratio() >= 1


def test_phase_shrinks_T_when_heavy_server_enters():
    alg = _setup(2, "wfa:lambda=1/2")
    st = AdversaryState(alg.n, 2, alg.config, seed=7)
    sizes = [len(st.current_T())]
    for _ in range(8):
        T_before, phases_before = st.current_T(), len(st.phases)
        c = alg.step(st.next_request())
        st.react(c)
        if c[1] in T_before and len(st.phases) == phases_before:
            assert st.current_T() == tuple(x for x in T_before if x != c[1])
        sizes.append(len(st.current_T()))
    assert sizes[0] == 2 and min(sizes) <= 1


def test_parked_points_are_not_requested():
    for spec, k in (("wfa:lambda=1/2", 2), ("wfa:lambda=1/2", 3), ("memoryless:q=1/2+1/4+1/4,seed=3", 3),
                    ("memoryless:q=1/2+1/2,seed=1", 2)):
        alg = _setup(k, spec)
        rep = adversary_run(alg, k, phases=3, seed=11, max_steps=3000)
        prev = [rep.c0, *rep.alg_configs]
        for t, p in enumerate(rep.sigma):
            assert p not in prev[t]


def test_greedy_is_degenerate():
    rep = adversary_run(_setup(2, "greedy"), 2, phases=3, seed=0, budget=500)
    assert rep.regime == DEGENERATE
    assert rep.phases_completed == 0 and rep.prefix_ratio() is None
    assert rep.flags["light_ledger"] == "partial" and rep.flags["feasible"] is True


def test_k3_wfa_ledger():
    rep = adversary_run(_setup(3, "wfa:lambda=1/2"), 3, phases=4, seed=1)
    assert rep.phases_completed == 4
    assert all(v is True for v in rep.flags.values())
    assert all(h >= 4 for h in rep.heavy_moves)
    pa, pv = rep.prefix_alg_costs, rep.prefix_adv_costs
    assert pv[2] * 4 <= pa[2]
    assert (pv[0] + pv[1]) * 4 <= pa[1] + pa[2]


def test_memoryless_runs_are_reproducible():
    a = adversary_run(_setup(2, "memoryless:q=1/2+1/2,seed=5"), 2, phases=2, seed=3).transcript()
    b = adversary_run(_setup(2, "memoryless:q=1/2+1/2,seed=5"), 2, phases=2, seed=3).transcript()
    assert a == b


@pytest.mark.parametrize("k,spec,name", [(2, "greedy", "adversary_k2_greedy.txt"),
                                          (3, "greedy", "adversary_k3_greedy.txt"),
                                          (2, "wfa:lambda=1/2", "adversary_k2_wfa.txt")])
def test_golden_transcripts(k, spec, name):
    rep = adversary_run(_setup(k, spec), k, phases=2, seed=7, max_steps=24)
    text = rep.transcript()
    path = GOLDEN / name
    if os.environ.get("WKSERVER_REGEN_GOLDEN"):
        path.write_text(text)
    assert text == path.read_text()


# ----------------------------------------------------------- general metric

def test_metric_weights_example():
    assert metric_weights(2, 2).weights == (1, 4)
    assert metric_weights(3, 1).weights == (1, 4, 20)


def test_check_metric():
    assert check_metric(line_metric(3)) == ([1, 2, 3], 1, 2)
    with pytest.raises(ValueError):
        check_metric(metric_from_rows([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
    with pytest.raises(ValueError):
        check_metric(metric_from_rows([[0, 1], [2, 0]]))


@pytest.mark.parametrize("spec", ["wfa:lambda=1/2", "greedy", "memoryless:q=1/2+1/2,seed=2"])
def test_line_metric_k2(spec):
    w = metric_weights(2, 2)
    alg = make_algorithm(spec, 3, w, (1, 2))
    rep = general_metric_run(line_metric(3), alg, 2, horizon=400, seed=0)
    assert rep.ok, rep.flags
    assert sum((c[1] for c in rep.adv_server_costs), Fraction(0)) == rep.alg_server_costs[1]
    assert rep.adv_total <= 2 * rep.alg_cost


def test_line_metric_every_horizon():
    w = metric_weights(2, 2)
    for h in range(1, 120):
        alg = make_algorithm("wfa:lambda=1/2", 3, w, (1, 2))
        rep = general_metric_run(line_metric(3), alg, 2, horizon=h, seed=h % 3)
        assert rep.ok, (h, rep.flags)


def test_uniform_metric_swaps_follow_heavy_moves():
    w = metric_weights(2, 1)
    alg = WFA(3, w, (1, 2))
    rep = general_metric_run(uniform_metric(3), alg, 2, horizon=200, seed=4)
    moves = sum(1 for a, b in zip([(1, 2), *rep.alg_configs], rep.alg_configs) if a[1] != b[1])
    assert rep.swaps == moves and rep.ok


def test_metric_too_small():
    with pytest.raises(ValueError):
        general_metric_run(line_metric(2), WFA(2, metric_weights(2, 1), (1, 2)), 2)
