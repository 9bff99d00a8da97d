import random
from fractions import Fraction

import pytest

from oracles import all_configs, opt_lazy
from wkserver.algorithms import (WFA, ClassWFA, Greedy, Memoryless, ProtocolError, make_algorithm,
                                 parse_algorithm_spec)
from wkserver.core import WeightProfile, distance
from wkserver.workfn import advance_wf, init_wf

W110 = WeightProfile((1, 10))


def reference_wfa(n, w, c0, lam, reqs):
    """Straightforward WFA over explicit tables with the documented tie-break."""
    cur = tuple(c0)
    out = []
    for t in range(1, len(reqs) + 1):
        tbl = advance_wf(init_wf(n, w, c0), reqs[:t])
        p = reqs[t - 1]
        cands = [c for c in all_configs(n, w.k) if p in c]
        cur = min(cands, key=lambda c: (tbl[c] + lam * distance(c, cur, w), distance(c, cur, w), c))
        out.append(cur)
    return out


def test_wfa_example():
    alg = WFA(3, W110, (1, 2))
    assert alg.step(3) == (3, 2)
    tbl = alg.table
    assert tbl[(3, 2)] + Fraction(1, 2) * 1 == Fraction(3, 2)
    assert alg.cost == 1


def test_wfa_stays_on_covered_request():
    alg = WFA(3, W110, (1, 2))
    assert alg.step(2) == (1, 2) and alg.cost == 0


def test_wfa_k1_always_moves():
    alg = WFA(4, WeightProfile((3,)), (1,))
    for p in (2, 4, 4, 1):
        assert alg.step(p) == (p,)


def test_wfa_matches_reference_implementation():
    rng = random.Random(8)
    for _ in range(60):
        n, k = rng.randint(2, 4), rng.randint(1, 3)
        w = WeightProfile(tuple(sorted(rng.randint(1, 9) for _ in range(k))))
        c0 = tuple(rng.randint(1, n) for _ in range(k))
        lam = rng.choice([Fraction(1, 2), Fraction(1), Fraction(1, 3)])
        reqs = [rng.randint(1, n) for _ in range(rng.randint(1, 6))]
        alg = WFA(n, w, c0, lam)
        assert alg.run(reqs) == reference_wfa(n, w, c0, lam, reqs)


def test_run_batch_equals_step_by_step():
    rng = random.Random(9)
    w = WeightProfile((1, 3, 7))
    reqs = [rng.randint(1, 4) for _ in range(200)]
    a, b = WFA(4, w, (1, 2, 3)), WFA(4, w, (1, 2, 3))
    configs = a.run(reqs)
    idx = b.run_batch(reqs)
    assert [b.table.config(int(i)) for i in idx] == configs
    assert a.cost == b.cost and a.table == b.table


def test_run_cruel_requests_uncovered_points():
    alg = WFA(4, WeightProfile((1, 2, 5)), (1, 2, 3))
    reqs, idx = alg.run_cruel(300)
    prev = (1, 2, 3)
    for p, i in zip(reqs, idx):
        assert p not in prev and p == min(set(range(1, 5)) - set(prev))
        prev = alg.table.config(int(i))


def test_argmin_restriction_is_sound():
    rng = random.Random(10)
    for _ in range(80):
        n, k = rng.randint(2, 4), rng.randint(1, 3)
        w = WeightProfile(tuple(sorted(rng.randint(1, 9) for _ in range(k))))
        c0 = tuple(rng.randint(1, n) for _ in range(k))
        lam = rng.choice([Fraction(1, 2), Fraction(1), Fraction(1, 4)])
        reqs = [rng.randint(1, n) for _ in range(rng.randint(1, 6))]
        tbl = advance_wf(init_wf(n, w, c0), reqs)
        prev = tuple(rng.randint(1, n) for _ in range(k))
        score = lambda c: tbl[c] + lam * distance(c, prev, w)
        full = min(score(c) for c in all_configs(n, k))
        restricted = min(score(c) for c in all_configs(n, k) if reqs[-1] in c)
        assert full == restricted


def test_wfa_is_lazy():
    rng = random.Random(12)
    for _ in range(40):
        w = WeightProfile((1, 4))
        alg = WFA(3, w, (1, 2))
        for p in (rng.randint(1, 3) for _ in range(10)):
            before = alg.config
            after = alg.step(p)
            if p in before:
                tbl = alg.table
                best = min(tbl[c] + alg.lam * distance(c, before, w) for c in all_configs(3, 2) if p in c)
                if tbl[before] == best:
                    assert after == before


def test_class_wfa_singletons_equal_flat_wfa():
    rng = random.Random(13)
    cw = WeightProfile.from_classes((1, 5), (1, 1))
    fw = WeightProfile((1, 5))
    cases = 0
    for n in (2, 3):
        for _ in range(25):
            c0 = (rng.randint(1, n), rng.randint(1, n))
            reqs = [rng.randint(1, n) for _ in range(rng.randint(1, 6))]
            flat = WFA(n, fw, c0).run(reqs)
            cls = ClassWFA(n, cw, ([c0[0]], [c0[1]])).run(reqs)
            assert [(min(a), min(b)) for a, b in cls] == flat
            cases += 1
    assert cases == 50


def test_class_wfa_paging_cycle():
    # One class of two servers on three points: a paging algorithm.
    w = WeightProfile.from_classes((1,), (2,))
    alg = ClassWFA(3, w, ([1, 2],))
    out = alg.run([3, 1, 2])
    assert out == [(frozenset({1, 3}),), (frozenset({1, 3}),), (frozenset({1, 2}),)]   # frozen
    assert alg.step(2) == (frozenset({1, 2}),)


def test_greedy():
    g = Greedy(3, W110, (1, 2))
    assert g.step(3) == (3, 2)
    assert g.step(2) == (3, 2)
    g = Greedy(5, W110, (1, 2))
    g.run([3, 4, 5, 3, 2])
    assert g.cost == 4


def test_memoryless():
    m = Memoryless(3, WeightProfile((2,)), (1,), q=(1,), seed=3)
    assert m.step(3) == (3,)
    m = Memoryless(3, W110, (1, 2), q=("1/2", "1/2"), seed=3)
    assert m.step(2) == (1, 2) and m.cost == 0
    runs = []
    for _ in range(2):
        m = make_algorithm("memoryless:q=1/4+3/4,seed=7", 5, W110, (1, 2))
        runs.append((m.run([3, 4, 5, 1, 2, 3, 4, 5] * 3), m.cost))
    assert runs[0] == runs[1]
    with pytest.raises(ValueError):
        Memoryless(3, W110, (1, 2), q=("1/2", "1/3"))


def test_spec_parsing():
    assert parse_algorithm_spec("wfa:lambda=1/2") == ("wfa", {"lambda": "1/2"})
    assert parse_algorithm_spec("greedy") == ("greedy", {})
    assert make_algorithm("wfa:lambda=1", 3, W110, (1, 2)).lam == 1
    assert isinstance(make_algorithm("wfa-class", 3, WeightProfile.from_classes((1, 10), (1, 1)),
                                     ([1], [2])), ClassWFA)
    with pytest.raises(ValueError):
        make_algorithm("lru", 3, W110, (1, 2))
    with pytest.raises(ValueError):
        parse_algorithm_spec("wfa:lambda")
    with pytest.raises(ValueError):
        WFA(3, W110, (1, 2), lam=0)


def test_protocol_error():
    class Broken(Greedy):
        def _choose(self, p):
            return self.config

    with pytest.raises(ProtocolError):
        Broken(3, W110, (1, 2)).step(3)


def test_serving_invariant_and_cost_accounting():
    rng = random.Random(14)
    w = WeightProfile((1, 3, 9))
    for spec in ("wfa:lambda=1/2", "wfa:lambda=1", "greedy", "memoryless:q=1/3+1/3+1/3,seed=1"):
        alg = make_algorithm(spec, 4, w, (1, 2, 3))
        total = Fraction(0)
        prev = alg.config
        for p in (rng.randint(1, 4) for _ in range(50)):
            c = alg.step(p)
            assert p in c
            total += distance(prev, c, w)
            prev = c
        assert alg.cost == total


def test_wfa_k2_competitive_small():
    rng = random.Random(15)
    for _ in range(100):
        n = rng.randint(2, 5)
        w = WeightProfile((1, rng.choice([1, 2, 4, 8])))
        c0 = (rng.randint(1, n), rng.randint(1, n))
        reqs = [rng.randint(1, n) for _ in range(rng.randint(1, 10))]
        alg = WFA(n, w, c0, 1)
        alg.run(reqs)
        assert alg.cost <= 5 * opt_lazy(reqs, c0, w) + w.total
