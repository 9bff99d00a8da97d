"""Many adversaries on a general metric.

``n_k`` adversaries keep their heavy servers on the ``n_k`` points of ``P``
the algorithm's heavy server does not occupy.  When the algorithm moves its
heavy server from ``a`` to ``b``, the adversary sitting at ``b`` moves to
``a``.  Requests come from the level-``k-1`` strategy on ``P`` minus the
algorithm's heavy position; each adversary labels that subtree using its own
heavy point as the helper.  Every cost is the server weight times the metric
distance.  The algorithm itself decides as on the uniform metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..algorithms import OnlineAlgorithm
from ..core import WeightProfile
from ..patterns import Labeling, ServicePattern, check_labeling
from .adversary import AdversaryState, build_pattern, label_phase, positions_from_labels
from .construction import n_seq


def metric_weights(k: int, D, n_k: int | None = None) -> WeightProfile:
    """``w_1 = 1`` and ``w_i = n_k * D * (w_1 + ... + w_{i-1})``."""
    n_k = n_seq(k) if n_k is None else n_k
    ws = [Fraction(1)]
    for _ in range(1, k):
        ws.append(n_k * Fraction(D) * sum(ws))
    return WeightProfile(tuple(ws))


def check_metric(metric) -> tuple:
    """Validate a symmetric distance table keyed ``metric[a][b]``; returns ``(points, min, max)``."""
    pts = sorted(metric)
    dmin = dmax = None
    for a in pts:
        for b in pts:
            d = Fraction(metric[a][b])
            if d != Fraction(metric[b][a]) or (a == b) != (d == 0) or d < 0:
                raise ValueError(f"not a metric at ({a}, {b})")
            if a != b:
                dmin = d if dmin is None else min(dmin, d)
                dmax = d if dmax is None else max(dmax, d)
    for a in pts:
        for b in pts:
            for c in pts:
                if Fraction(metric[a][c]) > Fraction(metric[a][b]) + Fraction(metric[b][c]):
                    raise ValueError(f"triangle inequality fails for {a}, {b}, {c}")
    return pts, dmin, dmax


@dataclass
class MetricRunReport:
    k: int
    points: tuple
    weights: WeightProfile
    sigma: list
    alg_configs: list
    alg_server_costs: list
    adv_server_costs: list          # per adversary, per server, excluding initial placement
    adv_initial_costs: list
    pattern: ServicePattern
    labelings: list                 # per adversary
    swaps: int
    flags: dict

    @property
    def alg_cost(self) -> Fraction:
        return sum(self.alg_server_costs, Fraction(0))

    @property
    def adv_total(self) -> Fraction:
        return sum((sum(c, Fraction(0)) for c in self.adv_server_costs), Fraction(0))

    @property
    def ok(self) -> bool:
        return all(self.flags.values())


def general_metric_run(metric, alg: OnlineAlgorithm, k: int | None = None, horizon: int = 1000,
                       seed: int | None = 0) -> MetricRunReport:
    """Play the ``n_k``-adversary game for ``horizon`` requests.

    ``metric[a][b]`` gives distances on the algorithm's universe ``1..n``,
    which must have exactly ``n_k + 1`` points with minimum distance 1.
    """
    k = alg.weights.k if k is None else k
    n_k = n_seq(k)
    pts, dmin, _ = check_metric(metric)
    if len(pts) < n_k + 1:
        raise ValueError(f"k={k} needs at least {n_k + 1} points, got {len(pts)}")
    if len(pts) != n_k + 1 or tuple(pts) != tuple(range(1, alg.n + 1)):
        raise ValueError("the metric must cover exactly the algorithm's points 1..n_k+1")
    if dmin != 1:
        raise ValueError(f"normalize the metric to minimum distance 1, got {dmin}")
    w = alg.weights
    c0 = tuple(alg.config)
    st = AdversaryState(alg.n, k, c0, seed, top_mode="hole", hole_points=pts)
    heavy0 = c0[k - 1]
    # adversary i starts with its heavy server on the i-th free point
    adv_heavy = [p for p in pts if p != heavy0]
    heavy_hist = [list(adv_heavy)]          # heavy positions during each phase
    configs = []
    swaps = 0
    distinct = True
    prev = c0
    for _ in range(horizon):
        p = st.next_request()
        c = alg.step(p)
        configs.append(c)
        if c[k - 1] != prev[k - 1]:
            i = adv_heavy.index(c[k - 1])
            adv_heavy[i] = prev[k - 1]
            swaps += 1
            heavy_hist.append(list(adv_heavy))
            distinct &= len({*adv_heavy, c[k - 1]}) == n_k + 1
        st.react(c)
        prev = c
    pattern = build_pattern(st)
    T = pattern.T
    labelings, positions = [], []
    for a in range(n_k):
        out = {}
        for ph, hv in zip(st.phases, heavy_hist):
            if ph.start > T:
                continue
            out[(k, pattern.locate(k, ph.start))] = hv[a]
            for ch in ph.children:
                label_phase(ch, hv[a], out, pattern)
        alpha = Labeling(out)
        labelings.append(alpha)
        positions.append(positions_from_labels(pattern, alpha, k))

    def charge(seq, start, upto):
        out = [Fraction(0)] * k
        last = tuple(start)
        for c in seq[:upto]:
            for j in range(k):
                if c[j] != last[j]:
                    out[j] += w.weights[j] * Fraction(metric[last[j]][c[j]])
            last = c
        return out

    alg_costs = charge(configs, c0, T)
    adv_costs = [charge(pos, pos[0], T) if pos else [Fraction(0)] * k for pos in positions]
    # a swap at the last step opens a phase after the horizon; its move is still owed
    if len(heavy_hist) > sum(1 for ph in st.phases if ph.start <= T):
        for a in range(n_k):
            if heavy_hist[-1][a] != heavy_hist[-2][a]:
                adv_costs[a][k - 1] += w.weights[k - 1] * Fraction(metric[heavy_hist[-2][a]][heavy_hist[-1][a]])
    adv_init = [sum((w.weights[j] * Fraction(metric[c0[j]][pos[0][j]]) for j in range(k)), Fraction(0))
                if pos else Fraction(0) for pos in positions]
    flags = {
        "feasible": all(check_labeling(pattern, a, st.sigma) for a in labelings),
        "distinct_heavy": distinct,
        "heavy_identity": sum((c[k - 1] for c in adv_costs), Fraction(0)) == alg_costs[k - 1],
        "light_le_alg": sum((sum(c[:k - 1], Fraction(0)) for c in adv_costs), Fraction(0))
        <= sum(alg_costs, Fraction(0)),
    }
    total_adv = sum((sum(c, Fraction(0)) for c in adv_costs), Fraction(0))
    flags["sum_le_2alg"] = total_adv <= 2 * sum(alg_costs, Fraction(0))
    return MetricRunReport(k, tuple(pts), w, list(st.sigma), configs, alg_costs, adv_costs, adv_init, pattern,
                           labelings, swaps, flags)


def line_metric(n: int) -> dict:
    """Points ``1..n`` on a line with unit spacing."""
    return {a: {b: abs(a - b) for b in range(1, n + 1)} for a in range(1, n + 1)}


def uniform_metric(n: int) -> dict:
    return {a: {b: int(a != b) for b in range(1, n + 1)} for a in range(1, n + 1)}


def metric_from_rows(rows: Sequence[Sequence]) -> dict:
    return {a + 1: {b + 1: Fraction(x) for b, x in enumerate(r)} for a, r in enumerate(rows)}
