"""The adaptive adversary: nested strategies that punish every server move.

Strategy frames form a stack, one per level.  The level-1 frame alternates
two points, a level-``i`` frame picks a mask set avoiding the algorithm's
``s_i`` and runs a level-``i-1`` frame on it, and the top frame runs phases
that end once the algorithm's heaviest server has visited every point of
the candidate set ``T``.  Each frame execution is one interval of the
associated service pattern; the adversary's own schedule is a labeling of
that pattern, fixed after the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..algorithms import OnlineAlgorithm, ProtocolError
from ..core import WeightProfile, cost_str, serves
from ..patterns import Labeling, ServicePattern, check_labeling
from .construction import MaskDecomposition, decompose, n_seq, priority_order

DEGENERATE = "unbounded-ratio regime"


@dataclass
class Node:
    """One strategy execution = one pattern interval."""

    level: int
    start: int
    points: tuple                     # input set in decision order
    parent: "Node | None" = None
    decomposition: MaskDecomposition | None = None
    end: int | None = None            # first time after the interval
    children: list = field(default_factory=list)
    T_final: tuple = ()               # top level: T when the phase ended
    completed: bool = False


@dataclass
class Frame:
    node: Node
    T: list = field(default_factory=list)    # top frame only
    B: list = field(default_factory=list)
    Bp: list = field(default_factory=list)


class AdversaryState:
    """Frame stack plus everything needed to rebuild the pattern afterwards.

    ``top_mode="phase"`` is the single-adversary game; ``"hole"`` is the
    multi-adversary game of the general-metric harness, where each phase is
    one execution of the level-``k-1`` strategy on ``P`` minus the
    algorithm's heavy position.
    """

    def __init__(self, n: int, k: int, c0: Sequence[int], seed: int | None = 0, top_mode: str = "phase",
                 hole_points: Sequence[int] | None = None):
        if k < 2:
            raise ValueError("the adversary needs k >= 2")
        self.n, self.k = n, k
        self.n_k = n_seq(k)
        self.top_mode = top_mode
        if top_mode == "phase" and n < 2 * self.n_k + 1:
            raise ValueError(f"k={k} needs at least {2 * self.n_k + 1} points, got n={n}")
        if top_mode == "hole":
            self.hole_points = tuple(sorted(hole_points))
            if len(self.hole_points) != self.n_k + 1:
                raise ValueError(f"hole mode needs n_k+1={self.n_k + 1} points")
        self.order = priority_order(range(1, n + 1), seed)
        self.rank = {p: i for i, p in enumerate(self.order)}
        self.alg = tuple(c0)
        self.sigma: list[int] = []
        self.frames: list[Frame | None] = [None] * (k + 1)
        self.phases: list[Node] = []
        self.moves: list[int] = []        # highest ALG server moved at each step (0: none)
        self._new_phase(1)

    # ------------------------------------------------------------- frames

    def _sorted(self, pts) -> tuple:
        return tuple(sorted(pts, key=self.rank.__getitem__))

    def _new_phase(self, start: int):
        heavy = self.alg[self.k - 1]
        if self.top_mode == "phase":
            P = [p for p in self.order if p != heavy][:2 * self.n_k]
            node = Node(self.k, start, self._sorted(P))
            fr = Frame(node, T=list(P[:self.n_k]), B=list(P[self.n_k:]))
            self.frames[self.k] = fr
            self.phases.append(node)
            self._push(self.k - 1, self._sorted(fr.T + fr.Bp), start, node)
        else:
            P = self._sorted(p for p in self.hole_points if p != heavy)
            node = Node(self.k, start, P)
            self.frames[self.k] = Frame(node)
            self.phases.append(node)
            self._push(self.k - 1, P, start, node)

    def _push(self, level: int, points: tuple, start: int, parent: Node):
        node = Node(level, start, points, parent)
        parent.children.append(node)
        self.frames[level] = Frame(node)
        if level >= 2:
            node.decomposition = decompose(points, n_seq(level), order=points)
            self._push_child(level, start)

    def _push_child(self, level: int, start: int):
        """Start a new level-(level-1) execution avoiding the algorithm's ``s_level``."""
        node = self.frames[level].node
        q = node.decomposition.avoid(self.alg[level - 1])
        self._push(level - 1, self._sorted(node.decomposition.P(q)), start, node)

    def _close(self, level: int, end: int):
        fr = self.frames[level]
        if fr is not None:
            fr.node.end = end
            self.frames[level] = None

    # ------------------------------------------------------------- protocol

    def react(self, new_alg: Sequence[int]) -> int:
        """Record the algorithm's answer to the last request; returns the top moved level."""
        new_alg = tuple(new_alg)
        if self.sigma and not serves(new_alg, self.sigma[-1]):
            raise ProtocolError(f"configuration {new_alg} does not serve request {self.sigma[-1]}")
        j = max((i + 1 for i in range(self.k) if new_alg[i] != self.alg[i]), default=0)
        self.alg = new_alg
        self.moves.append(j)
        start = len(self.sigma) + 1
        if j < 2:
            return j
        for lv in range(1, j):
            self._close(lv, start)
        if j < self.k:
            self._push_child(j, start)
            return j
        top = self.frames[self.k]
        if self.top_mode == "hole":
            self._close(self.k, start)
            top.node.completed = True
            self._new_phase(start)
            return j
        p = new_alg[self.k - 1]
        if p in top.T:
            top.T.remove(p)
        if not top.T:
            top.node.T_final = (p,)
            top.node.completed = True
            self._close(self.k, start)
            self._new_phase(start)
            return j
        top.Bp = [b for b in top.B if b != p][:self.n_k - len(top.T)]
        self._push(self.k - 1, self._sorted(top.T + top.Bp), start, top.node)
        return j

    def next_request(self) -> int:
        """Level-1 frame: request ``a`` if the algorithm's ``s_1`` is at ``b``, else ``b``."""
        a, b = self.frames[1].node.points
        p = a if self.alg[0] == b else b
        self.sigma.append(p)
        return p

    def current_T(self) -> tuple:
        fr = self.frames[self.k]
        return tuple(fr.T) if fr is not None else ()


def adversary_next(state: AdversaryState, alg_config: Sequence[int] | None = None) -> int:
    """Absorb the algorithm's latest configuration (if any) and emit the next request."""
    if alg_config is not None and state.sigma:
        state.react(alg_config)
    return state.next_request()


# ----------------------------------------------------------------- analysis

def _all_nodes(phases) -> list:
    out = []
    stack = list(reversed(phases))
    while stack:
        nd = stack.pop()
        out.append(nd)
        stack.extend(reversed(nd.children))
    return out


def build_pattern(state: AdversaryState) -> ServicePattern:
    T = len(state.sigma)
    levels = [set() for _ in range(state.k)]
    for nd in _all_nodes(state.phases):
        if 0 < nd.start - 1 and nd.start <= T:
            levels[nd.level - 1].add(nd.start)
    return ServicePattern.from_breakpoints(T, levels)


def label_phase(node: Node, helper: int, out: dict, pattern: ServicePattern):
    """Label ``node`` and its subtree given a point ``helper`` held above it.

    Each interval takes the partner of the helper point; a child is helped by
    whichever of the two its input set contains.
    """
    if node.start > pattern.T:
        return
    idx = pattern.locate(node.level, node.start)
    if node.level == 1:
        a, b = node.points
        out[(1, idx)] = b if helper == a else a
        return
    d = node.decomposition
    mine = d.partner(helper)
    out[(node.level, idx)] = mine
    for c in node.children:
        label_phase(c, helper if helper in c.points else mine, out, pattern)


def adversary_labeling(state: AdversaryState, pattern: ServicePattern) -> tuple:
    """Labels for the single-adversary game; returns ``(labeling, roots)``."""
    out = {}
    roots = []
    for ph in state.phases:
        if ph.start > pattern.T:
            continue
        root = ph.T_final[0] if ph.completed else state.current_T()[0]
        roots.append(root)
        out[(state.k, pattern.locate(state.k, ph.start))] = root
        for c in ph.children:
            label_phase(c, root, out, pattern)
    return Labeling(out), roots


def positions_from_labels(pattern: ServicePattern, alpha: Labeling, k: int) -> list:
    """Per time ``1..T``, the placement implied by the labels (level ``i`` -> server ``i``)."""
    out = []
    for t in range(1, pattern.T + 1):
        out.append(tuple(alpha.get(i, pattern.locate(i, t)) for i in range(1, k + 1)))
    return out


# ----------------------------------------------------------------- run

@dataclass
class RunReport:
    k: int
    n: int
    weights: WeightProfile
    c0: tuple
    n_k: int
    sigma: list
    alg_configs: list
    adv_configs: list
    alg_server_costs: list            # per server, whole run
    adv_server_costs: list            # per server, excluding initial placement
    adv_initial_cost: Fraction
    pattern: ServicePattern
    labeling: Labeling
    phase_ends: list                  # last request time of each completed phase
    heavy_moves: list                 # ALG s_k moves per completed phase
    flags: dict
    prefix: int                       # length of the completed-phase prefix
    prefix_alg_costs: list
    prefix_adv_costs: list
    regime: str = "ok"

    @property
    def phases_completed(self) -> int:
        return len(self.phase_ends)

    @property
    def alg_cost(self) -> Fraction:
        return sum(self.alg_server_costs, Fraction(0))

    @property
    def adv_cost(self) -> Fraction:
        return sum(self.adv_server_costs, Fraction(0))

    def prefix_ratio(self):
        """``cost(ALG)/cost(ADV)`` on the completed-phase prefix (``None`` if ADV paid 0)."""
        a, b = sum(self.prefix_alg_costs, Fraction(0)), sum(self.prefix_adv_costs, Fraction(0))
        return None if b == 0 else a / b

    @property
    def ok(self) -> bool:
        return all(v is True or v == "partial" for v in self.flags.values())

    def transcript(self) -> str:
        return format_transcript(self)


def _server_costs(configs: list, start, w: WeightProfile, upto: int, metric=None) -> list:
    k = w.k
    out = [Fraction(0)] * k
    prev = tuple(start)
    for c in configs[:upto]:
        for i in range(k):
            if c[i] != prev[i] and prev[i] is not None and c[i] is not None:
                out[i] += w.weights[i] * (1 if metric is None else metric[prev[i]][c[i]])
        prev = c
    return out


def _moves(prev, cur) -> list:
    return [(i + 1, cur[i]) for i in range(len(cur)) if prev[i] is not None and cur[i] != prev[i]]


def adversary_run(alg: OnlineAlgorithm, k: int | None = None, phases: int = 1, seed: int | None = 0,
                  max_steps: int = 1_000_000, budget: int = 10_000) -> RunReport:
    """Play the adversary against ``alg`` until ``phases`` phases complete.

    Stops early after ``max_steps`` requests, or after ``budget`` steps in a
    row where only ``s_1`` moved (then the regime is reported as unbounded).
    """
    k = alg.weights.k if k is None else k
    st = AdversaryState(alg.n, k, alg.config, seed)
    c0 = tuple(alg.config)
    configs = []
    quiet = 0
    regime = "ok"
    p = st.next_request()
    while True:
        c = alg.step(p)
        configs.append(c)
        j = st.react(c)
        quiet = 0 if j >= 2 else quiet + 1
        done = sum(ph.completed for ph in st.phases)
        if done >= phases or len(st.sigma) >= max_steps:
            break
        if quiet >= budget:
            regime = DEGENERATE
            break
        p = st.next_request()
    return _analyse(st, alg.weights, c0, configs, regime)


def _analyse(st: AdversaryState, w: WeightProfile, c0, configs, regime) -> RunReport:
    k, n_k = st.k, st.n_k
    pattern = build_pattern(st)
    alpha, _ = adversary_labeling(st, pattern)
    adv = positions_from_labels(pattern, alpha, k)
    T = len(st.sigma)
    done = [ph for ph in st.phases if ph.completed]
    phase_ends = [ph.end - 1 for ph in done]
    prefix = phase_ends[-1] if phase_ends else 0
    adv0 = adv[0] if adv else tuple(c0)
    init = sum((w.weights[i] for i in range(k) if adv0[i] != c0[i]), Fraction(0))

    flags = {}
    # every request is uncovered, so the algorithm pays at each step
    flags["uncovered"] = all(not serves(c, p) for c, p in zip([tuple(c0), *configs], st.sigma))
    # ADV moves s_i at tau only after ALG moved a heavier server at tau-1
    triggered = True
    for tau in range(2, T + 1):
        for i in range(1, k):
            if adv[tau - 1][i - 1] != adv[tau - 2][i - 1] and st.moves[tau - 2] <= i:
                triggered = False
    flags["triggered_moves"] = triggered
    # ALG moved s_k at least n_k times in every completed phase
    prev = [tuple(c0), *configs]
    heavy = [sum(1 for t in range(ph.start, ph.end) if prev[t][k - 1] != prev[t - 1][k - 1]) for ph in done]
    flags["heavy_visits"] = all(h >= n_k for h in heavy)
    flags["feasible"] = check_labeling(pattern, alpha, st.sigma)

    alg_costs = _server_costs(configs, c0, w, T)
    adv_costs = _server_costs(adv, adv0, w, T)
    pa = _server_costs(configs, c0, w, prefix)
    pv = _server_costs(adv, adv0, w, prefix)
    if prefix:
        light_ok = sum(pv[:k - 1], Fraction(0)) * n_k <= sum(pa[1:], Fraction(0))
        heavy_ok = pv[k - 1] * n_k <= pa[k - 1]
        flags["light_ledger"], flags["heavy_ledger"] = light_ok, heavy_ok
    else:
        flags["light_ledger"] = flags["heavy_ledger"] = "partial"
    return RunReport(k, st.n, w, tuple(c0), n_k, list(st.sigma), configs, adv, alg_costs, adv_costs, init, pattern, alpha,
                     phase_ends, heavy, flags, prefix, pa, pv, regime)


# ----------------------------------------------------------------- transcript

def _fmt_moves(ms) -> str:
    return ",".join(f"{i}:{p}" for i, p in ms) if ms else "-"


def format_transcript(rep: RunReport) -> str:
    """One line per step: ``t request alg_moves adv_moves alg_cost adv_cost flags``.

    Moves read ``server:point``; costs are cumulative exact rationals; the
    flag ``phase-end`` marks the last request of a completed phase.
    """
    w = rep.weights
    lines = ["# t request alg_moves adv_moves alg_cost adv_cost flags"]
    alg_total = Fraction(0)
    adv_total = Fraction(0)
    ends = set(rep.phase_ends)
    a_prev = rep.c0
    v_prev = rep.adv_configs[0] if rep.adv_configs else None
    for t, (p, a, v) in enumerate(zip(rep.sigma, rep.alg_configs, rep.adv_configs), 1):
        am = _moves(a_prev, a)
        vm = _moves(v_prev, v) if t > 1 else []
        alg_total += sum((w.weights[i - 1] for i, _ in am), Fraction(0))
        adv_total += sum((w.weights[i - 1] for i, _ in vm), Fraction(0))
        flag = "phase-end" if t in ends else "-"
        lines.append(f"{t} {p} {_fmt_moves(am)} {_fmt_moves(vm)} {cost_str(alg_total)} {cost_str(adv_total)} {flag}")
        a_prev, v_prev = a, v
    return "\n".join(lines) + "\n"
