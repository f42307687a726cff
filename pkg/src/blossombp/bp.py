"""Min-sum belief propagation on the edge-doubled factor graph.

Every contracted edge ``e`` becomes two binary copies ``2e`` and ``2e+1``
(e1, e2), each attached to the factors of both endpoints.  Non-blossom
factors require exactly two active copies, blossom factors at least two.
Messages are stored as differences m(1) - m(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .contraction import ContractedGraph
from .errors import Infeasible, NonConvergence, NonUnique, StateError
from .numeric import Dyadic, TieBreakCost, common_exponent
from .relax import HalfIntegralSolution, certify_optimal, lp_feasible, objective

EXACT2 = 0
AT_LEAST2 = 1

INF64 = 1 << 61
_SAFE64 = 1 << 59

TIE = 2


@dataclass(frozen=True)
class FactorGraph:
    nodes: tuple[int, ...]
    modes: np.ndarray  # per factor: EXACT2 or AT_LEAST2
    fa: np.ndarray  # per variable: factor index of the edge's first endpoint
    fb: np.ndarray
    fptr: np.ndarray  # CSR over factors -> variables
    fvar: np.ndarray
    weights: tuple[Dyadic, ...]  # w' per contracted edge
    exp: int  # weights are integers after scaling by 2**exp

    @property
    def variable_count(self) -> int:
        return len(self.fa)

    @property
    def factor_count(self) -> int:
        return len(self.modes)

    def base_costs(self) -> list[int]:
        return [w.scaled(self.exp) for w in self.weights]

    def variable_cost(self, var: int) -> TieBreakCost:
        """Lexicographic cost of setting ``var`` to 1: copy e2 pays one extra tie-break unit."""
        return TieBreakCost(self.weights[var // 2], var % 2)

    def costs(self, bias: int) -> list[int]:
        """Integer costs with copy e2 made ``bias`` units (of 2**-exp) dearer than e1."""
        out = []
        for c in self.base_costs():
            out += [c, c + bias]
        return out

    def factor_variables(self, f: int) -> list[int]:
        return [int(v) for v in self.fvar[self.fptr[f]:self.fptr[f + 1]]]


def build_gm(cg: ContractedGraph) -> FactorGraph:
    idx = {v: i for i, v in enumerate(cg.nodes)}
    for v in cg.nodes:
        if not cg.incident(v):
            raise Infeasible(f"no perfect matching: node {v} has no incident edge")
    fa = np.repeat(np.array([idx[e.u] for e in cg.edges], dtype=np.int64), 2)
    fb = np.repeat(np.array([idx[e.v] for e in cg.edges], dtype=np.int64), 2)
    incident: list[list[int]] = [[] for _ in cg.nodes]
    for var in range(len(fa)):
        incident[fa[var]].append(var)
        incident[fb[var]].append(var)
    fptr = np.zeros(len(cg.nodes) + 1, dtype=np.int64)
    fptr[1:] = np.cumsum([len(lst) for lst in incident])
    fvar = np.array([v for lst in incident for v in lst], dtype=np.int64)
    modes = np.array([AT_LEAST2 if cg.is_blossom(v) else EXACT2 for v in cg.nodes], dtype=np.int64)
    weights = tuple(e.weight for e in cg.edges)
    return FactorGraph(tuple(cg.nodes), modes, fa, fb, fptr, fvar, weights, common_exponent(weights))


def factor_to_variable(mode: int, others: Sequence) -> object:
    """Message difference m(1) - m(0) from a factor, given the other copies' incoming differences.

    Works for any ordered additive values (ints, Fractions, Dyadic); an
    infeasible assignment is represented by ``-math.inf``.
    """
    if len(others) < 2:
        return -math.inf
    second = sorted(others)[1]
    if mode == EXACT2:
        return -second
    return -second if second > 0 else 0


@numba.njit(cache=True)
def _min_sum_kernel(cost, ma, mb, fa, fb, fptr, fvar, mode, max_rounds, window, inf):
    """Synchronous min-sum rounds; returns (decisions, rounds, stopped_stable, had_tie).

    ``ma``/``mb`` hold the factor-to-variable messages from ``fa[i]``/``fb[i]``;
    they are read as the starting point and updated in place.  ``inf`` is the
    saturation value; anything at or beyond ``inf // 2`` in magnitude is
    treated as infinite.
    """
    nv = cost.shape[0]
    nf = fptr.shape[0] - 1
    half = inf // 2
    na = np.zeros_like(cost)
    nb = np.zeros_like(cost)
    va = np.zeros_like(cost)  # variable i -> factor fa[i]
    vb = np.zeros_like(cost)
    dec = np.zeros(nv, np.int8)
    prev = np.full(nv, -1, np.int8)
    ones = np.zeros(nf, np.int64)
    stable = 0
    tie = False
    for r in range(1, max_rounds + 1):
        for i in range(nv):
            t = cost[i] + mb[i]
            if mb[i] >= half or t >= half:
                t = inf
            elif mb[i] <= -half or t <= -half:
                t = -inf
            va[i] = t
            t = cost[i] + ma[i]
            if ma[i] >= half or t >= half:
                t = inf
            elif ma[i] <= -half or t <= -half:
                t = -inf
            vb[i] = t
        for f in range(nf):
            s1 = inf + 1
            s2 = inf + 1
            s3 = inf + 1
            i1 = -1
            i2 = -1
            for p in range(fptr[f], fptr[f + 1]):
                i = fvar[p]
                a = va[i] if fa[i] == f else vb[i]
                if a < s1:
                    s3 = s2
                    s2 = s1
                    i2 = i1
                    s1 = a
                    i1 = i
                elif a < s2:
                    s3 = s2
                    s2 = a
                    i2 = i
                elif a < s3:
                    s3 = a
            for p in range(fptr[f], fptr[f + 1]):
                i = fvar[p]
                o2 = s3 if (i == i1 or i == i2) else s2
                if o2 > inf:
                    m = -inf
                elif mode[f] == 0 or o2 > 0:
                    m = -o2
                else:
                    m = o2 - o2
                if fa[i] == f:
                    na[i] = m
                else:
                    nb[i] = m
        for i in range(nv):
            ma[i] = na[i]
            mb[i] = nb[i]
        changed = False
        tie = False
        for f in range(nf):
            ones[f] = 0
        for i in range(nv):
            x = ma[i]
            y = mb[i]
            if x >= half or x <= -half or y >= half or y <= -half:
                b = 0
                if x >= half:
                    b += 1
                elif x <= -half:
                    b -= 1
                if y >= half:
                    b += 1
                elif y <= -half:
                    b -= 1
            else:
                b = cost[i] + x + y
            if b < 0:
                d = 1
            elif b > 0:
                d = 0
            else:
                d = TIE
                tie = True
            dec[i] = d
            if d == 1:
                ones[fa[i]] += 1
                ones[fb[i]] += 1
            if d != prev[i]:
                changed = True
            prev[i] = d
        feasible = not tie
        for f in range(nf):
            if mode[f] == 0 and ones[f] != 2 or mode[f] == 1 and ones[f] < 2:
                feasible = False
        if changed or not feasible:
            stable = 0
        else:
            stable += 1
        if stable >= window:
            return dec, r, True, tie
    return dec, max_rounds, False, tie


@dataclass
class MessageState:
    """Factor-to-variable message differences, kept between runs for warm starts."""

    ma: np.ndarray  # from factor fa[i] to variable i
    mb: np.ndarray
    rounds: int = 0

    @classmethod
    def zeros(cls, fg: FactorGraph, wide: bool = False) -> MessageState:
        dtype = object if wide else np.int64
        n = fg.variable_count
        return cls(np.zeros(n, dtype=dtype), np.zeros(n, dtype=dtype))

    @property
    def wide(self) -> bool:
        return self.ma.dtype == object


def needs_wide(costs: Sequence[int], total_rounds: int) -> bool:
    """True if int64 messages could reach the saturation range within ``total_rounds``."""
    peak = max((abs(c) for c in costs), default=0)
    return (peak + 1) * (total_rounds + 2) >= _SAFE64


@dataclass(frozen=True)
class MinSumResult:
    decisions: tuple[int, ...]  # 0, 1, or TIE per variable
    rounds: int


def run_min_sum(fg: FactorGraph, costs: Sequence[int], max_rounds: int = 10000,
                stable_window: int | None = None, state: MessageState | None = None) -> MinSumResult:
    """Run synchronous min-sum until the decoded assignment is stable and feasible.

    Starts from ``state`` when given (and updates it), else from zero
    messages.  Raises NonConvergence at the round cap, or NonUnique if the
    last round decoded a tie.
    """
    window = len(fg.nodes) + 5 if stable_window is None else stable_window
    if state is None:
        state = MessageState.zeros(fg, needs_wide(costs, max_rounds))
    if state.wide:
        # same code on Python ints, with an infinity beyond any reachable value
        peak = max((abs(c) for c in costs), default=0)
        inf = 1 << ((peak + 1) * (state.rounds + max_rounds + 2)).bit_length() + 4
        dec, rounds, ok, tie = _min_sum_kernel.py_func(
            np.array(costs, dtype=object), state.ma, state.mb, fg.fa, fg.fb, fg.fptr, fg.fvar, fg.modes,
            max_rounds, window, inf)
    else:
        dec, rounds, ok, tie = _min_sum_kernel(
            np.array(costs, dtype=np.int64), state.ma, state.mb, fg.fa, fg.fb, fg.fptr, fg.fvar, fg.modes,
            max_rounds, window, np.int64(INF64))
    state.rounds += rounds
    if not ok:
        if tie:
            raise NonUnique(f"belief tie after {rounds} rounds")
        raise NonConvergence(f"no stable assignment within {max_rounds} rounds")
    return MinSumResult(tuple(int(d) for d in dec), int(rounds))


def decode_half(fg: FactorGraph, decisions: Sequence[int], cg: ContractedGraph | None = None) -> tuple[int, ...]:
    """Half-unit vector x_e = z(e1) + z(e2); raises StateError on a tie or a violated node constraint."""
    if any(d == TIE for d in decisions):
        raise StateError("cannot decode a tied assignment")
    x = tuple(decisions[2 * e] + decisions[2 * e + 1] for e in range(len(fg.weights)))
    deg = [0] * len(fg.nodes)
    for e, xe in enumerate(x):
        deg[fg.fa[2 * e]] += xe
        deg[fg.fb[2 * e]] += xe
    for f, d in enumerate(deg):
        if fg.modes[f] == EXACT2 and d != 2 or fg.modes[f] == AT_LEAST2 and d < 2:
            raise StateError(f"decoded assignment violates the constraint of node {fg.nodes[f]}")
    return x


@dataclass(frozen=True)
class BPConfig:
    max_rounds: int = 10000
    stable_window: int | None = None  # default |V'| + 5
    shrink: int = 4  # copy-bias divisor after an uncertified run

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be positive")
        if self.shrink < 2:
            raise ValueError("shrink must be at least 2")


def initial_bias(cg: ContractedGraph, exp: int) -> int:
    return max(1, (cg.scale << exp) // (2 * len(cg.nodes)))


def bp_backend(cg: ContractedGraph, cfg: BPConfig | None = None) -> HalfIntegralSolution:
    """Solve the relaxation with BP and certify the decoded point.

    The copies e1/e2 of a half edge only separate through the e2 cost
    offset.  A large offset converges fast but may pick a wrong point, so each
    decode is checked by an exact dual certificate and the offset shrinks
    until one passes.  Runs that hit the round cap also shrink the offset:
    BP tends to oscillate near the offset where the biased optimum switches.
    """
    cfg = cfg or BPConfig()
    fg = build_gm(cg)
    bias = initial_bias(cg, fg.exp)
    rounds = 0
    failure: Exception | None = None
    checked_feasible = False
    while True:
        # every run starts from zero messages; reusing the previous run's
        # messages was measured to converge to uncertified points more often
        state = MessageState.zeros(fg, needs_wide(fg.costs(bias), cfg.max_rounds))
        try:
            res = run_min_sum(fg, fg.costs(bias), cfg.max_rounds, cfg.stable_window, state)
        except (NonConvergence, NonUnique) as exc:
            rounds += state.rounds
            failure = exc
            if not checked_feasible:
                if not lp_feasible(cg):
                    raise Infeasible("no perfect matching: relaxation is infeasible") from None
                checked_feasible = True
        else:
            rounds += state.rounds
            x = decode_half(fg, res.decisions)
            if certify_optimal(cg, x):
                return HalfIntegralSolution(x, objective(cg, x), rounds)
            failure = NonConvergence("BP fixed point is not an optimum of the relaxation")
        if bias == 1:
            raise type(failure)(f"{failure} ({rounds} rounds in total)")
        bias = max(1, bias // cfg.shrink)
