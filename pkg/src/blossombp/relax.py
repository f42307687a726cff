"""The per-iteration relaxation on the contracted graph and the Step B decision.

Edge values are half-units: 0, 1, 2 stand for x = 0, 1/2, 1.  Non-blossom
nodes need half-unit degree exactly 2, blossom nodes at least 2.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence, Union

import networkx as nx

from .contraction import ContractedGraph
from .errors import Infeasible, NonUnique, StateError
from .numeric import Dyadic, TieBreakCost, common_exponent

DEFAULT_ENUMERATE_LIMIT = 16


@dataclass(frozen=True)
class HalfIntegralSolution:
    x: tuple[int, ...]
    objective: TieBreakCost
    rounds: int = field(default=0, compare=False)  # BP rounds spent, 0 for enumerate


@dataclass(frozen=True)
class Terminate:
    pass


@dataclass(frozen=True)
class Expand:
    blossom: int


@dataclass(frozen=True)
class Contract:
    nodes: tuple[int, ...]
    edges: tuple[int, ...]  # contracted edge ids; edges[i] joins nodes[i] and nodes[i+1]


StepDecision = Union[Terminate, Expand, Contract]


@dataclass
class ValidationReport:
    ok: bool
    cycles: list[tuple[tuple[int, ...], tuple[int, ...]]]
    violations: list[str]
    bad_nodes: list[int]
    bad_edges: list[int]


def objective(cg: ContractedGraph, x: Sequence[int]) -> TieBreakCost:
    """Sum of w'*x; the secondary channel counts the edges at x = 1."""
    total = Dyadic(0)
    full = 0
    for e, xe in zip(cg.edges, x):
        if xe:
            total += e.weight * xe
        full += xe == 2
    return TieBreakCost(total.halve(), full)


def node_degrees(cg: ContractedGraph, x: Sequence[int]) -> dict[int, int]:
    deg = dict.fromkeys(cg.nodes, 0)
    for e, xe in zip(cg.edges, x):
        deg[e.u] += xe
        deg[e.v] += xe
    return deg


def half_components(cg: ContractedGraph, x: Sequence[int]) -> tuple[list[tuple[tuple[int, ...], tuple[int, ...]]], list[int]]:
    """Walk the half-support as cycles; return (cycles, nodes whose half-degree is not 0 or 2)."""
    adj: dict[int, list[int]] = {}
    for e, xe in zip(cg.edges, x):
        if xe == 1:
            adj.setdefault(e.u, []).append(e.id)
            adj.setdefault(e.v, []).append(e.id)
    bad = sorted(v for v, inc in adj.items() if len(inc) != 2)
    if bad:
        return [], bad
    seen: set[int] = set()
    cycles = []
    for e0 in sorted(i for i, xe in enumerate(x) if xe == 1):
        if e0 in seen:
            continue
        start = cg.edges[e0].u
        nodes, edges = [start], []
        cur, e = start, e0
        while True:
            seen.add(e)
            edges.append(e)
            nxt = cg.edges[e].other(cur)
            if nxt == start:
                break
            nodes.append(nxt)
            a, b = adj[nxt]
            e = b if a == e else a
            cur = nxt
        cycles.append((tuple(nodes), tuple(edges)))
    return cycles, []


def half_cycles(cg: ContractedGraph, x: Sequence[int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    cycles, bad = half_components(cg, x)
    if bad:
        raise StateError(f"half-support is not a union of cycles at nodes {bad}")
    return cycles


def validate_half_integral(cg: ContractedGraph, x: Sequence[int]) -> ValidationReport:
    violations, bad_nodes, bad_edges = [], [], []
    if len(x) != len(cg.edges):
        return ValidationReport(False, [], [f"expected {len(cg.edges)} values, got {len(x)}"], [], [])
    for e, xe in zip(cg.edges, x):
        if xe not in (0, 1, 2):
            violations.append(f"edge {e.id} has value {xe} outside {{0,1,2}}")
            bad_edges.append(e.id)
    if bad_edges:
        return ValidationReport(False, [], violations, [], bad_edges)
    for v, d in node_degrees(cg, x).items():
        if cg.is_blossom(v) and d < 2:
            violations.append(f"blossom node {v} has degree {d}/2 < 1")
            bad_nodes.append(v)
        elif not cg.is_blossom(v) and d != 2:
            violations.append(f"node {v} has degree {d}/2 != 1")
            bad_nodes.append(v)
    cycles, branching = half_components(cg, x)
    if branching:
        violations.append(f"half edges do not form disjoint cycles at nodes {branching}")
        bad_nodes.extend(branching)
    for nodes, edges in cycles:
        if len(edges) % 2 == 0:
            violations.append(f"even half cycle through edges {list(edges)}")
            bad_edges.extend(edges)
    return ValidationReport(not violations, cycles, violations, sorted(set(bad_nodes)), sorted(set(bad_edges)))


def classify(cg: ContractedGraph, x: Sequence[int]) -> StepDecision:
    deg = node_degrees(cg, x)
    if all(xe != 1 for xe in x) and all(d == 2 for d in deg.values()):
        return Terminate()
    heavy = sorted(v for v in cg.blossoms if deg[v] > 2)
    if heavy:
        return Expand(heavy[0])
    cycles = half_cycles(cg, x)
    if not cycles:
        raise StateError("no terminate, expand or contract step applies")
    nodes, edges = cycles[0]  # cycles are ordered by their smallest edge id
    if len(edges) % 2 == 0:
        raise StateError(f"smallest half cycle is even: edges {list(edges)}")
    return Contract(nodes, edges)


# -- exhaustive backend -------------------------------------------------------

def _enumerate_range(cg, costs, prefixes):
    """DFS below each fixed prefix; returns (best, second_primary_equal, found, best_x)."""
    m = len(cg.edges)
    idx = {v: i for i, v in enumerate(cg.nodes)}
    ends = [(idx[e.u], idx[e.v]) for e in cg.edges]
    exact = [not cg.is_blossom(v) for v in cg.nodes]
    # remaining capacity in half-units after edge k is decided
    rem = [[0] * len(cg.nodes) for _ in range(m + 1)]
    for k in range(m - 1, -1, -1):
        rem[k] = rem[k + 1][:]
        a, b = ends[k]
        rem[k][a] += 2
        rem[k][b] += 2
    # optimistic completion cost of edges k.. (negative costs taken at full value)
    opt = [0] * (m + 1)
    for k in range(m - 1, -1, -1):
        opt[k] = opt[k + 1] + min(0, 2 * costs[k])

    best = None
    best_x = None
    tied = False
    deg = [0] * len(cg.nodes)
    x = [0] * m

    def feasible_after(k, a, b):
        for v in (a, b):
            if exact[v] and deg[v] > 2:
                return False
            if deg[v] + rem[k + 1][v] < 2:
                return False
        return True

    def dfs(k, primary, secondary):
        nonlocal best, best_x, tied
        if best is not None and primary + opt[k] > best[0]:
            return
        if k == m:
            cand = (primary, secondary)
            if best is None or cand[0] < best[0]:
                best, best_x, tied = cand, tuple(x), False
            elif cand[0] == best[0]:
                tied = True
                if cand < best:
                    best, best_x = cand, tuple(x)
            return
        a, b = ends[k]
        for val in (0, 1, 2):
            deg[a] += val
            deg[b] += val
            if feasible_after(k, a, b):
                x[k] = val
                dfs(k + 1, primary + val * costs[k], secondary + (val == 2))
            deg[a] -= val
            deg[b] -= val
        x[k] = 0

    results = []
    for prefix in prefixes:
        best, best_x, tied = None, None, False
        deg[:] = [0] * len(cg.nodes)
        ok = True
        primary = secondary = 0
        for k, val in enumerate(prefix):
            a, b = ends[k]
            deg[a] += val
            deg[b] += val
            x[k] = val
            primary += val * costs[k]
            secondary += val == 2
            if not feasible_after(k, a, b):
                ok = False
                break
        if ok:
            dfs(len(prefix), primary, secondary)
        results.append((best, tied, best_x))
    return results


def enumerate_backend(cg: ContractedGraph, limit: int = DEFAULT_ENUMERATE_LIMIT, threads: int = 1) -> HalfIntegralSolution:
    """Exhaustive search over {0,1,2}^|E'| with degree pruning; ties on w'*x raise NonUnique."""
    m = len(cg.edges)
    if m > limit:
        raise ValueError(f"{m} contracted edges exceed the enumerate limit {limit}")
    for v in cg.nodes:
        if not cg.incident(v):
            raise Infeasible(f"no perfect matching: node {v} has no incident edge")
    k = common_exponent(e.weight for e in cg.edges)
    costs = [e.weight.scaled(k) for e in cg.edges]
    depth = min(m, 2) if threads > 1 else 0
    prefixes = list(product((0, 1, 2), repeat=depth))
    if threads > 1:
        chunks = [prefixes[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda c: _enumerate_range(cg, costs, c), chunks))
        results = [r for part in parts for r in part]
    else:
        results = _enumerate_range(cg, costs, prefixes)
    # deterministic reduction: the order of partial results does not matter
    best, best_x, tied = None, None, False
    for cand, cand_tied, cand_x in results:
        if cand is None:
            continue
        if best is None or cand[0] < best[0]:
            best, best_x, tied = cand, cand_x, cand_tied
        elif cand[0] == best[0]:
            tied = True
            if cand < best:
                best, best_x = cand, cand_x
    if best is None:
        raise Infeasible("no perfect matching: relaxation is infeasible")
    if tied:
        raise NonUnique("relaxation optimum is not unique")
    return HalfIntegralSolution(best_x, objective(cg, best_x))


# -- exact optimality and feasibility checks ---------------------------------

def certify_optimal(cg: ContractedGraph, x: Sequence[int]) -> bool:
    """True iff the feasible point ``x`` is optimal for the relaxation.

    Builds the complementary-slackness dual system (two variables per
    inequality, unit coefficients) and tests it for feasibility with
    Bellman-Ford on the doubled variables +y_v / -y_v.
    """
    k = common_exponent(e.weight for e in cg.edges)
    idx = {v: i for i, v in enumerate(cg.nodes)}
    deg = node_degrees(cg, x)
    arcs = []

    def pos(v):
        return 2 * idx[v]

    def neg(v):
        return 2 * idx[v] + 1

    for e, xe in zip(cg.edges, x):
        c = e.weight.scaled(k)
        if xe in (0, 1):  # y_u + y_v <= c
            arcs.append((neg(e.v), pos(e.u), c))
            arcs.append((neg(e.u), pos(e.v), c))
        if xe in (1, 2):  # y_u + y_v >= c
            arcs.append((pos(e.v), neg(e.u), -c))
            arcs.append((pos(e.u), neg(e.v), -c))
    for v in cg.blossoms:
        arcs.append((pos(v), neg(v), 0))  # y_v >= 0
        if deg[v] > 2:
            arcs.append((neg(v), pos(v), 0))  # slack constraint forces y_v = 0
    dist = [0] * (2 * len(cg.nodes))
    for _ in range(len(dist) + 1):
        changed = False
        for i, j, c in arcs:
            if dist[i] + c < dist[j]:
                dist[j] = dist[i] + c
                changed = True
        if not changed:
            return True
    return False


def lp_feasible(cg: ContractedGraph) -> bool:
    """Exact feasibility of the relaxation via a flow on the bipartite double cover."""
    if not cg.edges:
        return not cg.nodes
    deg = {v: len(cg.incident(v)) for v in cg.nodes}
    # lower-bounded source/sink arcs folded into node demands (circulation form)
    flow = nx.DiGraph()
    flow.add_edge("t", "s", capacity=sum(deg.values()))
    for v in cg.nodes:
        upper = deg[v] if cg.is_blossom(v) else 1
        flow.add_edge("s", ("L", v), capacity=upper - 1)
        flow.add_edge(("R", v), "t", capacity=upper - 1)
        flow.add_edge("S*", ("L", v), capacity=1)
        flow.add_edge(("R", v), "T*", capacity=1)
    flow.add_edge("S*", "t", capacity=len(cg.nodes))
    flow.add_edge("s", "T*", capacity=len(cg.nodes))
    for e in cg.edges:
        for a, b in ((e.u, e.v), (e.v, e.u)):
            if flow.has_edge(("L", a), ("R", b)):
                flow[("L", a)][("R", b)]["capacity"] += 1
            else:
                flow.add_edge(("L", a), ("R", b), capacity=1)
    value = nx.maximum_flow_value(flow, "S*", "T*")
    return value == 2 * len(cg.nodes)


def solve_relaxation(cg: ContractedGraph, backend: str = "bp", *, bp_config=None,
                     enumerate_limit: int = DEFAULT_ENUMERATE_LIMIT, threads: int = 1) -> HalfIntegralSolution:
    if not cg.nodes:
        raise ValueError("empty contracted graph")
    if backend == "enumerate":
        return enumerate_backend(cg, enumerate_limit, threads)
    if backend == "bp":
        from .bp import bp_backend
        return bp_backend(cg, bp_config)
    raise ValueError(f"unknown backend {backend!r}")
