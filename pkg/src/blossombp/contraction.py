"""Laminar blossom family, stored duals, contracted graph and matching recovery.

Node ids are plain ints: ``0..n-1`` are original vertices and blossoms are
numbered ``n, n+1, ...`` in creation order (never reused within a solve).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import StateError
from .graph import PerturbedGraph
from .numeric import Dyadic, to_decimal


@dataclass
class BlossomRecord:
    id: int
    cycle: list[int]
    cycle_edges: list[int]  # original edge ids; cycle_edges[i] joins cycle[i], cycle[i+1]
    alive: bool = True


@dataclass(frozen=True)
class ContractedEdge:
    id: int
    u: int
    v: int
    original: int
    weight: Dyadic

    def other(self, node: int) -> int:
        return self.v if node == self.u else self.u


@dataclass(frozen=True)
class ContractedGraph:
    """Multigraph over the outer nodes with reduced weights."""

    nodes: tuple[int, ...]
    edges: tuple[ContractedEdge, ...]
    blossoms: frozenset[int]
    scale: int = 1  # weight units per unit of base weight, as in PerturbedGraph.scale
    _incidence: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        inc: dict[int, list[int]] = {v: [] for v in self.nodes}
        for e in self.edges:
            inc[e.u].append(e.id)
            inc[e.v].append(e.id)
        object.__setattr__(self, "_incidence", inc)

    def is_blossom(self, node: int) -> bool:
        return node in self.blossoms

    def incident(self, node: int) -> list[int]:
        return self._incidence[node]


class SolverState:
    """Mutable Blossom-LP state: the laminar family and the stored duals."""

    def __init__(self, graph: PerturbedGraph):
        self.graph = graph
        self.n = graph.base.vertex_count
        self.parent: dict[int, int] = {}
        self.blossoms: dict[int, BlossomRecord] = {}
        self.y: dict[int, Dyadic] = {}
        self._next = self.n
        self.log: list[dict] = []

    # -- queries ---------------------------------------------------------

    def is_blossom(self, node: int) -> bool:
        return node >= self.n

    def label(self, node: int) -> int | str:
        """Trace label: 1-based vertex number, or ``"b<k>"`` for the k-th blossom."""
        return node + 1 if node < self.n else f"b{node - self.n}"

    def outer(self, node: int) -> int:
        while node in self.parent:
            node = self.parent[node]
        return node

    def live_blossoms(self) -> list[int]:
        return sorted(b for b, rec in self.blossoms.items() if rec.alive)

    def outer_nodes(self) -> list[int]:
        return sorted({self.outer(v) for v in range(self.n)})

    def members(self, node: int) -> Iterator[int]:
        """Original vertices inside ``node`` (the node itself for a vertex)."""
        if node < self.n:
            yield node
            return
        for child in self.blossoms[node].cycle:
            yield from self.members(child)

    def hidden_sum(self, vertex: int) -> Dyadic:
        """Sum of stored y over ``vertex`` and its enclosing blossoms, excluding the outer one."""
        total = Dyadic(0)
        node = vertex
        while node in self.parent:
            try:
                total += self.y[node]
            except KeyError:
                raise StateError(f"hidden node {self.label(node)} has no stored y") from None
            node = self.parent[node]
        return total

    def check_invariants(self) -> None:
        live = self.live_blossoms()
        sets = {b: frozenset(self.members(b)) for b in live}
        for b in live:
            rec = self.blossoms[b]
            if len(rec.cycle) < 3 or len(rec.cycle) % 2 == 0:
                raise StateError(f"blossom {self.label(b)} has cycle length {len(rec.cycle)}")
            if len(sets[b]) % 2 == 0:
                raise StateError(f"blossom {self.label(b)} has an even vertex set")
            for c in rec.cycle:
                if self.parent.get(c) != b:
                    raise StateError(f"child {self.label(c)} not linked to {self.label(b)}")
        for i, s in enumerate(live):
            for t in live[i + 1:]:
                a, b = sets[s], sets[t]
                if a & b and not (a <= b or b <= a):
                    raise StateError(f"blossoms {self.label(s)} and {self.label(t)} cross")
        hidden = set(self.parent)
        if set(self.y) != hidden:
            raise StateError("stored y must cover exactly the hidden nodes")


def build_contracted(state: SolverState) -> ContractedGraph:
    """Collapse every outer blossom; ``w'_e = W_e`` minus the y of hidden nodes ``e`` leaves."""
    g = state.graph
    nodes = state.outer_nodes()
    edges = []
    for e in g.base.edges:
        pu, pv = state.outer(e.u), state.outer(e.v)
        if pu == pv:
            continue
        w = Dyadic(g.weights[e.id]) - state.hidden_sum(e.u) - state.hidden_sum(e.v)
        edges.append(ContractedEdge(len(edges), pu, pv, e.id, w))
    blossoms = frozenset(v for v in nodes if v >= state.n)
    return ContractedGraph(tuple(nodes), tuple(edges), blossoms, g.scale)


def cycle_duals(weights: Sequence[Dyadic]) -> list[Dyadic]:
    """Solve ``y[i] + y[i+1] = weights[i]`` around an odd cycle.

    ``y[i]`` is half the alternating sum of the cycle weights, signed by the
    distance of each edge from node ``i`` (both incident edges positive).
    """
    L = len(weights)
    if L < 3 or L % 2 == 0:
        raise ValueError(f"need an odd cycle of length >= 3, got {L}")
    out = []
    for j in range(L):
        total = Dyadic(0)
        for t in range(L):
            w = weights[(j + t) % L]
            total = total + w if min(t, L - 1 - t) % 2 == 0 else total - w
        out.append(total.halve())
    return out


def contract_cycle(state: SolverState, cycle_nodes: Sequence[int], cycle_edges: Sequence[ContractedEdge]) -> int:
    """Add the odd cycle as a new blossom and store its members' duals; return its id."""
    L = len(cycle_nodes)
    if L < 3:
        raise ValueError("cycle shorter than 3")
    if L % 2 == 0:
        raise ValueError("cannot contract an even cycle")
    if len(cycle_edges) != L:
        raise ValueError("need one edge per cycle hop")
    if len(set(cycle_nodes)) != L:
        raise ValueError("cycle repeats a node")
    for i, (node, edge) in enumerate(zip(cycle_nodes, cycle_edges)):
        if node in state.parent or not (node < state.n or state.blossoms[node].alive):
            raise ValueError(f"node {state.label(node)} is not outer")
        nxt = cycle_nodes[(i + 1) % L]
        if {edge.u, edge.v} != {node, nxt}:
            raise ValueError(f"edge {edge.id} does not join cycle positions {i} and {(i + 1) % L}")
    y = cycle_duals([e.weight for e in cycle_edges])
    b = state._next
    state._next += 1
    state.blossoms[b] = BlossomRecord(b, list(cycle_nodes), [e.original for e in cycle_edges])
    for node, val in zip(cycle_nodes, y):
        state.parent[node] = b
        state.y[node] = val
    state.log.append({
        "op": "contract",
        "blossom": state.label(b),
        "cycle": [state.label(v) for v in cycle_nodes],
        "y": [to_decimal(v) for v in y],
    })
    return b


def expand_blossom(state: SolverState, blossom: int) -> None:
    """Remove an outer blossom; its cycle nodes become outer and lose their stored y."""
    rec = state.blossoms.get(blossom)
    if rec is None or not rec.alive:
        raise ValueError(f"{blossom} is not a live blossom")
    if blossom in state.parent:
        raise ValueError(f"blossom {state.label(blossom)} is not outer")
    rec.alive = False
    for child in rec.cycle:
        del state.parent[child]
        del state.y[child]
    state.log.append({"op": "expand", "blossom": state.label(blossom), "cycle": [state.label(v) for v in rec.cycle]})


def recover_matching(state: SolverState, cg: ContractedGraph, x: Sequence[int]) -> set[int]:
    """Lift an integral solution on ``cg`` (half-units) to a perfect matching of the original graph."""
    base = state.graph.base
    matching = {e.original for e, xe in zip(cg.edges, x) if xe == 2}
    covered = {}
    for eid in matching:
        e = base.edges[eid]
        for v in (e.u, e.v):
            if v in covered:
                raise StateError(f"vertex {v + 1} matched twice before blossom expansion")
            covered[v] = eid
    pending = sorted(v for v in cg.nodes if v >= state.n)
    while pending:
        b = pending.pop(0)
        rec = state.blossoms[b]
        L = len(rec.cycle)
        hits = [i for i, c in enumerate(rec.cycle) if any(v in covered for v in state.members(c))]
        if len(hits) != 1:
            raise StateError(f"blossom {state.label(b)} has {len(hits)} covered children, expected 1")
        start = hits[0]
        for k in range(1, L, 2):
            eid = rec.cycle_edges[(start + k) % L]
            e = base.edges[eid]
            for v in (e.u, e.v):
                if v in covered:
                    raise StateError(f"vertex {v + 1} covered twice while expanding {state.label(b)}")
                covered[v] = eid
            matching.add(eid)
        pending.extend(c for c in rec.cycle if c >= state.n)
        pending.sort()
    if len(covered) != state.n:
        missing = sorted(set(range(state.n)) - set(covered))
        raise StateError(f"vertices {[v + 1 for v in missing]} left uncovered")
    return matching
