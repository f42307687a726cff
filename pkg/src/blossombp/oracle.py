"""Ground truth: bitmask DP for exact matchings, and the cycle/claw/matching decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .contraction import ContractedGraph
from .graph import WeightedGraph
from .relax import half_components, node_degrees

DP_VERTEX_LIMIT = 22


@dataclass(frozen=True)
class DPResult:
    matching: frozenset[int]
    weight: int
    unique: bool


def exact_mwpm_dp(g: WeightedGraph, weights: Sequence[int] | None = None,
                  limit: int = DP_VERTEX_LIMIT) -> DPResult | None:
    """Minimum-weight perfect matching by DP over vertex subsets, or None if none exists.

    The lowest vertex of each remaining subset is always paired first, so
    every matching is generated exactly once and optima can be counted.
    ``weights`` overrides the base weights (e.g. perturbed ones).
    """
    n = g.vertex_count
    if n > limit:
        raise ValueError(f"{n} vertices exceed the DP limit {limit}")
    if n % 2:
        return None
    w = [e.w for e in g.edges] if weights is None else list(weights)
    nbrs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e in g.edges:
        nbrs[e.u].append((e.v, e.id))
        nbrs[e.v].append((e.u, e.id))
    full = (1 << n) - 1
    # best[mask] = (weight, count, chosen edge) for matching the vertices in mask
    best: dict[int, tuple[int, int, int] | None] = {0: (0, 1, -1)}

    order = []
    stack = [full]
    seen = {full}
    while stack:
        mask = stack.pop()
        order.append(mask)
        low = (mask & -mask).bit_length() - 1
        for v, _ in nbrs[low]:
            if mask >> v & 1:
                rest = mask & ~(1 << low) & ~(1 << v)
                if rest and rest not in seen:
                    seen.add(rest)
                    stack.append(rest)
    for mask in sorted(order, key=int.bit_count):
        low = (mask & -mask).bit_length() - 1
        cur = None
        for v, eid in nbrs[low]:
            if not mask >> v & 1:
                continue
            sub = best.get(mask & ~(1 << low) & ~(1 << v))
            if sub is None:
                continue
            cand = sub[0] + w[eid]
            if cur is None or cand < cur[0]:
                cur = (cand, sub[1], eid)
            elif cand == cur[0]:
                cur = (cur[0], cur[1] + sub[1], cur[2])
        best[mask] = cur
    top = best.get(full)
    if top is None:
        return None
    matching = set()
    mask = full
    while mask:
        eid = best[mask][2]
        e = g.edges[eid]
        matching.add(eid)
        mask &= ~(1 << e.u) & ~(1 << e.v)
    return DPResult(frozenset(matching), top[0], top[1] == 1)


@dataclass(frozen=True)
class Decomposition:
    cycles: tuple[tuple[int, ...], ...] = ()  # edge ids per odd cycle
    claws: tuple[tuple[int, ...], ...] = ()  # edge ids per star
    matching: tuple[int, ...] = ()


@dataclass
class DecompositionReport:
    ok: bool
    violations: list[str] = field(default_factory=list)
    claw_sizes: list[int] = field(default_factory=list)


def _endpoints(graph: WeightedGraph | ContractedGraph) -> tuple[list[int], dict[int, tuple[int, int]]]:
    if isinstance(graph, WeightedGraph):
        return list(range(graph.vertex_count)), {e.id: (e.u, e.v) for e in graph.edges}
    return list(graph.nodes), {e.id: (e.u, e.v) for e in graph.edges}


def validate_decomposition(graph: WeightedGraph | ContractedGraph, d: Decomposition) -> DecompositionReport:
    nodes, ends = _endpoints(graph)
    violations = []
    owner: dict[int, str] = {}

    def claim(vertices, name):
        for v in sorted(vertices):
            if v in owner:
                violations.append(f"vertex {v} shared by {owner[v]} and {name}")
            else:
                owner[v] = name

    def known(edges, name):
        missing = [e for e in edges if e not in ends]
        if missing:
            violations.append(f"{name} uses unknown edges {missing}")
        return [e for e in edges if e in ends]

    for i, cyc in enumerate(d.cycles):
        name = f"cycle {i}"
        edges = known(cyc, name)
        deg: dict[int, int] = {}
        for e in edges:
            for v in ends[e]:
                deg[v] = deg.get(v, 0) + 1
        if len(edges) < 3 or len(edges) % 2 == 0:
            violations.append(f"{name} has {len(edges)} edges, not an odd cycle")
        elif any(k != 2 for k in deg.values()) or len(deg) != len(edges) or not _connected(edges, ends):
            violations.append(f"{name} is not a simple cycle")
        claim(deg, name)
    sizes = []
    for i, claw in enumerate(d.claws):
        name = f"claw {i}"
        edges = known(claw, name)
        sizes.append(len(edges))
        if not edges:
            violations.append(f"{name} is empty")
            continue
        common = set(ends[edges[0]])
        for e in edges[1:]:
            common &= set(ends[e])
        if not common:
            violations.append(f"{name} has no common center")
            continue
        center = min(common)
        leaves = [ends[e][0] if ends[e][1] == center else ends[e][1] for e in edges]
        if len(set(leaves)) != len(leaves):
            violations.append(f"{name} repeats a leaf")
        claim({center, *leaves}, name)
    for e in known(d.matching, "matching"):
        claim(ends[e], f"matching edge {e}")
    uncovered = [v for v in nodes if v not in owner]
    if uncovered:
        violations.append(f"vertices {uncovered} not covered")
    return DecompositionReport(not violations, violations, sizes)


def _connected(edges, ends) -> bool:
    adj: dict[int, set[int]] = {}
    for e in edges:
        a, b = ends[e]
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def half_solution_to_decomposition(cg: ContractedGraph, x: Sequence[int]) -> Decomposition:
    cycles, bad = half_components(cg, x)
    if bad:
        raise ValueError(f"half edges do not form disjoint cycles at nodes {bad}")
    deg = node_degrees(cg, x)
    centers = {v for v in cg.blossoms if deg[v] > 2}
    claws: dict[int, list[int]] = {}
    matching = []
    for e, xe in zip(cg.edges, x):
        if xe != 2:
            continue
        center = min((v for v in (e.u, e.v) if v in centers), default=None)
        if center is None:
            matching.append(e.id)
        else:
            claws.setdefault(center, []).append(e.id)
    return Decomposition(
        tuple(edges for _, edges in cycles),
        tuple(tuple(claws[c]) for c in sorted(claws)),
        tuple(matching),
    )
