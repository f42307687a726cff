"""Shared fixtures: random instances with a planted perfect matching and small hand-built graphs."""

import random
from pathlib import Path

from blossombp.graph import WeightedGraph, read_instance

DATA = Path(__file__).parent / "data"

T6_EDGES = [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1), (2, 3, 10)]
K4_EDGES = [(0, 1, 1), (2, 3, 1), (0, 2, 2), (1, 3, 2), (0, 3, 3), (1, 2, 3)]


def t6() -> WeightedGraph:
    return WeightedGraph.from_edges(6, T6_EDGES)


def k4() -> WeightedGraph:
    return WeightedGraph.from_edges(4, K4_EDGES)


def single_edge() -> WeightedGraph:
    return read_instance(DATA / "single_edge.dimacs")


def random_instance(rng: random.Random, sizes=(4, 6, 8, 10, 12, 14), wmin=1, wmax=100) -> WeightedGraph:
    """Random graph with density in [0.3, 1] that contains a planted perfect matching."""
    n = rng.choice(sizes)
    density = rng.uniform(0.3, 1.0)
    perm = list(range(n))
    rng.shuffle(perm)
    weights = {}
    for i in range(0, n, 2):
        a, b = sorted((perm[i], perm[i + 1]))
        weights[a, b] = rng.randint(wmin, wmax)
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in weights and rng.random() < density:
                weights[a, b] = rng.randint(wmin, wmax)
    return WeightedGraph.from_edges(n, [(a, b, w) for (a, b), w in sorted(weights.items())])


def instances(count: int, seed: int = 2024):
    rng = random.Random(seed)
    return [random_instance(rng) for _ in range(count)]


def random_odd_cycle(cg, rng: random.Random, max_len: int = 5, pool: int = 200):
    """A random simple odd cycle of the contracted multigraph as (nodes, edges), or None."""
    import networkx as nx

    simple = nx.Graph()
    for e in cg.edges:
        if not simple.has_edge(e.u, e.v):
            simple.add_edge(e.u, e.v, edges=[])
        simple[e.u][e.v]["edges"].append(e)
    cycles = []
    for c in nx.simple_cycles(simple, length_bound=max_len):
        if len(c) % 2 == 1:
            cycles.append(c)
            if len(cycles) == pool:
                break
    if not cycles:
        return None
    nodes = cycles[rng.randrange(len(cycles))]
    edges = [rng.choice(simple[a][b]["edges"]) for a, b in zip(nodes, nodes[1:] + nodes[:1])]
    return list(nodes), edges


def brute_force_points(cg):
    """Every feasible half-unit vector with its primary objective (as a Fraction)."""
    from fractions import Fraction
    from itertools import product

    out = []
    for x in product((0, 1, 2), repeat=len(cg.edges)):
        deg = dict.fromkeys(cg.nodes, 0)
        for e, xe in zip(cg.edges, x):
            deg[e.u] += xe
            deg[e.v] += xe
        if all(d >= 2 if cg.is_blossom(v) else d == 2 for v, d in deg.items()):
            out.append((sum(Fraction(xe, 2) * e.weight.to_fraction() for e, xe in zip(cg.edges, x)), x))
    return out


def random_contracted(rng: random.Random, max_edges: int = 9):
    """A contracted graph with a few random blossoms and at most ``max_edges`` edges."""
    from blossombp.contraction import SolverState, build_contracted, contract_cycle
    from blossombp.graph import perturb

    while True:
        g = random_instance(rng, sizes=(4, 6, 8))
        st = SolverState(perturb(g, rng.randrange(1 << 30), rng.choice((1, 1 << 20))))
        for _ in range(rng.randint(0, 2)):
            found = random_odd_cycle(build_contracted(st), rng)
            if found:
                contract_cycle(st, *found)
        cg = build_contracted(st)
        if 0 < len(cg.edges) <= max_edges:
            return st, cg
