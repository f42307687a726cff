import random
from itertools import permutations

import pytest

from blossombp.contraction import SolverState, build_contracted, contract_cycle
from blossombp.graph import WeightedGraph, parse_instance, perturb
from blossombp.oracle import (Decomposition, exact_mwpm_dp, half_solution_to_decomposition,
                              validate_decomposition)
from helpers import k4, random_instance, t6


def brute_force_matchings(g):
    """All perfect matchings as frozensets of edge ids, via vertex permutations."""
    lookup = {frozenset((e.u, e.v)): e.id for e in g.edges}
    found = set()
    for perm in permutations(range(g.vertex_count)):
        pairs = [frozenset(perm[i:i + 2]) for i in range(0, len(perm), 2)]
        if all(p in lookup for p in pairs):
            found.add(frozenset(lookup[p] for p in pairs))
    return found


def pairs(g, matching):
    return sorted((g.edges[e].u + 1, g.edges[e].v + 1) for e in matching)


def test_dp_examples():
    assert exact_mwpm_dp(parse_instance("p edge 2 1\ne 1 2 5")).weight == 5
    res = exact_mwpm_dp(k4())
    assert res.weight == 2 and pairs(k4(), res.matching) == [(1, 2), (3, 4)] and res.unique
    res = exact_mwpm_dp(t6())
    assert res.weight == 12 and pairs(t6(), res.matching) == [(1, 2), (3, 4), (5, 6)]
    # each triangle is odd, so (3,4) is forced and the matching is unique
    assert len(brute_force_matchings(t6())) == 1


def test_dp_infeasible_and_limits():
    assert exact_mwpm_dp(parse_instance("p edge 4 2\ne 1 2 1\ne 2 3 1")) is None
    assert exact_mwpm_dp(parse_instance("p edge 3 3\ne 1 2 1\ne 2 3 1\ne 1 3 1")) is None
    with pytest.raises(ValueError):
        exact_mwpm_dp(WeightedGraph.from_edges(24, [(0, 1, 1)]))


def test_dp_reports_ties():
    square = WeightedGraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    assert not exact_mwpm_dp(square).unique
    assert exact_mwpm_dp(square, weights=[1, 1, 1, 2]).unique


def test_dp_agrees_with_permutation_enumeration():
    rng = random.Random(6)
    for _ in range(60):
        g = random_instance(rng, sizes=(2, 4, 6, 8), wmin=-5, wmax=9)
        matchings = brute_force_matchings(g)
        res = exact_mwpm_dp(g)
        cost = {m: sum(g.edges[e].w for e in m) for m in matchings}
        best = min(cost.values())
        assert res.weight == best
        assert cost[res.matching] == best
        assert res.unique == (sum(c == best for c in cost.values()) == 1)


def t6_first():
    st = SolverState(perturb(t6(), 0, 1))
    return build_contracted(st), (1, 1, 1, 1, 1, 1, 0)


def test_decomposition_of_t6_first_solution():
    cg, x = t6_first()
    d = half_solution_to_decomposition(cg, x)
    assert d == Decomposition(((0, 1, 2), (3, 4, 5)), (), ())
    assert validate_decomposition(cg, d).ok
    assert validate_decomposition(t6(), d).ok


def test_decomposition_of_integral_matching():
    cg, _ = t6_first()
    d = half_solution_to_decomposition(cg, (2, 0, 0, 0, 2, 0, 2))
    assert d == Decomposition((), (), (0, 4, 6))
    assert validate_decomposition(cg, d).ok


def test_claw_at_heavy_blossom():
    g = WeightedGraph.from_edges(6, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (0, 3, 1), (1, 4, 1), (2, 5, 1)])
    st = SolverState(perturb(g, 0, 1))
    cg = build_contracted(st)
    contract_cycle(st, [0, 1, 2], list(cg.edges[:2]) + [cg.edges[2]])
    cg = build_contracted(st)
    d = half_solution_to_decomposition(cg, (2, 2, 2))
    assert d.claws == ((0, 1, 2),) and d.matching == () and d.cycles == ()
    rep = validate_decomposition(cg, d)
    assert rep.ok and rep.claw_sizes == [3]


def test_validate_decomposition_violations():
    g = t6()
    overlap = Decomposition(((0, 1, 2),), (), (6,))
    rep = validate_decomposition(g, overlap)
    assert not rep.ok and any("shared" in v for v in rep.violations)
    square = WeightedGraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    rep = validate_decomposition(square, Decomposition(((0, 1, 2, 3),), (), ()))
    assert not rep.ok and any("not an odd cycle" in v for v in rep.violations)
    rep = validate_decomposition(g, Decomposition((), (), (0,)))
    assert not rep.ok and any("not covered" in v for v in rep.violations)
    rep = validate_decomposition(g, Decomposition((), ((0, 4),), ()))
    assert not rep.ok and any("center" in v for v in rep.violations)
    rep = validate_decomposition(g, Decomposition(((0, 1, 5),), (), ()))
    assert not rep.ok and any("simple cycle" in v for v in rep.violations)
