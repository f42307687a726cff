import random
from fractions import Fraction

import pytest

from blossombp.contraction import (SolverState, build_contracted, contract_cycle, cycle_duals,
                                   expand_blossom, recover_matching)
from blossombp.errors import StateError
from blossombp.graph import WeightedGraph, perturb
from blossombp.numeric import Dyadic
from helpers import random_instance, random_odd_cycle, t6


def state_for(g, seed=0, noise_range=1):
    return SolverState(perturb(g, seed, noise_range))


def cycle_edges(cg, nodes):
    """Contracted edges joining consecutive nodes (first match for each hop)."""
    out = []
    for a, b in zip(nodes, nodes[1:] + nodes[:1]):
        out.append(next(e for e in cg.edges if {e.u, e.v} == {a, b}))
    return out


def test_empty_family_is_identity():
    st = state_for(t6(), seed=3, noise_range=1 << 20)
    cg = build_contracted(st)
    assert cg.nodes == tuple(range(6))
    assert [e.original for e in cg.edges] == list(range(7))
    assert [e.weight for e in cg.edges] == list(st.graph.weights)
    assert not cg.blossoms


def test_t6_contractions_adjust_weights():
    st = state_for(t6())
    B = st.graph.scale
    cg = build_contracted(st)
    b0 = contract_cycle(st, [0, 1, 2], cycle_edges(cg, [0, 1, 2]))
    assert [st.y[v] for v in (0, 1, 2)] == [Dyadic(B).halve()] * 3
    cg = build_contracted(st)
    assert cg.nodes == (3, 4, 5, b0)
    heavy = next(e for e in cg.edges if e.original == 6)
    assert heavy.weight.to_fraction() == Fraction(19 * B, 2)
    assert all(e.original not in (0, 1, 2) for e in cg.edges)

    b1 = contract_cycle(st, [3, 4, 5], cycle_edges(cg, [3, 4, 5]))
    cg = build_contracted(st)
    assert cg.nodes == (b0, b1)
    assert [(e.original, e.weight) for e in cg.edges] == [(6, Dyadic(9 * B))]
    assert cg.blossoms == {b0, b1}


@pytest.mark.parametrize("weights, expected", [
    ((1, 1, 1), ("1/2", "1/2", "1/2")),
    ((1, 2, 3), ("1", "0", "2")),
    ((2, 2, 2, 2, 2), ("1",) * 5),
])
def test_cycle_dual_examples(weights, expected):
    y = cycle_duals([Dyadic(w) for w in weights])
    assert [v.to_fraction() for v in y] == [Fraction(s) for s in expected]


def test_cycle_duals_solve_the_tight_system():
    rng = random.Random(5)
    for L in (3, 5, 7, 9):
        w = [Dyadic(rng.randint(-1000, 1000), rng.randint(0, 3)) for _ in range(L)]
        y = cycle_duals(w)
        for i in range(L):
            assert y[i] + y[(i + 1) % L] == w[i]


def test_cycle_duals_reject_even():
    with pytest.raises(ValueError):
        cycle_duals([Dyadic(1)] * 4)


def test_contract_rejects_bad_cycles():
    g = WeightedGraph.from_edges(6, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (0, 2, 1), (4, 5, 1), (3, 4, 1)])
    st = state_for(g)
    cg = build_contracted(st)
    with pytest.raises(ValueError, match="even"):
        contract_cycle(st, [0, 1, 2, 3], cycle_edges(cg, [0, 1, 2, 3]))
    with pytest.raises(ValueError, match="shorter"):
        contract_cycle(st, [0, 1], cycle_edges(cg, [0, 1])[:1] * 2)
    contract_cycle(st, [0, 1, 2], cycle_edges(cg, [0, 1, 2]))
    with pytest.raises(ValueError, match="not outer"):
        contract_cycle(st, [0, 2, 3], cycle_edges(cg, [0, 2, 3]))


def nested_state():
    # triangle {0,1,2}; then a 3-cycle through v(T1), 3 and 4; vertex 5 hangs off 4
    g = WeightedGraph.from_edges(6, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1), (3, 4, 1), (0, 4, 1), (4, 5, 1)])
    st = state_for(g)
    t1 = contract_cycle(st, [0, 1, 2], cycle_edges(build_contracted(st), [0, 1, 2]))
    outer = contract_cycle(st, [t1, 3, 4], cycle_edges(build_contracted(st), [t1, 3, 4]))
    return st, t1, outer


def test_nested_contraction_values():
    st, t1, outer = nested_state()
    half = Dyadic(st.graph.scale).halve()
    # the new cycle's weights are (B/2, B, B/2), giving y = (0, B/2, B/2)
    assert [st.y[v] for v in (t1, 3, 4)] == [Dyadic(0), half, half]
    assert [st.y[v] for v in (0, 1, 2)] == [half] * 3
    st.check_invariants()
    assert sorted(st.members(outer)) == [0, 1, 2, 3, 4]


def test_expand_nested_keeps_inner_duals():
    st, t1, outer = nested_state()
    half = Dyadic(st.graph.scale).halve()
    expand_blossom(st, outer)
    assert t1 not in st.y and 3 not in st.y and 4 not in st.y
    assert [st.y[v] for v in (0, 1, 2)] == [half] * 3
    st.check_invariants()
    assert build_contracted(st).nodes == (3, 4, 5, t1)


def test_expand_errors():
    st, t1, outer = nested_state()
    with pytest.raises(ValueError, match="not outer"):
        expand_blossom(st, t1)
    with pytest.raises(ValueError):
        expand_blossom(st, 0)
    expand_blossom(st, outer)
    with pytest.raises(ValueError, match="not a live"):
        expand_blossom(st, outer)


def test_contract_then_expand_is_identity():
    st = state_for(t6())
    before = build_contracted(st)
    b = contract_cycle(st, [0, 1, 2], cycle_edges(before, [0, 1, 2]))
    expand_blossom(st, b)
    assert not st.y and not st.parent and not st.live_blossoms()
    assert build_contracted(st) == before


def test_blossom_ids_never_reused():
    st = state_for(t6())
    cg = build_contracted(st)
    b0 = contract_cycle(st, [0, 1, 2], cycle_edges(cg, [0, 1, 2]))
    expand_blossom(st, b0)
    b1 = contract_cycle(st, [0, 1, 2], cycle_edges(cg, [0, 1, 2]))
    assert b1 == b0 + 1
    assert st.label(b0) == "b0" and st.label(b1) == "b1" and st.label(0) == 1


def test_random_sequences_keep_invariants_and_tightness():
    rng = random.Random(11)
    for _ in range(40):
        g = random_instance(rng, sizes=(8, 10, 12, 14))
        st = state_for(g, seed=rng.randrange(1 << 30), noise_range=1 << 20)
        for _ in range(rng.randint(1, 5)):
            cg = build_contracted(st)
            found = random_odd_cycle(cg, rng)
            if found is None:
                break
            nodes, edges = found
            b = contract_cycle(st, nodes, edges)
            st.check_invariants()
            for i, e in enumerate(edges):
                assert e.weight - st.y[nodes[i]] - st.y[nodes[(i + 1) % len(nodes)]] == 0
            if rng.random() < 0.3:
                expand_blossom(st, b)
                st.check_invariants()
                assert build_contracted(st) == cg


def test_recover_without_blossoms():
    st = state_for(t6())
    cg = build_contracted(st)
    x = [2 if e.original in (0, 3) else 0 for e in cg.edges]
    x[[e.original for e in cg.edges].index(2)] = 0
    # (1,2) and (4,5) leave 3 and 6 uncovered, which recovery must reject
    with pytest.raises(StateError, match="uncovered"):
        recover_matching(st, cg, x)
    x = [2 if e.original in (0, 4, 6) else 0 for e in cg.edges]
    assert recover_matching(st, cg, x) == {0, 4, 6}


def test_recover_t6_terminal_state():
    st = state_for(t6())
    contract_cycle(st, [0, 1, 2], cycle_edges(build_contracted(st), [0, 1, 2]))
    contract_cycle(st, [3, 4, 5], cycle_edges(build_contracted(st), [3, 4, 5]))
    cg = build_contracted(st)
    matching = recover_matching(st, cg, [2])
    g = st.graph.base
    assert sorted((g.edges[e].u + 1, g.edges[e].v + 1) for e in matching) == [(1, 2), (3, 4), (5, 6)]
    assert sum(g.edges[e].w for e in matching) == 12


def test_recover_five_cycle_matches_even_path():
    # 5-cycle 0..4 (edge ids 0..4 in cycle order) plus pendant edge (5,0)
    g = WeightedGraph.from_edges(6, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 0, 1), (5, 0, 1)])
    st = state_for(g)
    contract_cycle(st, [0, 1, 2, 3, 4], cycle_edges(build_contracted(st), [0, 1, 2, 3, 4]))
    cg = build_contracted(st)
    assert recover_matching(st, cg, [2]) == {5, 1, 3}


def test_recover_rejects_uncovered_blossom():
    st = state_for(t6())
    contract_cycle(st, [0, 1, 2], cycle_edges(build_contracted(st), [0, 1, 2]))
    cg = build_contracted(st)
    x = [2 if e.original == 4 else 0 for e in cg.edges]
    with pytest.raises(StateError, match="0 covered children"):
        recover_matching(st, cg, x)
