"""The Blossom-LP outer loop: relax, then terminate, expand or contract, with re-perturbation on failure."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

from .bp import BPConfig
from .contraction import (ContractedGraph, SolverState, build_contracted, contract_cycle,
                          expand_blossom, recover_matching)
from .errors import Infeasible, IterationBudgetExceeded, NonConvergence, NonUnique
from .graph import DEFAULT_NOISE_RANGE, WeightedGraph, perturb, positive_shift, shifted
from .numeric import to_decimal
from .oracle import DP_VERTEX_LIMIT, exact_mwpm_dp, half_solution_to_decomposition
from .relax import (DEFAULT_ENUMERATE_LIMIT, Contract, Expand, HalfIntegralSolution, StepDecision,
                    Terminate, classify, solve_relaxation, validate_half_integral)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveConfig:
    backend: str = "bp"
    seed: int = 0
    noise_range: int = DEFAULT_NOISE_RANGE
    max_outer_iterations: int | None = None  # default 10 * |V|^2
    bp: BPConfig = field(default_factory=BPConfig)
    retry_limit: int = 8
    enumerate_limit: int = DEFAULT_ENUMERATE_LIMIT
    trace: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.backend not in ("bp", "enumerate"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.max_outer_iterations is not None and self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be at least 1")
        if self.noise_range < 1:
            raise ValueError("noise_range must be at least 1")
        if self.retry_limit < 0 or self.threads < 1:
            raise ValueError("retry_limit must be >= 0 and threads >= 1")


@dataclass(frozen=True)
class MatchingResult:
    matching: frozenset[int]
    weight: int
    outer_iterations: int
    contractions: int
    expansions: int
    bp_rounds_total: int
    seed_used: int
    attempts: int
    trace: tuple[dict, ...] = ()


@dataclass(frozen=True)
class IterationEvent:
    """Passed to the ``on_iteration`` hook after the decision has been applied."""

    iteration: int
    state: SolverState
    graph: ContractedGraph
    solution: HalfIntegralSolution
    decision: StepDecision
    blossom: int | None  # new blossom id for Contract, expanded one for Expand


def iteration_budget(g: WeightedGraph, cfg: SolveConfig) -> int:
    if cfg.max_outer_iterations is not None:
        return cfg.max_outer_iterations
    return 10 * g.vertex_count ** 2


def _record(state: SolverState, it: int, cg: ContractedGraph, sol: HalfIntegralSolution,
            decision: StepDecision, blossom: int | None) -> dict:
    rec = {
        "iteration": it,
        "nodes": len(cg.nodes),
        "edges": len(cg.edges),
        "x": list(sol.x),
        "objective": to_decimal(sol.objective.primary),
        "bp_rounds": sol.rounds,
    }
    if isinstance(decision, Terminate):
        rec["decision"] = "terminate"
        return rec
    rec["decision"] = "expand" if isinstance(decision, Expand) else "contract"
    rec["blossom"] = state.label(blossom)
    rec["cycle"] = [state.label(v) for v in state.blossoms[blossom].cycle]
    if isinstance(decision, Contract):
        rec["y"] = [to_decimal(state.y[v]) for v in decision.nodes]
    else:
        rec["claws"] = [len(c) for c in half_solution_to_decomposition(cg, sol.x).claws]
    return rec


def _solve_once(g: WeightedGraph, cfg: SolveConfig, seed: int, on_iteration) -> MatchingResult:
    pg = perturb(g, seed, cfg.noise_range)
    state = SolverState(pg)
    budget = iteration_budget(g, cfg)
    trace = []
    contractions = expansions = rounds = 0
    for it in range(1, budget + 1):
        cg = build_contracted(state)
        sol = solve_relaxation(cg, cfg.backend, bp_config=cfg.bp,
                               enumerate_limit=cfg.enumerate_limit, threads=cfg.threads)
        rounds += sol.rounds
        report = validate_half_integral(cg, sol.x)
        if not report.ok:
            raise NonConvergence(f"relaxation output is not half-integral: {report.violations[0]}")
        decision = classify(cg, sol.x)
        blossom = None
        if isinstance(decision, Terminate):
            matching = recover_matching(state, cg, sol.x)
        elif isinstance(decision, Expand):
            blossom = decision.blossom
            expand_blossom(state, blossom)
            expansions += 1
        else:
            blossom = contract_cycle(state, decision.nodes, [cg.edges[i] for i in decision.edges])
            contractions += 1
        if cfg.trace:
            trace.append(_record(state, it, cg, sol, decision, blossom))
        if on_iteration is not None:
            on_iteration(IterationEvent(it, state, cg, sol, decision, blossom))
        if isinstance(decision, Terminate):
            weight = sum(g.edges[e].w for e in matching)
            return MatchingResult(frozenset(matching), weight, it, contractions, expansions,
                                  rounds, seed, 1, tuple(trace))
    raise IterationBudgetExceeded(f"no termination within {budget} outer iterations")


def solve_mwpm(g: WeightedGraph, cfg: SolveConfig | None = None,
               on_iteration: Callable[[IterationEvent], None] | None = None) -> MatchingResult:
    """Minimum-weight perfect matching of ``g``.

    On NonUnique/NonConvergence the instance is re-perturbed with the next
    seed and solved from scratch, up to ``retry_limit`` times; a blown
    iteration budget gets one such retry.
    """
    cfg = cfg or SolveConfig()
    if g.vertex_count % 2:
        raise Infeasible("no perfect matching: odd vertex count")
    if not g.edges:
        raise Infeasible("no perfect matching: graph has no edges")
    shift = positive_shift(g)
    work = shifted(g, shift) if shift else g
    seed = cfg.seed
    budget_retried = False
    last: Exception | None = None
    for attempt in range(1, cfg.retry_limit + 2):
        try:
            res = _solve_once(work, cfg, seed, on_iteration)
        except (NonUnique, NonConvergence) as exc:
            log.info("seed %d failed: %s", seed, exc)
            last = exc
        except IterationBudgetExceeded as exc:
            if budget_retried:
                raise
            budget_retried = True
            last = exc
        else:
            weight = sum(g.edges[e].w for e in res.matching)
            return MatchingResult(res.matching, weight, res.outer_iterations, res.contractions,
                                  res.expansions, res.bp_rounds_total, seed, attempt, res.trace)
        seed += 1
    raise type(last)(f"{last}; gave up after {cfg.retry_limit} retries")


@dataclass
class VerificationReport:
    ok: bool
    violations: list[str]
    oracle_weight: int | None = None


def verify_result(g: WeightedGraph, r: MatchingResult | frozenset[int] | set[int], weight: int | None = None,
                  oracle_limit: int = DP_VERTEX_LIMIT) -> VerificationReport:
    """Check coverage, membership, weight arithmetic and (for small graphs) optimality."""
    if isinstance(r, MatchingResult):
        matching, weight = r.matching, r.weight
    else:
        matching = r
    violations = []
    ids = sorted(matching)
    bad = [e for e in ids if not 0 <= e < len(g.edges)]
    if bad:
        violations.append(f"edge ids {bad} not in graph")
    ids = [e for e in ids if 0 <= e < len(g.edges)]
    count = [0] * g.vertex_count
    for e in ids:
        count[g.edges[e].u] += 1
        count[g.edges[e].v] += 1
    for v, c in enumerate(count):
        if c == 0:
            violations.append(f"vertex {v + 1} uncovered")
        elif c > 1:
            violations.append(f"vertex {v + 1} covered {'twice' if c == 2 else f'{c} times'}")
    total = sum(g.edges[e].w for e in ids)
    if weight is not None and weight != total:
        violations.append(f"reported weight {weight} != edge sum {total}")
    oracle = None
    if g.vertex_count <= oracle_limit:
        best = exact_mwpm_dp(g)
        if best is None:
            violations.append("graph has no perfect matching")
        else:
            oracle = best.weight
            if total != oracle:
                violations.append(f"weight {total} is not optimal; optimum is {oracle}")
    return VerificationReport(not violations, violations, oracle)
