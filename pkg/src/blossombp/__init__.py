"""Minimum-weight perfect matching by Blossom-LP with a min-sum BP relaxation solver."""

from .bp import BPConfig
from .driver import MatchingResult, SolveConfig, solve_mwpm, verify_result
from .errors import (Infeasible, IterationBudgetExceeded, NonConvergence, NonUnique, ParseError,
                     SolverError, StateError)
from .graph import WeightedGraph, parse_instance, perturb, read_instance
from .numeric import Dyadic, TieBreakCost
from .oracle import exact_mwpm_dp

__all__ = [
    "BPConfig", "Dyadic", "Infeasible", "IterationBudgetExceeded", "MatchingResult", "NonConvergence",
    "NonUnique", "ParseError", "SolveConfig", "SolverError", "StateError", "TieBreakCost", "WeightedGraph",
    "exact_mwpm_dp", "parse_instance", "perturb", "read_instance", "solve_mwpm", "verify_result",
]
