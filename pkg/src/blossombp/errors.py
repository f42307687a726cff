"""Exception hierarchy shared by the solver modules."""


class SolverError(Exception):
    """Base class for every error raised by the solver."""


class ParseError(SolverError, ValueError):
    """Malformed instance text. ``line`` is 1-based, or None for whole-file errors."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Infeasible(SolverError):
    """The instance (or a relaxation of it) admits no feasible point."""


class NonUnique(SolverError):
    """The relaxation optimum is not unique (tie between distinct optima)."""


class NonConvergence(SolverError):
    """Belief propagation hit its round cap without a certified decision."""


class IterationBudgetExceeded(SolverError):
    """The outer loop ran past its O(|V|^2) iteration budget."""


class StateError(SolverError):
    """Internal solver state is inconsistent; indicates a bug."""
