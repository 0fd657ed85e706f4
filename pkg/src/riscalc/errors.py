"""Exception hierarchy shared by the library and the command line front-end."""


class RisCalcError(Exception):
    """Base class for every error raised by riscalc."""

    exit_code = 1


class DomainError(RisCalcError, ValueError):
    """An argument lies outside the mathematical domain of a function."""

    exit_code = 3


class ValidationError(RisCalcError, ValueError):
    """A configuration value violates one of its invariants."""

    exit_code = 3


class NumericalError(RisCalcError, ArithmeticError):
    """An iterative or series evaluation failed to reach its tolerance."""

    exit_code = 5


class SeriesConvergenceError(NumericalError):
    """The truncated series is outside its admissible regime."""


class InfeasibleError(NumericalError):
    """A linearized subproblem has no point inside the box."""
