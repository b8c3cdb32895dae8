"""Exception hierarchy shared by the numerical modules and the CLI."""


class PspinError(Exception):
    """Base class for all package errors."""


class PreconditionError(PspinError, ValueError):
    """An argument violates a documented precondition (CLI exit code 2)."""


class BracketError(PreconditionError):
    """A supplied bracket does not enclose the transition being searched for."""


class NumericError(PspinError, ArithmeticError):
    """A numerical procedure failed (CLI exit code 3)."""


class SolverError(NumericError):
    """Iterative solver hit its iteration cap.

    Attributes:
        bracket: last ``(lo, hi)`` interval known to contain the solution.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class QuadratureError(NumericError):
    """An integrand returned a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NumericRangeError(NumericError):
    """Overflow or loss of range inside a nested expectation."""
