"""Exception hierarchy for qkpc."""


class QkpcError(Exception):
    """Base class for all qkpc errors."""


class DomainError(QkpcError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConsistencyError(QkpcError, ArithmeticError):
    """A computed probability left [0, 1] by more than the allowed tolerance."""


class UsageError(QkpcError, ValueError):
    """Incompatible arguments, e.g. parameters that do not match the scheme."""


class InfeasibleError(QkpcError):
    """The constraint set leaves no admissible parameter point."""
