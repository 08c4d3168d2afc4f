"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """Requested system size exceeds a hard enumeration/memory bound."""


class GenerationBudgetError(RuntimeError):
    """Instance generation exhausted its attempt budget."""


class DimacsFormatError(ValueError):
    """Malformed DIMACS CNF input."""


class OffGridError(ValueError):
    """A coefficient or index does not lie on the configured search grid."""


class NonFiniteLossError(ArithmeticError):
    """Training produced a NaN/inf loss; carries diagnostics in the message."""


class EvaluationError(RuntimeError):
    """A schedule-evaluation callback failed; wraps the original error with context."""
