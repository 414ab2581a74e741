"""Exception types shared across modules."""


class UsageError(ValueError):
    """Invalid input or configuration (CLI exit code 2)."""


class DomainError(UsageError):
    """Argument outside the domain of a closed-form expression."""


class UnsupportedError(UsageError):
    """Requested combination is outside the implemented scope."""


class ConsistencyError(RuntimeError):
    """An internal identity failed: signals an implementation bug."""


class EstimationError(RuntimeError):
    """An iterative estimate did not converge."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class DivergenceError(ArithmeticError):
    """A weighted norm is not finite for the given input."""
