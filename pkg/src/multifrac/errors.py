"""Exception hierarchy shared by all modules."""


class MultifracError(Exception):
    """Base class."""


class ArgumentError(MultifracError, ValueError):
    """Malformed or inconsistent arguments (grid mismatch, too few points)."""


class DomainError(MultifracError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PreconditionError(MultifracError, ValueError):
    """Input violates a structural precondition such as g(0) = 0."""


class ConfigError(MultifracError, ValueError):
    """Invalid configuration; message lists every violated condition."""


class ConvergenceError(MultifracError, RuntimeError):
    """Iteration did not converge; carries the diagnostics gathered so far."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NumericError(MultifracError, ArithmeticError):
    """Non-finite values or failed numerical validation."""
