"""Exception hierarchy shared by all modules."""


class RDKernelError(Exception):
    """Base class for library errors."""


class DomainError(RDKernelError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(RDKernelError, OverflowError):
    """Result would overflow double precision."""


class InputError(RDKernelError, ValueError):
    """Malformed or non-finite input data."""


class ConfigError(RDKernelError, ValueError):
    """Invalid solver / discretisation configuration."""


class QuadratureError(RDKernelError, ArithmeticError):
    """Requested accuracy not reached; carries the best value and its estimate."""

    def __init__(self, message, value, error_estimate, evaluations=0):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations


class ConvergenceError(RDKernelError, ArithmeticError):
    """Fixed-point iteration failed; carries the residual history."""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = list(residuals)
