"""Exception hierarchy shared across the package."""


class KMRError(Exception):
    """Base class for all package errors."""


class DataError(KMRError, ValueError):
    """Malformed or degenerate input data."""


class DomainError(KMRError, ValueError):
    """Evaluation point outside a warp's domain, or mismatched domains."""


class ZeroDenominatorError(KMRError, ArithmeticError):
    """Kernel weights summed to zero."""


class ConvergenceError(KMRError):
    """Raised when every bootstrap replicate or simulation run failed."""
