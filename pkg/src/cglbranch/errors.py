"""Exception types shared across the package."""


class CGLBranchError(Exception):
    """Base class for all package errors."""


class DomainError(CGLBranchError, ValueError):
    """Invalid geometry, mode, or evaluation point."""


class ConfigError(CGLBranchError, ValueError):
    """Malformed run configuration."""


class QuadratureGuardError(CGLBranchError, ArithmeticError):
    """Two quadrature levels disagree beyond the convergence tolerance."""


class ConvergenceError(CGLBranchError, ArithmeticError):
    """An iterative solver failed to converge."""


class ResolventError(ConvergenceError):
    """lambda is too close to an eigenvalue of the complement space."""


class ContinuationError(ConvergenceError):
    """Branch continuation stopped early.

    The samples computed before the failure are kept in ``samples``.
    """

    def __init__(self, message, samples=()):
        super().__init__(message)
        self.samples = list(samples)


class HypothesisError(CGLBranchError):
    """A closed form was requested outside the hypotheses that justify it."""
