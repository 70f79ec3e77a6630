"""Exception hierarchy shared by every module."""


class ConicBoundsError(Exception):
    """Base class for all package errors."""


class DomainError(ConicBoundsError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(DomainError):
    """A bound's hypothesis (e.g. a minimum dimension) does not hold."""


class MeasureZeroError(DomainError):
    """The input hit a probability-zero set (e.g. x orthogonal to the center)."""


class NumericalError(ConicBoundsError, ArithmeticError):
    """A numerical procedure failed to reach its stated accuracy."""


class QuadratureError(NumericalError):
    """A quadrature result failed its consistency check."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(ConicBoundsError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
