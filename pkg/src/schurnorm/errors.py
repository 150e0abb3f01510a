"""Exception types raised by the package."""


class SchurNormError(Exception):
    """Base class for all package errors."""


class DegenerateDenominator(SchurNormError):
    """The resolvent denominator ``1 - e^{p tau} g21(tau)`` is (numerically) zero.

    This happens when the line ``-nu0 + i R`` meets the spectrum; such
    parameters must be rejected by the caller.
    """


class DomainError(SchurNormError, ValueError):
    """A point lies outside the square ``[-tau, 0]^2``."""


class BadGridSize(SchurNormError, ValueError):
    pass


class LengthMismatch(SchurNormError, ValueError):
    pass


class DimensionMismatch(SchurNormError, ValueError):
    pass


class NoConvergence(SchurNormError, RuntimeError):
    pass


class SolverFailure(SchurNormError, RuntimeError):
    """The inner NLP solve did not produce a usable iterate.

    The optimization state at the moment of failure is attached as ``state``.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ConfigError(SchurNormError, ValueError):
    pass


class MissingColumn(SchurNormError, KeyError):
    pass
