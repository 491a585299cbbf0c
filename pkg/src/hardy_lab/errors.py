"""Exception hierarchy shared by every hardy_lab module."""


class HardyLabError(Exception):
    """Base class for all library errors."""


class QuadratureError(HardyLabError):
    """An integral could not be evaluated to the requested accuracy."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DivergentIntegral(QuadratureError):
    """The integral is (numerically) infinite."""


class NonConvergent(QuadratureError):
    """The subdivision budget was exhausted before the tolerance was met."""


class EvaluationFailure(HardyLabError):
    """A scanned function raised or returned garbage at a specific point."""

    def __init__(self, message, c=None):
        super().__init__(message)
        self.c = c


class HypothesisError(HardyLabError, ValueError):
    """Input parameters violate the hypotheses of an inequality or operation."""


class DegenerateExponent(HypothesisError):
    """alpha == p - 1, where the power-weight constant degenerates to zero."""


class BranchViolation(HypothesisError):
    """alpha lies on the wrong side of p - 1 for the requested branch."""


class HypothesisGap(HypothesisError):
    """alpha lies in the excluded gap (p - 1, l*p - 1] of the iterated inequality."""


class IntervalMismatch(HypothesisError):
    """Two weights or paths that must share an interval do not."""


class NotPSD(HypothesisError):
    """A matrix that must be positive semidefinite has a negative eigenvalue."""


class NotHermitian(HypothesisError):
    """A matrix that must be Hermitian is not (beyond tolerance)."""


class MissingOracle(HypothesisError):
    """A path lacks a derivative/antiderivative that the operation requires."""


class DomainError(HardyLabError, ValueError):
    """A point or range lies outside the interval an object is defined on."""
