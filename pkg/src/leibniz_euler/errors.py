"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class NonArchError(ArithmeticError):
    """Base class for failures of the non-Archimedean number engine."""


class DivisionByZero(NonArchError, ZeroDivisionError):
    pass


class TruncationUnderflow(NonArchError):
    """The leading order of a result left the representable order range."""


class UnlimitedInput(NonArchError):
    """An operation defined only on limited numbers received an infinite one."""


class ZeroInput(NonArchError):
    pass


class GeometricZeroDenominator(NonArchError, ZeroDivisionError):
    pass


class NonpositiveInput(NonArchError, ValueError):
    pass


class DomainError(NonArchError, ValueError):
    pass


class NonFiniteCoefficient(NonArchError, ValueError):
    pass


# sequence model


class EvaluationError(ValueError):
    """A term rule could not be evaluated at some (k, n)."""


class DivergenceDetected(ArithmeticError):
    def __init__(self, message: str, growth: float | None = None):
        super().__init__(message)
        self.growth = growth


class PrerequisiteFailed(ValueError):
    pass


# derivation audits


class FactorizationMismatch(ArithmeticError):
    pass


class NormalizationFailure(ArithmeticError):
    pass


class FitFailure(ArithmeticError):
    pass
