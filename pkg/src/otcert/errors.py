"""Semantic exception hierarchy for the toolkit."""


class OtcertError(Exception):
    """Base error for this package."""


class InputError(OtcertError, ValueError):
    """Inputs violate a contract: domain, type, shape, or unknown parameter."""


class ModeError(InputError):
    """Objects with different number modes were mixed in one operation."""


class ShapeError(InputError):
    """Dimension or size mismatch between spaces, tensors, measures or plans."""


class InfiniteCostError(InputError):
    """A finite cost was required (for example on the support diagonal) but +inf was found."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class UndefinedArithmetic(OtcertError, ArithmeticError):
    """An extended-real operation with no defined value, such as (+inf) - (+inf).

    This is always a hard error; the toolkit never silently produces NaN.
    """


class BudgetExceeded(OtcertError):
    """An enumeration-based checker refused to run because the work estimate is too large."""

    def __init__(self, message, estimate=None, budget=None):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class PreconditionFailed(OtcertError):
    """A certified precondition of an operation does not hold.

    Carries the verdict whose witness explains the failure, so callers can
    surface a machine-checkable reason instead of a bare message.
    """

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict
