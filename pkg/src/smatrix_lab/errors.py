"""Exception hierarchy.

Input problems derive from :class:`ValueError`; numerical breakdowns derive
from :class:`NumericalError` (an :class:`ArithmeticError`).  The CLI maps the
first family to exit code 2 and the second to exit code 3.
"""


class SmatrixError(Exception):
    """Base class for every error raised by the library."""


class InvalidInput(SmatrixError, ValueError):
    pass


class ConfigError(InvalidInput):
    pass


class NotLowerHalfPlane(InvalidInput):
    pass


class WrongHalfPlane(InvalidInput):
    pass


class ZeroSpectralParameter(InvalidInput):
    pass


class UnsupportedVariant(InvalidInput):
    pass


class UnsupportedFamily(InvalidInput):
    pass


class AxisPoint(InvalidInput):
    pass


class NonDecaying(InvalidInput):
    pass


class NotAPole(InvalidInput):
    pass


class NumericalError(SmatrixError, ArithmeticError):
    pass


class NonConvergent(NumericalError):
    pass


class ToleranceNotMet(NumericalError):
    pass


class AtPole(NumericalError):
    """The denominator ``a - W(z^2)`` vanished within the pole guard."""


class ExtractionUnstable(NumericalError):
    pass


class BoundaryZero(NumericalError):
    pass


class NonIntegerWinding(NumericalError):
    pass


class BudgetExceeded(NumericalError):
    pass


class PoleOnContour(NumericalError):
    pass
