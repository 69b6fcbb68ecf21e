"""Exception types raised by the library."""


class QBAError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(QBAError, ValueError):
    pass


class NotPSD(QBAError, ValueError):
    pass


class DimensionError(QBAError, ValueError):
    pass


class OverflowRisk(QBAError, ArithmeticError):
    pass


class InvalidParameter(QBAError, ValueError):
    pass


class Unsupported(QBAError, ValueError):
    pass


class RankDeficientIterate(QBAError, ArithmeticError):
    pass


class NonMonotone(QBAError, RuntimeError):
    """Capacity estimate decreased in a mode where monotonicity is guaranteed."""


class ValidationError(QBAError, ValueError):
    """Input data violates a channel/state invariant.

    ``invariant`` names the violated property and ``residual`` its size.
    """

    def __init__(self, message, invariant=None, residual=None):
        super().__init__(message)
        self.invariant = invariant
        self.residual = residual
