"""Exception types raised by helmrad."""


class HelmradError(Exception):
    """Base class for all helmrad errors."""


class DomainError(HelmradError, ValueError):
    """An argument lies outside the domain on which an object is defined."""


class ConvergenceError(HelmradError):
    """An adaptive procedure could not meet its tolerance.

    ``interval`` is the subinterval on which the failure occurred and
    ``residual`` the last residual norm seen there (``nan`` if not applicable).
    """

    def __init__(self, message, interval=None, residual=float("nan")):
        super().__init__(message)
        self.interval = interval
        self.residual = residual


class PreconditionError(HelmradError, ValueError):
    """Input data violates a documented precondition (e.g. sign of Q)."""


class ScaledOverflowError(HelmradError, OverflowError):
    """A Bessel function value overflows double precision.

    ``log10_magnitude`` is an estimate of log10 of the value's magnitude.
    """

    def __init__(self, message, log10_magnitude):
        super().__init__(message)
        self.log10_magnitude = log10_magnitude


class UnsupportedPotentialError(HelmradError, ValueError):
    """The potential does not satisfy 1 + q(0) > 0."""


class StitchingError(HelmradError):
    """A 2x2 continuity system is numerically singular at ``point``."""

    def __init__(self, message, point, condition):
        super().__init__(message)
        self.point = point
        self.condition = condition


class IllConditionedModeError(HelmradError):
    """The mode-matching determinant for mode ``n`` vanishes numerically."""

    def __init__(self, message, n):
        super().__init__(message)
        self.n = n
