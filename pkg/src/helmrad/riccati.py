"""Exponential-type solution pairs of y'' + Q y = 0 where Q < 0.

Solutions grow or decay exponentially there, so they are stored through
their logarithms: ``y = exp(sigma)`` with sigma' solving the Riccati
equation ``sigma'' + sigma'**2 + Q = 0``.  Each sigma is normalized to peak
at 0, so evaluation never overflows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cheb import PiecewiseCheb, cheb_integrate
from .collocation import RICCATI, solve_nonlinear_ode
from .errors import DomainError, PreconditionError


class Kind(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


@dataclass(frozen=True)
class LogSlope:
    sigma: PiecewiseCheb
    dsigma: PiecewiseCheb
    a: float
    b: float
    kind: Kind

    @property
    def npieces(self):
        return self.dsigma.npieces


def _check_negative(Q, a, b):
    s = 0.5 - 0.49 * np.cos(np.linspace(0.0, np.pi, 65))
    vals = np.asarray(Q(a + (b - a) * s), dtype=float)
    if np.any(vals >= 0.0):
        raise PreconditionError(f"Q is not negative inside ({a}, {b})")


def build_log_pair(Q, a, b, tol=1e-12, origin_singular=False):
    """Return (increasing, decreasing) log-represented solutions on [a, b].

    The increasing one starts from sigma'(a) = 0 and is normalized by
    sigma(b) = 0; the decreasing one from sigma'(b) = 0 with sigma(a) = 0.
    """
    if not b > a:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    _check_negative(Q, a, b)
    fwd = solve_nonlinear_ode(
        RICCATI, Q, a, b, (0.0,), "forward", tol, origin_singular=origin_singular
    )
    bwd = solve_nonlinear_ode(
        RICCATI, Q, a, b, (0.0,), "backward", tol, origin_singular=origin_singular
    )
    inc = LogSlope(cheb_integrate(fwd.y, b, 0.0), fwd.y, float(a), float(b), Kind.INCREASING)
    dec = LogSlope(cheb_integrate(bwd.y, a, 0.0), bwd.y, float(a), float(b), Kind.DECREASING)
    return inc, dec


def log_basis(ls: LogSlope, r):
    """(y, y') with y = exp(sigma(r))."""
    r = np.asarray(r, dtype=float)
    if np.any(r < ls.a) or np.any(r > ls.b):
        raise DomainError(f"r outside [{ls.a}, {ls.b}]")
    y = np.exp(ls.sigma(r))
    return y, ls.dsigma(r) * y
