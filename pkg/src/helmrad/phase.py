"""Nonoscillatory phase functions for y'' + Q y = 0 where Q > 0.

A phase function alpha (alpha' > 0) yields the solution basis
``sin(alpha)/sqrt(alpha')``, ``cos(alpha)/sqrt(alpha')``.  alpha' satisfies
Kummer's equation, which has a nonoscillatory solution whenever Q is smooth
and positive; it is located with the windowing procedure: replace Q by a
constant near the left end, integrate forward from the trivially known
phase there, and use the values reached at the right end as terminal data
for the true equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .cheb import PiecewiseCheb, cheb_integrate
from .collocation import KUMMER, solve_nonlinear_ode
from .errors import DomainError, PreconditionError

#: steepness of the erf blend; erfc(BLEND_STEEPNESS / 2) / 2 ~ 1e-17, so the
#: blend meets both constant regions to double precision
BLEND_STEEPNESS = 12.0


@dataclass(frozen=True)
class PhaseFn:
    alpha: PiecewiseCheb
    dalpha: PiecewiseCheb
    ddalpha: PiecewiseCheb
    a: float
    b: float

    @property
    def npieces(self):
        return self.dalpha.npieces


def window_blend(s):
    """Smooth step: 0 for s <= 0, 1 for s >= 1, erf-shaped in between."""
    s = np.asarray(s, dtype=float)
    w = 0.5 * (1.0 + erf(BLEND_STEEPNESS * (np.clip(s, 0.0, 1.0) - 0.5)))
    return np.where(s <= 0.0, 0.0, np.where(s >= 1.0, 1.0, w))


def windowed_coefficient(Q, a, b, lam):
    """Q~ = lam**2 on [a, (3a+b)/4], Q on [(a+3b)/4, b], blended between."""
    left = 0.25 * (3 * a + b)
    right = 0.25 * (a + 3 * b)
    lam2 = lam * lam

    def qtilde(r):
        r = np.asarray(r, dtype=float)
        w = window_blend((r - left) / (right - left))
        out = np.full(r.shape, lam2)
        mask = w > 0.0
        if np.any(mask):
            out[mask] = lam2 + w[mask] * (np.asarray(Q(r[mask]), dtype=float) - lam2)
        return out

    return qtilde


def _check_positive(Q, a, b):
    s = 0.5 - 0.49 * np.cos(np.linspace(0.0, np.pi, 65))
    vals = np.asarray(Q(a + (b - a) * s), dtype=float)
    if np.any(vals <= 0.0):
        raise PreconditionError(f"Q is not positive inside ({a}, {b})")


def build_phase(Q, a, b, tol=1e-12, origin_singular=False) -> PhaseFn:
    """Nonoscillatory phase function on [a, b], normalized so alpha(a) = 0.

    ``origin_singular`` is forwarded to the collocation solver for the
    terminal value problem; set it when Q grows like 1/r**2 near ``a`` ~ 0.
    """
    if not b > a:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    _check_positive(Q, a, b)
    lam = float(np.sqrt(Q(np.array([0.25 * (a + 3 * b)]))[0]))
    qtilde = windowed_coefficient(Q, a, b, lam)
    ivp = solve_nonlinear_ode(KUMMER, qtilde, a, b, (lam, 0.0), "forward", tol)
    end = np.array([b])
    terminal = (float(ivp.y(end)[0]), float(ivp.dy(end)[0]))
    tvp = solve_nonlinear_ode(
        KUMMER, Q, a, b, terminal, "backward", tol, origin_singular=origin_singular
    )
    alpha = cheb_integrate(tvp.y, a, 0.0)
    return PhaseFn(alpha, tvp.y, tvp.dy, float(a), float(b))


def phase_basis(phi: PhaseFn, r):
    """(u, u', v, v') with u = sin(alpha)/sqrt(alpha'), v = cos(alpha)/sqrt(alpha').

    The pair has Wronskian u v' - u' v = -1.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < phi.a) or np.any(r > phi.b):
        raise DomainError(f"r outside [{phi.a}, {phi.b}]")
    al = phi.alpha(r)
    d1 = phi.dalpha(r)
    d2 = phi.ddalpha(r)
    sq = np.sqrt(d1)
    s, c = np.sin(al), np.cos(al)
    corr = d2 / (2.0 * d1 * sq)
    u = s / sq
    v = c / sq
    du = sq * c - corr * s
    dv = -sq * s - corr * c
    return u, du, v, dv
