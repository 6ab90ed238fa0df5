"""Reference solutions used to check the fast solver.

``oracle_mode`` integrates the radial equation directly with an adaptive
eighth-order Runge-Kutta method.  Its cost grows linearly with
k R, so it is meant for desk-scale problems only.  The closed forms cover
q = r^2 - 1 and the square shell q = 3 on [1, 2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import ode
from scipy.special import jv, jvp, yv, yvp

from .errors import ConvergenceError, DomainError, UnsupportedPotentialError
from .pbessel import UNDERFLOW_LOG, XI_LEFT, NormalFormQ

ORACLE_RTOL = 1e-13
MAX_KR = 1e4


@dataclass(frozen=True)
class OracleMode:
    """psi_n at ``points`` and at R, normalized like :class:`ModeSolution`."""

    points: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    psi_R: float
    dpsi_R: float


def _segments(lo, hi, R):
    pts = [lo]
    # geometric near the origin, where Q ~ 1/r^2
    x = 10.0 ** math.ceil(math.log10(lo) + 1e-9)
    near = min(hi, 1e-2 * R)
    while x < near:
        if x > pts[-1]:
            pts.append(x)
        x *= 10.0
    if near > pts[-1]:
        pts.append(near)
    step = R / 32.0
    while hi - pts[-1] > step:
        pts.append(pts[-1] + step)
    if hi > pts[-1]:
        pts.append(hi)
    else:
        pts[-1] = hi
    return pts


def oracle_mode(nf: NormalFormQ, points=None, rtol=ORACLE_RTOL) -> OracleMode:
    """Dense integration of the mode equation from the small-r asymptotics.

    Near the origin it integrates chi = r**-(n + 1/2) phi, which obeys
    ``chi'' + (2n + 1) chi' / r + k**2 (1 + q) chi = 0`` and is smooth there,
    so the r**(n + 1/2) growth of the regular solution costs nothing.  Past
    ``switch`` (half way to the first turning point) chi would decay like
    r**-n, so the normal form ``phi'' + Q phi = 0`` takes over.  Start data
    come from phi ~ sqrt(r) J_n(c r) with c = k sqrt(1 + q(0)).
    """
    R = float(nf.pot.R)
    if nf.k * R > MAX_KR:
        raise DomainError(f"k R = {nf.k * R:g} is too large for the dense oracle")
    n = int(nf.n)
    nu = n + 0.5
    k = float(nf.k)
    pts = np.array([] if points is None else points, dtype=float).ravel()
    if np.any(pts < XI_LEFT) or np.any(pts > R):
        raise DomainError("oracle points must lie in [1e-15, R]")
    order = np.argsort(pts, kind="stable")
    psi_at = np.zeros(pts.shape)
    dpsi_at = np.zeros(pts.shape)
    log_at = np.full(pts.shape, -np.inf)

    one_q = 1.0 + nf.pot.q0
    if one_q < 0.0:
        raise UnsupportedPotentialError(f"1 + q(0) = {one_q} < 0")
    c = k * math.sqrt(one_q)
    # chi is flat to double precision near the origin; step over it with the
    # leading terms chi = 1 - c^2 r^2 / (4 (n + 1)) of the same small-r
    # expansion that seeds the fast solver (neglected terms < 1e-15)
    r0 = min(1e-6 / k, 1e-3 * R)
    a2 = -c * c / (4.0 * (n + 1))
    y = np.array([1.0 + a2 * r0 * r0, 2.0 * a2 * r0])
    grid = np.linspace(0.0, R, 2049)[1:]
    peak = max(1.0, float(np.max(1.0 + np.asarray(nf.pot.q(grid), dtype=float))))
    switch = min(R, max(1e-2 * R, 0.5 * n / (k * math.sqrt(peak))))
    chi_form = True
    L = 0.0
    # the state is renormalized to max(|y|, |y'|/k) = 1 per segment
    atol = 1e-3 * rtol * np.array([1.0, k])
    k2 = k * k
    c0 = 0.25 - n * n

    def to_psi(r, y, chi):
        """(psi mantissa, psi' mantissa, extra log) for the current state."""
        if chi:
            return y[0], y[1] + n * y[0] / r, n * math.log(r)
        return y[0], y[1] - 0.5 * y[0] / r, -0.5 * math.log(r)

    done = 0
    for lo, hi in nf.pot.spans():
        if hi <= r0:
            continue
        lo = max(lo, r0)
        qs = nf.pot.q_on_span(lo, hi)

        def rhs_chi(r, s, qs=qs):
            w = k2 * (1.0 + float(qs(np.array([r]))[0]))
            return [s[1], -2.0 * nu / r * s[1] - w * s[0]]

        def rhs_phi(r, s, qs=qs):
            w = k2 * (1.0 + float(qs(np.array([r]))[0])) + c0 / (r * r)
            return [s[1], -w * s[0]]

        cuts = _segments(lo, hi, R)
        if lo < switch < hi:
            cuts = sorted(set(cuts) | {switch})
        for a, b in zip(cuts[:-1], cuts[1:]):
            if chi_form and a >= switch:
                # phi = r**nu chi, phi' = r**nu (chi' + nu chi / r)
                y = np.array([y[0], y[1] + nu * y[0] / a])
                L += nu * math.log(a)
                chi_form = False
            m = max(abs(y[0]), abs(y[1]) / k)
            y = y / m
            L += math.log(m)
            solver = ode(rhs_chi if chi_form else rhs_phi)
            solver.set_integrator("dop853", rtol=[rtol, rtol], atol=atol, nsteps=10**8)
            solver.set_initial_value(y, a)
            while done < len(order) and pts[order[done]] <= b:
                i = order[done]
                target = max(pts[i], a)
                if target > solver.t:
                    solver.integrate(target)
                _check(solver, a, b)
                rr = max(pts[i], XI_LEFT)
                psi_at[i], dpsi_at[i], extra = to_psi(rr, solver.y, chi_form)
                log_at[i] = L + extra
                done += 1
            if b > solver.t:
                solver.integrate(b)
            _check(solver, a, b)
            y = np.array(solver.y)
    psi_R, dpsi_R, extra = to_psi(R, y, chi_form)
    norm = max(abs(psi_R), abs(dpsi_R) / k)
    shift = L + extra + math.log(norm)
    e = log_at - shift
    keep = e >= UNDERFLOW_LOG
    scale = np.where(keep, np.exp(np.where(keep, e, 0.0)), 0.0)
    return OracleMode(pts, psi_at * scale, dpsi_at * scale, psi_R / norm, dpsi_R / norm)


def _check(solver, a, b):
    if not solver.successful():
        raise ConvergenceError(f"oracle integration failed on [{a}, {b}]", (a, b))


def _normalize(psi, dpsi, psi_R, dpsi_R, k):
    s = 1.0 / max(abs(psi_R), abs(dpsi_R) / k)
    return psi * s, dpsi * s, psi_R * s, dpsi_R * s


def rsq_closed_form(k, n, r, R=2.0):
    """psi_n for q = r^2 - 1: J_{n/2}(k r^2 / 2), normalized at R."""
    r = np.asarray(r, dtype=float)
    nu = 0.5 * n
    x = 0.5 * k * r * r
    psi = jv(nu, x)
    dpsi = jvp(nu, x) * k * r
    xR = 0.5 * k * R * R
    return _normalize(psi, dpsi, jv(nu, xR), jvp(nu, xR) * k * R, k)[:2]


def square_shell_closed_form(k, n, r, R=2.0, height=3.0, inner=1.0):
    """psi_n for q = height on [inner, R], 0 inside: J_n(kr) matched to J, Y of k' r."""
    r = np.asarray(r, dtype=float)
    k2 = k * math.sqrt(1.0 + height)
    j1, dj1 = jv(n, k * inner), jvp(n, k * inner) * k
    M = np.array(
        [
            [jv(n, k2 * inner), yv(n, k2 * inner)],
            [jvp(n, k2 * inner) * k2, yvp(n, k2 * inner) * k2],
        ]
    )
    A, B = np.linalg.solve(M, [j1, dj1])
    outer = r >= inner
    psi = np.empty(r.shape)
    dpsi = np.empty(r.shape)
    ro, ri = r[outer], r[~outer]
    psi[outer] = A * jv(n, k2 * ro) + B * yv(n, k2 * ro)
    dpsi[outer] = (A * jvp(n, k2 * ro) + B * yvp(n, k2 * ro)) * k2
    psi[~outer] = jv(n, k * ri)
    dpsi[~outer] = jvp(n, k * ri) * k
    psi_R = A * jv(n, k2 * R) + B * yv(n, k2 * R)
    dpsi_R = (A * jvp(n, k2 * R) + B * yvp(n, k2 * R)) * k2
    return _normalize(psi, dpsi, psi_R, dpsi_R, k)[:2]


def zero_closed_form(k, n, r, R):
    """psi_n for q = 0: J_n(kr), normalized at R."""
    r = np.asarray(r, dtype=float)
    return _normalize(jv(n, k * r), jvp(n, k * r) * k, jv(n, k * R), jvp(n, k * R) * k, k)[:2]
