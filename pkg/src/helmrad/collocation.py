"""Adaptive spectral collocation for the two nonlinear ODEs the solver needs.

Both equations are written as ``y^(order) = F(Q(t), y, y')`` for a known
coefficient Q:

* Riccati (order 1): ``y' = -y**2 - Q`` where ``y`` is a logarithmic
  derivative ``sigma'``.
* Kummer (order 2): written for ``beta = log(alpha')`` so that ``alpha' > 0``
  holds by construction, ``beta'' = 2Q - 2 exp(2 beta) + beta'**2 / 2``.

The highest derivative ``z`` is the collocation unknown on each piece; lower
derivatives are recovered by spectral integration from the boundary data,
and Newton's method is applied to ``z - F(Q, y(z), y'(z)) = 0``.  Pieces are
marched away from the side carrying the boundary data, halving the step when
Newton fails or the Chebyshev tail is too large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cheb import INT_LEFT, INT_RIGHT, NODES, VALS_TO_COEFFS, XNODES, PiecewiseCheb
from .errors import ConvergenceError, DomainError

MAX_HALVINGS = 60
NEWTON_MAXIT = 12


@dataclass(frozen=True)
class NonlinearODE:
    """Identifies one of the supported nonlinear equations."""

    name: str
    order: int
    kind: int

    def residual(self, q, y, dy, ddy=None):
        """Relative residual of the equation in its original variables.

        Riccati: ``(dy + y**2 + q) / max(y**2, |q|)`` with ``y = sigma'``.
        Kummer: ``(y**2 - q + ddy/(2y) - 3/4 (dy/y)**2) / max(y**2, |q|)``
        with ``y = alpha'``, ``dy = alpha''``, ``ddy = alpha'''``.
        """
        q = np.asarray(q)
        y = np.asarray(y)
        dy = np.asarray(dy)
        scale = np.maximum(y**2, np.abs(q))
        if self.kind == 0:
            return (dy + y**2 + q) / scale
        ratio = dy / y
        return (y**2 - q + 0.5 * ddy / y - 0.75 * ratio**2) / scale

    def node_residual(self, coef, y: PiecewiseCheb, dy: PiecewiseCheb):
        """Residual at every collocation node, scaled per piece.

        Each node's absolute residual is divided by the largest
        ``max(y**2, |q|)`` on its piece, which stays meaningful at turning
        points where both terms vanish together.
        """
        x = y.nodes()
        q = np.asarray(coef(x), dtype=float)
        yv, dyv = y(x), dy(x)
        scale = np.max(np.maximum(yv**2, np.abs(q)), axis=1, keepdims=True)
        if self.kind == 0:
            raw = dyv + yv**2 + q
        else:
            ddy = dy.diff()(x)
            raw = yv**2 - q + 0.5 * ddy / yv - 0.75 * (dyv / yv) ** 2
        return np.abs(raw) / scale


RICCATI = NonlinearODE("riccati", 1, 0)
KUMMER = NonlinearODE("kummer", 2, 1)


@dataclass(frozen=True)
class ODESolution:
    """Output of :func:`solve_nonlinear_ode` in the equation's own variables.

    For Riccati ``y`` is sigma' and ``dy`` is sigma''; for Kummer ``y`` is
    alpha' and ``dy`` is alpha''.
    """

    y: PiecewiseCheb
    dy: PiecewiseCheb
    max_residual: float

    @property
    def npieces(self):
        return self.y.npieces


@njit(cache=True)
def _rhs_scalar(kind, q, y, p):
    if kind == 0:
        return -y * y - q, -2.0 * y, 0.0
    e = math.exp(2.0 * y)
    return 2.0 * q - 2.0 * e + 0.5 * p * p, -4.0 * e, p


@njit(cache=True)
def _rhs(kind, q, y, p, f, fy, fp):
    scale = 0.0
    for i in range(y.shape[0]):
        if kind == 0:
            f[i] = -y[i] * y[i] - q[i]
            fy[i] = -2.0 * y[i]
            fp[i] = 0.0
            s = max(y[i] * y[i], abs(q[i]))
        else:
            e = math.exp(2.0 * y[i])
            f[i] = 2.0 * q[i] - 2.0 * e + 0.5 * p[i] * p[i]
            fy[i] = -4.0 * e
            fp[i] = p[i]
            s = max(2.0 * abs(q[i]), max(2.0 * e, 0.5 * p[i] * p[i]))
        if s > scale:
            scale = s
    return scale


@njit(cache=True)
def _trapezoid_guess(kind, order, q, t, forward, y0, p0, ys, ps):
    n = t.shape[0]
    start = 0 if forward else n - 1
    ys[start] = y0
    ps[start] = p0
    for step in range(n - 1):
        i = step if forward else n - 1 - step
        j = i + 1 if forward else i - 1
        h = t[j] - t[i]
        f0, _, _ = _rhs_scalar(kind, q[i], ys[i], ps[i])
        y1 = ys[i]
        p1 = ps[i]
        if order == 2:
            y1 = ys[i] + h * ps[i]
        for _ in range(40):
            f1, fy1, fp1 = _rhs_scalar(kind, q[j], y1, p1)
            if order == 1:
                r = y1 - ys[i] - 0.5 * h * (f0 + f1)
                d = 1.0 - 0.5 * h * fy1
                dy = -r / d
                y1 += dy
                if abs(dy) <= 1e-14 * abs(y1) + 1e-300:
                    break
            else:
                r1 = y1 - ys[i] - 0.5 * h * (ps[i] + p1)
                r2 = p1 - ps[i] - 0.5 * h * (f0 + f1)
                a12 = -0.5 * h
                a21 = -0.5 * h * fy1
                a22 = 1.0 - 0.5 * h * fp1
                det = a22 - a12 * a21
                dy = (-r1 * a22 + r2 * a12) / det
                dp = (-r2 + r1 * a21) / det
                y1 += dy
                p1 += dp
                if abs(dy) <= 1e-14 * abs(y1) + 1e-300 and abs(dp) <= 1e-14 * abs(p1) + 1e-300:
                    break
        if not (math.isfinite(y1) and math.isfinite(p1)):
            return False
        ys[j] = y1
        ps[j] = p1
    return True


@njit(cache=True)
def _state(order, z, S, S2, shift, y0, p0, y, p):
    if order == 1:
        y[:] = y0 + S @ z
        p[:] = 0.0
    else:
        p[:] = p0 + S @ z
        y[:] = y0 + shift * p0 + S2 @ z


@njit(cache=True)
def _newton_piece(kind, order, q, t, S, S2, forward, y0, p0, ntol, tail_tol, C):
    """Solve on one piece.  Returns (status, y, p, residual, tail).

    status: 0 accepted, 1 Newton failure, 2 tail too large.
    """
    n = t.shape[0]
    y = np.empty(n)
    p = np.empty(n)
    f = np.empty(n)
    fy = np.empty(n)
    fp = np.empty(n)
    if not _trapezoid_guess(kind, order, q, t, forward, y0, p0, y, p):
        return 1, y, p, np.inf, np.inf
    _rhs(kind, q, y, p, f, fy, fp)
    z = f.copy()
    shift = t - (t[0] if forward else t[n - 1])
    _state(order, z, S, S2, shift, y0, p0, y, p)
    scale = _rhs(kind, q, y, p, f, fy, fp)
    F = z - f
    res = np.max(np.abs(F)) / scale
    if not math.isfinite(res):
        return 1, y, p, np.inf, np.inf
    eye = np.eye(n)
    for _ in range(NEWTON_MAXIT):
        if res <= ntol:
            break
        J = eye.copy()
        for i in range(n):
            for j in range(n):
                J[i, j] -= fp[i] * S[i, j]
                if order == 2:
                    J[i, j] -= fy[i] * S2[i, j]
                else:
                    J[i, j] -= fy[i] * S[i, j]
        dz = np.linalg.solve(J, -F)
        lam = 1.0
        improved = False
        for _ in range(9):
            znew = z + lam * dz
            _state(order, znew, S, S2, shift, y0, p0, y, p)
            scale_new = _rhs(kind, q, y, p, f, fy, fp)
            Fnew = znew - f
            resnew = np.max(np.abs(Fnew)) / scale_new
            if math.isfinite(resnew) and resnew < res:
                z = znew
                F = Fnew
                res = resnew
                improved = True
                break
            lam *= 0.5
        if not improved:
            # restore the state belonging to z
            _state(order, z, S, S2, shift, y0, p0, y, p)
            _rhs(kind, q, y, p, f, fy, fp)
            break
    if not res <= 100.0 * ntol:
        return 1, y, p, res, np.inf
    if kind == 1:
        vals = np.exp(y)
    else:
        vals = y.copy()
    c = C @ vals
    big = np.max(np.abs(c))
    tail = 0.0
    if big > 0.0:
        tail = max(abs(c[n - 1]), max(abs(c[n - 2]), abs(c[n - 3]))) / big
    if not tail <= tail_tol:
        return 2, y, p, res, tail
    return 0, y, p, res, tail


_S2_LEFT = INT_LEFT @ INT_LEFT
_S2_RIGHT = INT_RIGHT @ INT_RIGHT


def _solve_piece(ode, q, lo, hi, forward, y0, p0, ntol, tol):
    t = 0.5 * (hi - lo) * (XNODES + 1.0) + lo
    half = 0.5 * (hi - lo)
    if forward:
        S = INT_LEFT * half
        S2 = _S2_LEFT * (half * half)
    else:
        S = INT_RIGHT * half
        S2 = _S2_RIGHT * (half * half)
    qv = np.ascontiguousarray(np.broadcast_to(np.asarray(q(t), dtype=float), t.shape))
    return _newton_piece(
        ode.kind, ode.order, qv, t, S, S2, forward, float(y0), float(p0), ntol, tol, VALS_TO_COEFFS
    )


def _step_factor(tail, tol, lo, hi):
    # trailing coefficients shrink roughly like h**(NODES - 2)
    if tail <= 0.0:
        return hi
    f = 0.8 * (tol / tail) ** (1.0 / (NODES - 2))
    return min(hi, max(lo, f))


def solve_nonlinear_ode(
    ode: NonlinearODE,
    coef,
    a,
    b,
    start,
    direction="forward",
    tol=1e-12,
    origin_singular=False,
    max_halvings=MAX_HALVINGS,
) -> ODESolution:
    """Solve an initial (``direction="forward"``) or terminal value problem.

    ``coef`` evaluates Q on arrays.  ``start`` holds the boundary data in the
    equation's own variables: ``(sigma',)`` for Riccati, ``(alpha', alpha'')``
    for Kummer, given at ``a`` (forward) or ``b`` (backward).

    With ``origin_singular`` the pieces are additionally kept within a factor
    of two of their distance to the origin, which suits coefficients that
    blow up like 1/r**2 there.
    """
    if not b > a:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    forward = direction == "forward"
    if ode.kind == 1:
        dalpha, ddalpha = start
        if not dalpha > 0:
            raise DomainError("Kummer boundary data needs alpha' > 0")
        y0, p0 = math.log(dalpha), ddalpha / dalpha
    else:
        (y0,) = start
        p0 = 0.0
    ntol = min(0.1 * tol, 1e-13)
    t = a if forward else b
    h = b - a
    halvings = 0
    pieces = []
    while True:
        remaining = (b - t) if forward else (t - a)
        if remaining <= 0.0:
            break
        h = min(h, remaining)
        if origin_singular:
            h = min(h, t if forward else 0.5 * t)
        if remaining - h < 1e-3 * h:
            h = remaining
        lo, hi = (t, t + h) if forward else (t - h, t)
        if forward and remaining == h:
            hi = b
        if not forward and remaining == h:
            lo = a
        status, y, p, res, tail = _solve_piece(ode, coef, lo, hi, forward, y0, p0, ntol, tol)
        if status == 0:
            pieces.append((lo, hi, y, p, res))
            if forward:
                t, y0, p0 = hi, y[-1], p[-1]
            else:
                t, y0, p0 = lo, y[0], p[0]
            h = (hi - lo) * _step_factor(tail, tol, 1.0, 2.0)
            halvings = 0
            continue
        halvings += 1
        h = (hi - lo) * (_step_factor(tail, tol, 0.25, 0.5) if status == 2 else 0.5)
        if halvings > max_halvings or h <= 8 * np.finfo(float).eps * max(abs(t), 1e-300):
            raise ConvergenceError(
                f"{ode.name} solve failed near [{lo}, {hi}] "
                f"(residual {res:.3g}, tail {tail:.3g})",
                interval=(lo, hi),
                residual=res,
            )
    if not forward:
        pieces.reverse()
    breaks = np.array([pc[0] for pc in pieces] + [pieces[-1][1]])
    ys = np.array([pc[2] for pc in pieces])
    ps = np.array([pc[3] for pc in pieces])
    max_res = max(pc[4] for pc in pieces)
    if ode.kind == 1:
        d1 = np.exp(ys)
        d2 = d1 * ps
    else:
        d1 = ys
        t_nodes = 0.5 * np.diff(breaks)[:, None] * (XNODES[None, :] + 1.0) + breaks[:-1, None]
        q_nodes = np.asarray(coef(t_nodes.ravel()), dtype=float).reshape(t_nodes.shape)
        d2 = -ys * ys - q_nodes
    return ODESolution(
        PiecewiseCheb.from_node_values(breaks, d1),
        PiecewiseCheb.from_node_values(breaks, d2),
        max_res,
    )
