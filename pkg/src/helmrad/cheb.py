"""Adaptive piecewise Chebyshev expansions.

Every function the solver manipulates (phase functions, logarithmic
derivatives, the radial profile of the potential) is stored as a
:class:`PiecewiseCheb`: a tiling of an interval by subintervals, each
carrying a Chebyshev expansion of fixed order.  Nodes are the Chebyshev
extrema ("second kind" points) so that expansions can be evaluated exactly
at subinterval endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import ConvergenceError, DomainError

NODES = 16
MAX_DEPTH = 50


def _reference_angles(n):
    # x_i = cos(theta_i), ascending in x; exact angles avoid arccos roundoff
    return np.pi * (1.0 - np.arange(n) / (n - 1))


def _reference_nodes(n):
    return -np.cos(np.pi * np.arange(n) / (n - 1))


def _values_to_coeffs_matrix(n):
    # discrete cosine transform on the extrema grid
    j = np.arange(n)
    t = np.cos(np.outer(j, _reference_angles(n)))  # t[k, i] = T_k(x_i)
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    m = (2.0 / (n - 1)) * t * w[None, :]
    m[0, :] *= 0.5
    m[-1, :] *= 0.5
    return m


def _integration_matrix(n, vals_to_coeffs):
    x = _reference_nodes(n)
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(npcheb.chebval(x, npcheb.chebint(e, lbnd=-1.0)))
    return np.column_stack(cols) @ vals_to_coeffs


def _differentiation_matrix(n, vals_to_coeffs):
    x = _reference_nodes(n)
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(npcheb.chebval(x, npcheb.chebder(e)))
    return np.column_stack(cols) @ vals_to_coeffs


XNODES = _reference_nodes(NODES)
VALS_TO_COEFFS = _values_to_coeffs_matrix(NODES)
#: spectral integration on [-1, 1] anchored at -1 and at +1 respectively
INT_LEFT = _integration_matrix(NODES, VALS_TO_COEFFS)
INT_RIGHT = INT_LEFT - INT_LEFT[-1, :][None, :]
DIFF = _differentiation_matrix(NODES, VALS_TO_COEFFS)


def chebyshev_nodes(a, b, n=NODES):
    """Chebyshev extrema on [a, b] in ascending order."""
    x = XNODES if n == NODES else _reference_nodes(n)
    return 0.5 * (b - a) * (x + 1.0) + a


def values_to_coeffs(values):
    """Chebyshev coefficients from values at the 16 extrema (last axis)."""
    values = np.asarray(values)
    return values @ VALS_TO_COEFFS.T


def _clenshaw(s, c):
    """Evaluate sum_k c[..., k] T_k(s) with c aligned to s."""
    n = c.shape[-1]
    b1 = np.zeros(np.broadcast(s, c[..., 0]).shape, dtype=np.result_type(s, c))
    b2 = np.zeros_like(b1)
    for k in range(n - 1, 0, -1):
        b1, b2 = c[..., k] + 2.0 * s * b1 - b2, b1
    return c[..., 0] + s * b1 - b2


@dataclass(frozen=True)
class ChebExpansion:
    """Chebyshev expansion of a function on a single interval [a, b]."""

    a: float
    b: float
    coeffs: np.ndarray

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError(f"need b > a, got [{self.a}, {self.b}]")
        c = np.atleast_1d(np.asarray(self.coeffs))
        if c.size == 0:
            raise ValueError("coefficient list is empty")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, a, b, values):
        values = np.asarray(values)
        n = values.shape[-1]
        m = VALS_TO_COEFFS if n == NODES else _values_to_coeffs_matrix(n)
        return cls(a, b, m @ values)

    @classmethod
    def interpolate(cls, f, a, b, n=NODES):
        return cls.from_values(a, b, np.asarray(f(chebyshev_nodes(a, b, n))))

    def nodes(self):
        return chebyshev_nodes(self.a, self.b, len(self.coeffs))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.a) or np.any(x > self.b):
            raise DomainError(f"point outside [{self.a}, {self.b}]")
        s = (2.0 * x - (self.a + self.b)) / (self.b - self.a)
        return _clenshaw(s, self.coeffs)


def cheb_diff(f: ChebExpansion) -> ChebExpansion:
    """Derivative of a single-interval expansion."""
    if len(f.coeffs) == 1:
        return ChebExpansion(f.a, f.b, np.zeros(1, dtype=f.coeffs.dtype))
    d = npcheb.chebder(f.coeffs) * (2.0 / (f.b - f.a))
    return ChebExpansion(f.a, f.b, d)


class PiecewiseCheb:
    """A function on [global_a, global_b] stored piece by piece.

    ``breaks`` holds the piece endpoints (strictly increasing) and
    ``coeffs`` one row of Chebyshev coefficients per piece.  Instances are
    treated as immutable.
    """

    __slots__ = ("breaks", "coeffs")

    def __init__(self, breaks, coeffs):
        breaks = np.asarray(breaks, dtype=float)
        coeffs = np.atleast_2d(np.asarray(coeffs))
        if breaks.ndim != 1 or len(breaks) != coeffs.shape[0] + 1:
            raise ValueError("need one more breakpoint than pieces")
        if not np.all(np.diff(breaks) > 0):
            raise DomainError("breakpoints must be strictly increasing")
        breaks.setflags(write=False)
        coeffs.setflags(write=False)
        self.breaks = breaks
        self.coeffs = coeffs

    @classmethod
    def from_pieces(cls, pieces):
        pieces = list(pieces)
        for left, right in zip(pieces, pieces[1:]):
            if left.b != right.a:
                raise DomainError("pieces must tile the interval without gaps")
        width = max(len(p.coeffs) for p in pieces)
        dtype = np.result_type(*[p.coeffs for p in pieces])
        coeffs = np.zeros((len(pieces), width), dtype=dtype)
        for i, p in enumerate(pieces):
            coeffs[i, : len(p.coeffs)] = p.coeffs
        return cls([p.a for p in pieces] + [pieces[-1].b], coeffs)

    @classmethod
    def from_node_values(cls, breaks, values):
        """Build from values at the 16 extrema of each piece (one row per piece)."""
        return cls(breaks, values_to_coeffs(values))

    @property
    def global_a(self):
        return float(self.breaks[0])

    @property
    def global_b(self):
        return float(self.breaks[-1])

    @property
    def npieces(self):
        return self.coeffs.shape[0]

    @property
    def pieces(self):
        return [
            ChebExpansion(float(self.breaks[i]), float(self.breaks[i + 1]), self.coeffs[i])
            for i in range(self.npieces)
        ]

    def piece_index(self, x):
        """Index of the piece containing each x; shared breakpoints go left."""
        idx = np.searchsorted(self.breaks, x, side="left") - 1
        return np.clip(idx, 0, self.npieces - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.breaks[0]) or np.any(x > self.breaks[-1]):
            raise DomainError(
                f"point outside [{self.breaks[0]}, {self.breaks[-1]}]"
            )
        idx = self.piece_index(x)
        a = self.breaks[idx]
        b = self.breaks[idx + 1]
        s = (2.0 * x - (a + b)) / (b - a)
        return _clenshaw(s, self.coeffs[idx])

    def diff(self):
        """Piecewise derivative."""
        return PiecewiseCheb.from_pieces(cheb_diff(p) for p in self.pieces)

    def node_values(self):
        """Values at the extrema grid of every piece, one row per piece."""
        n = self.coeffs.shape[1]
        t = np.cos(np.outer(_reference_angles(n), np.arange(n)))
        return self.coeffs @ t.T

    def nodes(self):
        n = self.coeffs.shape[1]
        s = XNODES if n == NODES else _reference_nodes(n)
        a = self.breaks[:-1, None]
        b = self.breaks[1:, None]
        return 0.5 * (b - a) * (s[None, :] + 1.0) + a

    def __repr__(self):
        return (
            f"PiecewiseCheb([{self.global_a:.6g}, {self.global_b:.6g}], "
            f"{self.npieces} pieces)"
        )


def cheb_eval(f: PiecewiseCheb, x):
    """Evaluate ``f`` at ``x`` (scalar or array)."""
    return f(x)


_CHEBINT_CACHE = {}


def _chebint_matrix(n):
    """Maps n Chebyshev coefficients to n+1 of the antiderivative vanishing at -1."""
    m = _CHEBINT_CACHE.get(n)
    if m is None:
        m = np.column_stack([npcheb.chebint(e, lbnd=-1.0) for e in np.eye(n)])
        m.setflags(write=False)
        _CHEBINT_CACHE[n] = m
    return m


def cheb_integrate(f: PiecewiseCheb, anchor, anchor_value=0.0) -> PiecewiseCheb:
    """Antiderivative F of f, continuous across pieces, with F(anchor) = anchor_value."""
    if not f.global_a <= anchor <= f.global_b:
        raise DomainError(f"anchor {anchor} outside [{f.global_a}, {f.global_b}]")
    half = 0.5 * np.diff(f.breaks)
    coeffs = (f.coeffs @ _chebint_matrix(f.coeffs.shape[1]).T) * half[:, None]
    # value of each piece's antiderivative at its right end
    totals = coeffs.sum(axis=1)
    offsets = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
    coeffs[:, 0] += offsets
    g = PiecewiseCheb(f.breaks, coeffs)
    shifted = coeffs.copy()
    shifted[:, 0] += anchor_value - g(anchor)
    return PiecewiseCheb(f.breaks, shifted)


def _tail_ratio(c):
    big = np.max(np.abs(c))
    if big == 0.0:
        return 0.0
    return np.max(np.abs(c[-3:])) / big


def adaptive_fit(f: Callable, a, b, tol=1e-12, max_depth=MAX_DEPTH) -> PiecewiseCheb:
    """Fit ``f`` on [a, b] by recursive bisection.

    A piece is accepted once the largest of its last three Chebyshev
    coefficients is at most ``tol`` times its largest coefficient, or at
    most ``tol`` times the largest |f| sampled so far (so kinks and jumps
    terminate once the piece is tiny).
    """
    if not b > a:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    accepted = []
    vscale = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        x = chebyshev_nodes(lo, hi)
        vals = np.broadcast_to(np.asarray(f(x)), x.shape)
        if vals.dtype.kind != "c":
            vals = vals.astype(float)
        c = values_to_coeffs(vals)
        vscale = max(vscale, float(np.max(np.abs(vals))))
        if _tail_ratio(c) <= tol or np.max(np.abs(c[-3:])) <= tol * vscale:
            accepted.append((lo, hi, c))
            continue
        if depth >= max_depth:
            raise ConvergenceError(
                f"adaptive_fit did not converge on [{lo}, {hi}]",
                interval=(lo, hi),
                residual=_tail_ratio(c),
            )
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    accepted.sort(key=lambda item: item[0])
    breaks = [item[0] for item in accepted] + [accepted[-1][1]]
    return PiecewiseCheb(breaks, np.array([item[2] for item in accepted]))


def cheb_roots(f: PiecewiseCheb):
    """All real roots of a real piecewise expansion, ascending."""
    width = f.global_b - f.global_a
    roots = []
    for p in f.pieces:
        c = np.real(p.coeffs)
        scale = np.max(np.abs(c))
        if scale == 0.0:
            continue
        c = npcheb.chebtrim(c, tol=4 * np.finfo(float).eps * scale)
        if len(c) < 2:
            continue
        for z in npcheb.chebroots(c):
            if abs(z.imag) > 1e-8 or not -1.0 - 1e-8 <= z.real <= 1.0 + 1e-8:
                continue
            s = min(max(z.real, -1.0), 1.0)
            dc = npcheb.chebder(c)
            for _ in range(4):
                d = npcheb.chebval(s, dc)
                if d == 0.0:
                    break
                step = npcheb.chebval(s, c) / d
                s = min(max(s - step, -1.0), 1.0)
                if abs(step) < 1e-16:
                    break
            roots.append(0.5 * (p.b - p.a) * (s + 1.0) + p.a)
    roots.sort()
    merged = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-13 * width:
            merged.append(r)
    return merged
