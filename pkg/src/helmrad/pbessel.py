"""Regular solutions of the perturbed Bessel equation.

With phi = sqrt(r) psi the radial equation becomes phi'' + Q phi = 0 with
``Q(r) = k**2 (1 + q(r)) + (1/4 - n**2) / r**2`` on [1e-15, R].  The interval
is cut at the turning points of Q and at the singular points of q; each
piece gets a phase-function basis (Q > 0) or a pair of log-represented
exponential-type solutions (Q < 0).  Starting from the small-r asymptotics
of the regular solution, the coefficients are carried across every cut by
matching phi and phi'.

All values are tracked as ``mantissa * exp(log_scale)`` so deeply
evanescent modes never overflow or underflow during the march.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .cheb import adaptive_fit, cheb_roots
from .errors import DomainError, StitchingError, UnsupportedPotentialError
from .phase import PhaseFn, build_phase, phase_basis
from .riccati import LogSlope, build_log_pair
from .specfun import bessel_j, log_bessel_j_small

XI_LEFT = 1e-15
MERGE_RTOL = 1e-12
DEGENERATE_RTOL = 1e-13
MAX_CONDITION = 1e12
UNDERFLOW_LOG = -700.0


@dataclass(frozen=True)
class PotentialSpec:
    """Radial potential q on (0, R], smooth between ``singular_points``.

    ``q`` must accept numpy arrays.  ``q0`` defaults to ``q(1e-15)``.
    """

    q: Callable
    R: float
    singular_points: Sequence[float] = ()
    q0: float | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R}")
        pts = tuple(float(c) for c in self.singular_points)
        if list(pts) != sorted(pts) or len(set(pts)) != len(pts):
            raise DomainError("singular points must be strictly increasing")
        if pts and not (0.0 < pts[0] and pts[-1] < self.R):
            raise DomainError("singular points must lie in (0, R)")
        object.__setattr__(self, "singular_points", pts)
        if self.q0 is None:
            object.__setattr__(self, "q0", float(np.asarray(self.q(np.array([XI_LEFT])))[0]))

    def spans(self):
        """Smooth spans [xi_1, chi_1], ..., [chi_s, R]."""
        pts = (XI_LEFT,) + self.singular_points + (float(self.R),)
        return list(zip(pts[:-1], pts[1:]))

    def q_on_span(self, lo, hi):
        """q restricted to [lo, hi], using one-sided values at the ends."""
        lo_in = np.nextafter(lo, hi)
        hi_in = np.nextafter(hi, lo)
        q = self.q

        def qs(r):
            return q(np.clip(np.asarray(r, dtype=float), lo_in, hi_in))

        return qs


def zero_potential(R=1.0):
    return PotentialSpec(lambda r: np.zeros(np.shape(r)), R)


@dataclass(frozen=True)
class NormalFormQ:
    k: float
    n: int
    pot: PotentialSpec

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a nonnegative integer, got {self.n}")

    def Q(self, r):
        r = np.asarray(r, dtype=float)
        return self.k**2 * (1.0 + self.pot.q(r)) + (0.25 - self.n**2) / r**2

    def Q_on_span(self, lo, hi):
        qs = self.pot.q_on_span(lo, hi)
        k2 = self.k**2
        c = 0.25 - self.n**2

        def Qs(r):
            r = np.asarray(r, dtype=float)
            return k2 * (1.0 + qs(r)) + c / (r * r)

        return Qs


def _span_roots(nf: NormalFormQ, lo, hi, tol):
    # r**2 Q / k**2 = g(r) - shift with g = r**2 (1 + q) smooth on the span
    qs = nf.pot.q_on_span(lo, hi)
    shift = (nf.n**2 - 0.25) / nf.k**2

    def g(r):
        return r * r * (1.0 + qs(r)) - shift

    fit = adaptive_fit(g, lo, hi, tol=tol)
    roots = []
    for x in cheb_roots(fit):
        if x <= lo or x >= hi:
            continue
        delta = 1e-9 * (hi - lo)
        left, right = max(lo, x - delta), min(hi, x + delta)
        gl, gr = g(np.array([left, right]))
        if gl * gr < 0.0:
            x = brentq(lambda s: float(g(np.array([s]))[0]), left, right, xtol=1e-300, rtol=1e-15)
        roots.append(x)
    return roots


def build_partition(nf: NormalFormQ, tol=1e-12):
    """Cut points 1e-15 = xi_1 < ... < xi_t = R at roots of Q and singular points of q."""
    R = float(nf.pot.R)
    pts = [XI_LEFT, R]
    pts.extend(nf.pot.singular_points)
    for lo, hi in nf.pot.spans():
        pts.extend(_span_roots(nf, lo, hi, tol))
    pts.sort()
    fixed = {XI_LEFT, R, *nf.pot.singular_points}
    merged = [pts[0]]
    for p in pts[1:]:
        if p - merged[-1] <= MERGE_RTOL * R:
            if p in fixed and merged[-1] not in fixed:
                merged[-1] = p
            continue
        merged.append(p)
    # absorb degenerate slivers into a neighbour, keeping fixed points
    out = [merged[0]]
    for p in merged[1:]:
        if p - out[-1] < DEGENERATE_RTOL * R:
            if p in fixed and out[-1] not in fixed:
                out[-1] = p
            elif p == R:
                out[-1] = p
            continue
        out.append(p)
    out[0] = XI_LEFT
    out[-1] = R
    return out


@dataclass(frozen=True)
class Seed:
    """phi(xi_1) = phi * exp(log_scale), phi'(xi_1) = dphi * exp(log_scale)."""

    phi: float
    dphi: float
    log_scale: float


def seed_values(nf: NormalFormQ) -> Seed:
    """Small-r data of the regular solution, phi ~ sqrt(r) J_n(c r), c = k sqrt(1 + q(0))."""
    one_q = 1.0 + nf.pot.q0
    if one_q < 0.0:
        raise UnsupportedPotentialError(f"1 + q(0) = {one_q} < 0")
    x1 = XI_LEFT
    n = int(nf.n)
    c = nf.k * math.sqrt(one_q)
    if c * x1 == 0.0:
        # 1 + q(0) = 0: J_n(c r) degenerates, but the regular solution still
        # starts like r**(n + 1/2) up to a constant factor
        return Seed(1.0, (n + 0.5) / x1, (n + 0.5) * math.log(x1))
    j, jp = bessel_j(n, c * x1)
    if abs(j) > 1e-290:
        sq = math.sqrt(x1)
        return Seed(sq * j, 0.5 / sq * j + c * sq * jp, 0.0)
    log_j, ratio = log_bessel_j_small(n, c * x1)
    return Seed(1.0, 0.5 / x1 + c * ratio, 0.5 * math.log(x1) + log_j)


@dataclass(frozen=True)
class Oscillatory:
    phase: PhaseFn

    @property
    def npieces(self):
        return self.phase.npieces


@dataclass(frozen=True)
class Nonoscillatory:
    increasing: LogSlope
    decreasing: LogSlope

    @property
    def npieces(self):
        return self.increasing.npieces + self.decreasing.npieces


def _basis_log(basis, r):
    """Basis values at r as mantissas with per-function log-scales.

    Returns (u, du, lu, v, dv, lv): u(r) = u * exp(lu), etc.
    """
    r = np.asarray(r, dtype=float)
    if isinstance(basis, Oscillatory):
        u, du, v, dv = phase_basis(basis.phase, r)
        zero = np.zeros_like(u)
        return u, du, zero, v, dv, zero
    inc, dec = basis.increasing, basis.decreasing
    one = np.ones(r.shape)
    return one, inc.dsigma(r), inc.sigma(r), one, dec.dsigma(r), dec.sigma(r)


def _basis_second(basis, r):
    """Second derivatives (ddu, ddv) as mantissas on the scales of _basis_log."""
    r = np.asarray(r, dtype=float)
    if isinstance(basis, Oscillatory):
        ph = basis.phase
        al, d1, d2 = ph.alpha(r), ph.dalpha(r), ph.ddalpha(r)
        d3 = ph.ddalpha.diff()(r)
        w = d1**-0.5
        w1 = -0.5 * d1**-1.5 * d2
        w2 = 0.75 * d1**-2.5 * d2 * d2 - 0.5 * d1**-1.5 * d3
        s, c = np.sin(al), np.cos(al)
        ddu = w2 * s + 2 * w1 * d1 * c + w * d2 * c - w * d1 * d1 * s
        ddv = w2 * c - 2 * w1 * d1 * s - w * d2 * s - w * d1 * d1 * c
        return ddu, ddv
    out = []
    for ls in (basis.increasing, basis.decreasing):
        ds = ls.dsigma(r)
        out.append(ls.dsigma.diff()(r) + ds * ds)
    return tuple(out)


def _combine(g, lg, h, lh, u, du, lu, v, dv, lv):
    """g e^lg (u, du) e^lu + h e^lh (v, dv) e^lv as (phi, dphi, log_scale)."""
    e1 = lg + lu
    e2 = lh + lv
    e = np.maximum(e1, e2)
    w1 = g * np.exp(e1 - e)
    w2 = h * np.exp(e2 - e)
    return w1 * u + w2 * v, w1 * du + w2 * dv, e


def _solve_match(basis, x, phi, dphi, L):
    """Coefficients (g, lg, h, lh) reproducing (phi, dphi) e^L at x."""
    u, du, lu, v, dv, lv = (float(np.asarray(a).reshape(-1)[0]) for a in _basis_log(basis, [x]))
    M = np.array([[u, v], [du, dv]])
    rhs = np.array([phi, dphi])
    rs = 1.0 / np.max(np.abs(M), axis=1)
    Mr = M * rs[:, None]
    cs = 1.0 / np.max(np.abs(Mr), axis=0)
    Ms = Mr * cs[None, :]
    cond = np.linalg.cond(Ms)
    if not cond <= MAX_CONDITION:
        raise StitchingError(
            f"continuity system at r = {x!r} has condition number {cond:.3g}", x, cond
        )
    sol = np.linalg.solve(Ms, rhs * rs) * cs
    return float(sol[0]), L - lu, float(sol[1]), L - lv


@dataclass(frozen=True)
class ModeSolution:
    """Regular solution psi_n, normalized so max(|psi(R)|, |psi'(R)|/k) = 1.

    On interval j the normal-form solution is
    ``phi = coeffs[j,0] e^{scale_log[j,0]} u_j + coeffs[j,1] e^{scale_log[j,1]} v_j``.
    """

    n: int
    k: float
    partition: np.ndarray
    bases: tuple
    coeffs: np.ndarray
    scale_log: np.ndarray
    psi_R: float
    dpsi_R: float
    seed: Seed = field(repr=False)

    @property
    def R(self):
        return float(self.partition[-1])

    @property
    def piece_count(self):
        return sum(b.npieces for b in self.bases)

    def interval_index(self, r):
        idx = np.searchsorted(self.partition, r, side="left") - 1
        return np.clip(idx, 0, len(self.bases) - 1)

    def phi_log(self, j, r):
        """(phi, dphi, log_scale) on interval j."""
        g, h = self.coeffs[j]
        lg, lh = self.scale_log[j]
        return _combine(g, lg, h, lh, *_basis_log(self.bases[j], r))

    def interface_jumps(self):
        """Relative jumps of (phi, phi') at each interior cut point."""
        out = []
        for j in range(len(self.bases) - 1):
            x = self.partition[j + 1]
            pl, dl, el = (float(a[0]) for a in self.phi_log(j, [x]))
            pr, dr, er = (float(a[0]) for a in self.phi_log(j + 1, [x]))
            e = max(el, er)
            pl, dl = pl * math.exp(el - e), dl * math.exp(el - e)
            pr, dr = pr * math.exp(er - e), dr * math.exp(er - e)
            scale_phi = max(abs(pl), abs(pr), 1e-300)
            scale_dphi = max(abs(dl), abs(dr), 1e-300)
            out.append((abs(pl - pr) / scale_phi, abs(dl - dr) / scale_dphi))
        return out


def build_basis(Q, a, b, tol, origin_singular):
    mid = 0.5 * (a + b)
    if float(np.asarray(Q(np.array([mid])))[0]) > 0.0:
        return Oscillatory(build_phase(Q, a, b, tol, origin_singular=origin_singular))
    inc, dec = build_log_pair(Q, a, b, tol, origin_singular=origin_singular)
    return Nonoscillatory(inc, dec)


def _span_of(nf, a, b):
    for lo, hi in nf.pot.spans():
        if lo <= a and b <= hi:
            return lo, hi
    raise DomainError(f"interval [{a}, {b}] crosses a singular point")


def solve_mode(nf: NormalFormQ, tol=1e-12) -> ModeSolution:
    """Build, stitch and normalize the regular solution of the mode equation."""
    part = build_partition(nf, tol)
    seed = seed_values(nf)
    bases = []
    coeffs = []
    logs = []
    phi, dphi, L = seed.phi, seed.dphi, seed.log_scale
    for j in range(len(part) - 1):
        a, b = part[j], part[j + 1]
        lo, hi = _span_of(nf, a, b)
        Q = nf.Q_on_span(lo, hi)
        basis = build_basis(Q, a, b, tol, origin_singular=(j == 0))
        g, lg, h, lh = _solve_match(basis, a, phi, dphi, L)
        bases.append(basis)
        coeffs.append((g, h))
        logs.append((lg, lh))
        p, dp, e = _combine(g, lg, h, lh, *_basis_log(basis, [b]))
        phi, dphi, L = float(p[0]), float(dp[0]), float(e[0])
        # keep the mantissa O(1)
        m = max(abs(phi), abs(dphi) / nf.k)
        if m > 0.0 and math.isfinite(m):
            phi, dphi, L = phi / m, dphi / m, L + math.log(m)

    R = part[-1]
    sq = math.sqrt(R)
    psi = phi / sq
    dpsi = (dphi - phi / (2.0 * R)) / sq
    norm = max(abs(psi), abs(dpsi) / nf.k)
    if not (norm > 0.0 and math.isfinite(norm)):
        raise StitchingError("mode vanishes at R", R, math.inf)
    shift = L + math.log(norm)
    logs = np.array(logs) - shift
    return ModeSolution(
        n=int(nf.n),
        k=float(nf.k),
        partition=np.array(part),
        bases=tuple(bases),
        coeffs=np.array(coeffs, dtype=float),
        scale_log=logs,
        psi_R=psi / norm,
        dpsi_R=dpsi / norm,
        seed=seed,
    )


def eval_mode(ms: ModeSolution, r):
    """(psi_n(r), psi_n'(r)) for 1e-15 <= r <= R; vectorized over r."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if np.any(r < ms.partition[0]) or np.any(r > ms.partition[-1]) or np.any(np.isnan(r)):
        raise DomainError(f"r outside [{ms.partition[0]}, {ms.partition[-1]}]")
    psi = np.zeros(r.shape)
    dpsi = np.zeros(r.shape)
    idx = ms.interval_index(r)
    for j in np.unique(idx):
        mask = idx == j
        x = r[mask]
        p, dp, e = ms.phi_log(j, x)
        sq = np.sqrt(x)
        val = p / sq
        der = (dp - p / (2.0 * x)) / sq
        keep = e >= UNDERFLOW_LOG
        scale = np.where(keep, np.exp(np.where(keep, e, 0.0)), 0.0)
        psi[mask] = val * scale
        dpsi[mask] = der * scale
    at_R = r == ms.partition[-1]
    psi[at_R] = ms.psi_R
    dpsi[at_R] = ms.dpsi_R
    if scalar:
        return float(psi[0]), float(dpsi[0])
    return psi, dpsi


def mode_residual(ms: ModeSolution, nf: NormalFormQ, r):
    """|phi'' + Q phi| / (|Q| sqrt(phi**2 + phi'**2 / |Q|)) with phi'' from the bases."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros(r.shape)
    idx = ms.interval_index(r)
    for j in np.unique(idx):
        mask = idx == j
        x = r[mask]
        basis = ms.bases[j]
        u, du, lu, v, dv, lv = _basis_log(basis, x)
        ddu, ddv = _basis_second(basis, x)
        g, h = ms.coeffs[j]
        lg, lh = ms.scale_log[j]
        phi, dphi, e = _combine(g, lg, h, lh, u, du, lu, v, dv, lv)
        ddphi, _, _ = _combine(g, lg, h, lh, ddu, ddu, lu, ddv, ddv, lv)
        lo, hi = _span_of(nf, ms.partition[j], ms.partition[j + 1])
        Q = np.abs(nf.Q_on_span(lo, hi)(x))
        scale = Q * np.sqrt(phi * phi + dphi * dphi / Q)
        out[mask] = np.abs(ddphi + Q * np.sign(nf.Q_on_span(lo, hi)(x)) * phi) / scale
    return out
