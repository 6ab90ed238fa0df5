"""Scattering of an incident wave by a radially symmetric potential.

Inside the disk of radius R the total field is ``sum_n a_n psi_|n|(r) e^{int}``;
outside, the scattered field is ``sum_n b_n H_n(kr) e^{int}``.  Matching the
field and its radial derivative on r = R against the Fourier coefficients
``c_n``, ``d_n`` of the incident wave gives a 2x2 system per mode.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import hankel1

from .errors import DomainError, IllConditionedModeError
from .pbessel import ModeSolution, NormalFormQ, PotentialSpec, eval_mode, solve_mode
from .specfun import hankel_sequence_scaled

DECAY_TOL = 1e-12
DET_RTOL = 1e-12


@dataclass(frozen=True)
class PlaneWave:
    """exp(i k r cos(t - theta0))."""

    k: float
    theta0: float = 0.0

    def value(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
        return np.exp(1j * self.k * r * np.cos(t - self.theta0))

    def radial_derivative(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
        c = np.cos(t - self.theta0)
        return 1j * self.k * c * np.exp(1j * self.k * r * c)


@dataclass(frozen=True)
class CircularWave:
    """H_0(k |z - z0|) for a source z0 outside the scatterer."""

    k: float
    z0: complex

    def _rho(self, r, t):
        z = r * np.exp(1j * t)
        return np.abs(z - self.z0)

    def value(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
        return hankel1(0, self.k * self._rho(r, t))

    def radial_derivative(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
        rho = self._rho(r, t)
        drho = (r - np.real(self.z0 * np.exp(-1j * t))) / rho
        return -self.k * hankel1(1, self.k * rho) * drho


def incident_from_spec(spec: str, k: float):
    """Parse ``plane:<theta0>`` or ``circular:<x>,<y>``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "plane":
        return PlaneWave(k, float(arg) if arg else 0.0)
    if kind == "circular":
        x, y = (float(v) for v in arg.split(","))
        return CircularWave(k, complex(x, y))
    raise ValueError(f"unknown incident field {spec!r}")


@dataclass(frozen=True)
class ScatterProblem:
    k: float
    pot: PotentialSpec
    m: int | None = None
    tol: float = 1e-12

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if self.m is not None and self.m < 0:
            raise DomainError("m must be nonnegative")

    @property
    def default_m(self):
        return max(1, math.ceil(0.5 * math.pi * self.pot.R * self.k))


def _check_incident(inc, R):
    z0 = getattr(inc, "z0", None)
    if z0 is not None and not abs(z0) > R:
        raise DomainError(f"source point {z0} lies inside the scatterer (R = {R})")


def boundary_fourier(inc, R, m):
    """Coefficients (c_n), (d_n), n = -m..m, of u_i(R, t) and d/dr u_i(R, t).

    Convention: u_i(R, t) ~ sum_n c_n exp(int).
    """
    m = int(m)
    if m < 1:
        raise DomainError("m must be at least 1")
    N = 1 << max(0, (4 * m + 3).bit_length())
    t = 2.0 * np.pi * np.arange(N) / N
    u = np.asarray(inc.value(R, t), dtype=complex)
    du = np.asarray(inc.radial_derivative(R, t), dtype=complex)
    idx = np.arange(-m, m + 1) % N
    return np.fft.fft(u)[idx] / N, np.fft.fft(du)[idx] / N


def _trailing_decayed(c, d, k):
    m = (len(c) - 1) // 2
    tail = max(2, m // 10)
    n = np.abs(np.arange(-m, m + 1))
    far = n > m - tail
    ac, ad = np.abs(c), np.abs(d) / k
    big = max(ac.max(), ad.max())
    return max(ac[far].max(), ad[far].max()) <= DECAY_TOL * big


def precompute_modes(k, pot, m, tol=1e-12, threads=1) -> list:
    """ModeSolution for n = 0..m, in order, optionally on a thread pool."""

    def one(n):
        return solve_mode(NormalFormQ(k, n, pot), tol)

    ns = range(m + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            return list(ex.map(one, ns))
    return [one(n) for n in ns]


@dataclass(frozen=True)
class ScatterSolution:
    k: float
    R: float
    m: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    modes: Sequence[ModeSolution]
    hankel_R: np.ndarray
    hankel_logd_R: np.ndarray
    incident: object

    def coefficient(self, vec, n):
        return vec[n + self.m]

    def system_residuals(self):
        """|residual| / (|c_n| + |d_n|) of the matching system for every n."""
        out = np.empty(2 * self.m + 1)
        for i, n in enumerate(range(-self.m, self.m + 1)):
            ms = self.modes[abs(n)]
            h, logd = _hankel_signed(self.hankel_R, self.hankel_logd_R, n)
            a, b = self.a[i], self.b[i]
            c, d = self.c[i], self.d[i]
            if b == 0:
                r1 = a * ms.psi_R - c
                r2 = a * ms.dpsi_R - d
                # b H and b k H' vanish below the representable range
            else:
                r1 = a * ms.psi_R - b * h - c
                r2 = a * ms.dpsi_R - b * self.k * h * logd - d
            scale = abs(c) + abs(d)
            out[i] = max(abs(r1), abs(r2)) / scale if scale > 0 else max(abs(r1), abs(r2))
        return out


def _hankel_signed(h, logd, n):
    """H_n(kR) and H_n'/H_n for signed n via H_{-n} = (-1)^n H_n."""
    an = abs(n)
    val = h[an]
    if n < 0 and an % 2:
        val = -val
    return val, logd[an]


def _coefficients(k, modes, h, logd, c, d, m):
    a = np.zeros(2 * m + 1, dtype=complex)
    b = np.zeros(2 * m + 1, dtype=complex)
    for i, n in enumerate(range(-m, m + 1)):
        ms = modes[abs(n)]
        psi, dpsi = ms.psi_R, ms.dpsi_R
        hn, rho = _hankel_signed(h, logd, n)
        # D / H_n, finite even when H_n overflows
        det = dpsi - k * rho * psi
        scale = abs(dpsi) + k * abs(rho) * abs(psi)
        if not abs(det) > DET_RTOL * scale:
            raise IllConditionedModeError(f"mode matching determinant vanishes for n = {n}", n)
        a[i] = (d[i] - k * rho * c[i]) / det
        if np.isfinite(hn):
            b[i] = (psi * d[i] - dpsi * c[i]) / (hn * det)
    return a, b


def solve_scatter(prob: ScatterProblem, inc, threads=1, modes=None, timings=None):
    """Solve for (a_n), (b_n).  ``timings`` (a dict) receives stage durations.

    With ``prob.m == 0`` the truncation order starts at ceil(pi R k / 2) and
    doubles until the trailing incident coefficients have decayed.
    """
    import time

    k, R = float(prob.k), float(prob.pot.R)
    _check_incident(inc, R)
    if prob.m is None:
        m = prob.default_m
    elif prob.m == 0:
        m = prob.default_m
        while True:
            c, d = boundary_fourier(inc, R, m)
            if _trailing_decayed(c, d, k):
                break
            m *= 2
    else:
        m = int(prob.m)
    t0 = time.perf_counter()
    if modes is None or len(modes) < m + 1:
        modes = precompute_modes(k, prob.pot, m, prob.tol, threads)
    else:
        modes = list(modes[: m + 1])
    t1 = time.perf_counter()
    h, logd = hankel_sequence_scaled(m, k * R)
    c, d = boundary_fourier(inc, R, m)
    a, b = _coefficients(k, modes, h, logd, c, d, m)
    t2 = time.perf_counter()
    if timings is not None:
        timings["precomp_seconds"] = t1 - t0
        timings["solve_seconds"] = t2 - t1
    return ScatterSolution(k, R, m, a, b, c, d, tuple(modes), h, logd, inc)


def _as_points(r, t):
    r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
    return r, t


def _mode_table(sol: ScatterSolution, r):
    """psi_n(r) for n = 0..m, shape (m + 1, len(r))."""
    return np.array([eval_mode(ms, r)[0] for ms in sol.modes])


def eval_total(sol: ScatterSolution, r, t):
    """Total field at polar points (r, t) with r <= R."""
    r, t = _as_points(r, t)
    shape = r.shape
    r, t = r.ravel(), t.ravel()
    if np.any(r > sol.R) or np.any(r < sol.modes[0].partition[0]):
        raise DomainError("eval_total needs 1e-15 <= r <= R")
    psi = _mode_table(sol, r)
    m = sol.m
    n = np.arange(-m, m + 1)
    phases = np.exp(1j * np.outer(n, t))
    weights = sol.a[:, None] * psi[np.abs(n)] * phases
    return weights.sum(axis=0).reshape(shape)


def _exterior_scattered(sol, r, t):
    m = sol.m
    out = np.zeros(r.shape, dtype=complex)
    for n in range(-m, m + 1):
        bn = sol.b[n + m]
        if bn == 0:
            continue
        out += bn * hankel1(n, sol.k * r) * np.exp(1j * n * t)
    return out


def eval_scattered(sol: ScatterSolution, r, t, path="auto"):
    """Scattered field; Hankel sum for r >= R, total minus incident inside.

    ``path`` may force "exterior" or "interior" evaluation at r = R.
    """
    r, t = _as_points(r, t)
    shape = r.shape
    r, t = r.ravel(), t.ravel()
    out = np.empty(r.shape, dtype=complex)
    if path == "exterior":
        ext = np.ones(r.shape, bool)
    elif path == "interior":
        ext = np.zeros(r.shape, bool)
    elif path == "auto":
        ext = r >= sol.R
    else:
        raise ValueError(f"unknown path {path!r}")
    if np.any(ext):
        if np.any(r[ext] < sol.R):
            raise DomainError("the Hankel expansion is only valid for r >= R")
        out[ext] = _exterior_scattered(sol, r[ext], t[ext])
    if np.any(~ext):
        ri, ti = r[~ext], t[~ext]
        out[~ext] = eval_total(sol, ri, ti) - sol.incident.value(ri, ti)
    return out.reshape(shape)


def eval_total_everywhere(sol: ScatterSolution, r, t):
    """Total field at any r: interior expansion inside, incident + scattered outside."""
    r, t = _as_points(r, t)
    shape = r.shape
    r, t = r.ravel(), t.ravel()
    out = np.empty(r.shape, dtype=complex)
    inside = r <= sol.R
    if np.any(inside):
        out[inside] = eval_total(sol, r[inside], t[inside])
    if np.any(~inside):
        ro, to = r[~inside], t[~inside]
        out[~inside] = sol.incident.value(ro, to) + _exterior_scattered(sol, ro, to)
    return out.reshape(shape)
