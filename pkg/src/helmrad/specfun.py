"""Bessel functions J, Y and the Hankel function H = J + iY of real order.

The general routine follows the classical Temme/Steed scheme: a continued
fraction gives J'/J at the requested order, downward recurrence carries the
(unnormalized) pair to an order mu in [-1/2, 1/2], where J_mu and Y_mu are
fixed by Temme's series (x < 2) or Steed's complex continued fraction
(x >= 2) together with the Wronskian; Y is then recurred upward.  For
x >> nu the Hankel asymptotic expansion is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ScaledOverflowError

EPS = 1e-16
FPMIN = 1e-300
XMIN = 2.0
ASYMPTOTIC_XMIN = 35.0
MAX_ORDER = 1e6
_RESCALE = 1e200

# Taylor coefficients of 1/Gamma(z) about 0 (z^1 ... z^26)
_RGAMMA = (
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
)


@dataclass(frozen=True)
class BesselValue:
    j: float
    y: float
    jp: float
    yp: float
    order: float
    arg: float

    @property
    def h(self):
        return complex(self.j, self.y)

    @property
    def hp(self):
        return complex(self.jp, self.yp)

    def wronskian_error(self):
        """Relative deviation of J Y' - J' Y from 2/(pi x)."""
        w = 2.0 / (math.pi * self.arg)
        return abs(self.j * self.yp - self.jp * self.y - w) / w


def _temme_gammas(mu):
    """gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu) for |mu| <= 1/2."""
    gam1 = 0.0
    gam2 = 0.0
    for k in range(len(_RGAMMA), 0, -1):
        c = _RGAMMA[k - 1]
        # 1/Gamma(1+x) = sum_k c_k x^(k-1)
        if k % 2 == 0:
            gam1 = gam1 * mu * mu - c
        else:
            gam2 = gam2 * mu * mu + c
    return gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1


def _cf1(nu, x):
    """J'_nu/J_nu by Lentz's method, plus the sign of the denominator chain."""
    xi = 1.0 / x
    xi2 = 2.0 * xi
    isign = 1.0
    h = max(nu * xi, FPMIN)
    b = xi2 * nu
    d = 0.0
    c = h
    maxit = 20000 + int(4 * x)
    for _ in range(maxit):
        b += xi2
        d = b - d
        if abs(d) < FPMIN:
            d = FPMIN
        c = b - 1.0 / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = c * d
        h *= delta
        if d < 0.0:
            isign = -isign
        if abs(delta - 1.0) < EPS:
            return h, isign
    raise ArithmeticError(f"continued fraction for J'/J failed at nu={nu}, x={x}")


def _cf2(mu, x):
    """(p, q) with p + iq = (J'_mu + iY'_mu)/(J_mu + iY_mu), Steed's method."""
    xi = 1.0 / x
    # p + iq = -1/(2x) + i + (i/x) * a1/(b1 + a2/(b2 + ...))
    val = complex(-0.5 * xi, 1.0) + complex(0.0, xi) * _cf2_tail(mu, x)
    return val.real, val.imag


def _cf2_tail(mu, x):
    """a1/(b1 + ...) with a_k = (k - 1/2)^2 - mu^2, b_k = 2(x + ik); modified Lentz."""
    tiny = 1e-300
    f = tiny
    C = f
    D = 0.0
    k = 1
    while True:
        a = (k - 0.5) ** 2 - mu * mu
        bk = complex(2.0 * x, 2.0 * k)
        D = bk + a * D
        if abs(D) < tiny:
            D = tiny
        C = bk + a / C
        if abs(C) < tiny:
            C = tiny
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < EPS:
            return f
        k += 1
        if k > 100000:
            raise ArithmeticError(f"Steed continued fraction failed at mu={mu}, x={x}")


def _asymptotic(nu, x):
    """(J, Y) from the Hankel expansion, or None if it does not converge."""
    mu4 = 4.0 * nu * nu
    term = 1.0
    P = 1.0
    Q = 0.0
    k = 0
    last = math.inf
    while True:
        k += 1
        term *= (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        size = abs(term)
        if size > last and size > EPS:
            return None
        last = size
        # terms alternate between Q (odd k) and P (even k) with sign (-1)^(k//2)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            Q += sign * term
        else:
            P += sign * term
        if size < 0.1 * EPS * max(abs(P), abs(Q), 1e-300) or term == 0.0:
            break
        if k > 200:
            return None
    chi = x - (0.5 * nu + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * x))
    c, s = math.cos(chi), math.sin(chi)
    return amp * (P * c - Q * s), amp * (P * s + Q * c)


def _bessel_asymptotic(nu, x):
    lo = _asymptotic(nu, x)
    hi = _asymptotic(nu + 1.0, x)
    if lo is None or hi is None:
        return None
    j, y = lo
    j1, y1 = hi
    return BesselValue(j, y, nu / x * j - j1, nu / x * y - y1, nu, x)


def bessel_jy(order, x) -> BesselValue:
    """J_nu(x), Y_nu(x) and their derivatives for real nu >= 0, x > 0."""
    nu = float(order)
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"Bessel argument must be positive, got {x}")
    if not 0.0 <= nu <= MAX_ORDER:
        raise DomainError(f"order must lie in [0, {MAX_ORDER:g}], got {nu}")
    if x >= ASYMPTOTIC_XMIN:
        if (nu + 1.0) ** 2 <= 4.0 * x:
            val = _bessel_asymptotic(nu, x)
            if val is not None:
                return val
        if nu < x:
            # CF1 needs ~x iterations here and loses accuracy; recur upward
            # from the lowest orders instead (stable below the turning point)
            return _bessel_upward(nu, x)
    return _bessel_temme_steed(nu, x)


def _bessel_upward(nu, x):
    nl = int(nu)
    mu = nu - nl
    lo = _asymptotic(mu, x)
    hi = _asymptotic(mu + 1.0, x)
    if lo is None or hi is None:
        return _bessel_temme_steed(nu, x)
    h0 = complex(*lo)
    h1 = complex(*hi)
    for i in range(1, nl + 1):
        h0, h1 = h1, 2.0 * (mu + i) / x * h1 - h0
    hp = nu / x * h0 - h1
    return BesselValue(h0.real, h0.imag, hp.real, hp.imag, nu, x)


def _bessel_temme_steed(nu, x, need_y=True):
    nl = int(nu + 0.5) if x < XMIN else max(0, int(nu - x + 1.5))
    mu = nu - nl
    xi = 1.0 / x
    xi2 = 2.0 * xi
    w = xi2 / math.pi

    h, isign = _cf1(nu, x)
    # downward recurrence of an unnormalized J, J' pair from nu to mu
    rjl = isign * 1.0
    rjpl = h * rjl
    rjl1, rjp1 = rjl, rjpl
    log_scale = 0.0  # true unnormalized value = stored * exp(log_scale)
    fact = nu * xi
    for _ in range(nl):
        rjtemp = fact * rjl + rjpl
        fact -= xi
        rjpl = fact * rjtemp - rjl
        rjl = rjtemp
        if abs(rjl) > _RESCALE:
            rjl /= _RESCALE
            rjpl /= _RESCALE
            log_scale += math.log(_RESCALE)
    if rjl == 0.0:
        rjl = EPS
    f = rjpl / rjl

    if x < XMIN:
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < EPS else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < EPS else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _temme_gammas(mu)
        ff = 2.0 / math.pi * fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        e = math.exp(e)
        p = e / (gampl * math.pi)
        q = 1.0 / (e * math.pi * gammi)
        pimu2 = 0.5 * pimu
        fact3 = 1.0 if abs(pimu2) < EPS else math.sin(pimu2) / pimu2
        r = math.pi * pimu2 * fact3 * fact3
        c = 1.0
        d = -x2 * x2
        total = ff + r * q
        total1 = p
        i = 0
        while True:
            i += 1
            ff = (i * ff + p + q) / (i * i - mu * mu)
            c *= d / i
            p /= i - mu
            q /= i + mu
            delta = c * (ff + r * q)
            total += delta
            delta1 = c * p - i * delta
            total1 += delta1
            if abs(delta) < (1.0 + abs(total)) * EPS:
                break
            if i > 10000:
                raise ArithmeticError("Temme series failed to converge")
        rymu = -total
        ry1 = -total1 * xi2
        rymup = mu * xi * rymu - ry1
        rjmu = w / (rymup - f * rymu)
    else:
        p, q = _cf2(mu, x)
        gam = (p - f) / q
        rjmu = math.sqrt(w / ((p - f) * gam + q))
        rjmu = math.copysign(rjmu, rjl)
        rymu = rjmu * gam
        rymup = rymu * (p + q / gam)
        ry1 = mu * xi * rymu - rymup

    # normalize J: true J_nu = rjl1 * (J_mu / (rjl * exp(log_scale)))
    ratio = rjmu / rjl
    if log_scale:
        ratio_log = math.log(abs(ratio)) - log_scale
        mag = math.exp(ratio_log) if ratio_log > -745.0 else 0.0
        ratio = math.copysign(mag, ratio)
    rj = rjl1 * ratio
    rjp = rjp1 * ratio
    if not need_y:
        return BesselValue(rj, math.nan, rjp, math.nan, nu, x)

    # upward recurrence for Y, rescaling only to report the overflow exponent
    y_log = 0.0
    for i in range(1, nl + 1):
        rytemp = (mu + i) * xi2 * ry1 - rymu
        rymu = ry1
        ry1 = rytemp
        if abs(ry1) > _RESCALE:
            rymu /= _RESCALE
            ry1 /= _RESCALE
            y_log += math.log(_RESCALE)
    ry = rymu
    ryp = nu * xi * rymu - ry1
    if y_log or not (math.isfinite(ry) and math.isfinite(ryp)):
        mag = y_log + math.log(max(abs(ryp), abs(ry), FPMIN))
        if mag > 709.0 or not (math.isfinite(ry) and math.isfinite(ryp)):
            raise ScaledOverflowError(
                f"Y_{nu}({x}) overflows double precision",
                mag / math.log(10.0),
            )
        ry *= math.exp(y_log)
        ryp *= math.exp(y_log)
    return BesselValue(rj, ry, rjp, ryp, nu, x)


def bessel_j(order, x):
    """(J_nu(x), J'_nu(x)) without forming Y, so it works where Y overflows."""
    nu = float(order)
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"Bessel argument must be positive, got {x}")
    if not 0.0 <= nu <= MAX_ORDER:
        raise DomainError(f"order must lie in [0, {MAX_ORDER:g}], got {nu}")
    if x >= ASYMPTOTIC_XMIN and nu < x:
        b = bessel_jy(nu, x)
    else:
        b = _bessel_temme_steed(nu, x, need_y=False)
    return b.j, b.jp


def log_bessel_j_small(order, x):
    """log J_nu(x) and J'_nu(x)/J_nu(x) from the power series.

    Meant for tiny arguments (x**2/4 << nu + 1) where J underflows.
    """
    nu = float(order)
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"Bessel argument must be positive, got {x}")
    z = -0.25 * x * x
    term = 1.0
    s = 1.0
    ds = 0.0  # d/dx of the series, divided by x/2
    for k in range(1, 200):
        term *= z / (k * (nu + k))
        s += term
        ds += k * term
        if abs(term) < EPS * abs(s):
            break
    log_j = nu * math.log(0.5 * x) - math.lgamma(nu + 1.0) + math.log(abs(s))
    ratio = nu / x + 2.0 * ds / (x * s)
    return log_j, ratio


def bessel_jy_integer_sequence(nmax, x):
    """Arrays J_n(x), Y_n(x) for n = 0..nmax (integer orders)."""
    nmax = int(nmax)
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"Bessel argument must be positive, got {x}")
    b0 = bessel_jy(0, x)
    ys = np.empty(nmax + 1)
    ys[0] = b0.y
    if nmax >= 1:
        ys[1] = -b0.yp
    for n in range(1, nmax):
        ys[n + 1] = 2.0 * n / x * ys[n] - ys[n - 1]
    if not np.all(np.isfinite(ys)):
        raise ScaledOverflowError(f"Y_n({x}) overflows for n <= {nmax}", 308.0)

    js, _ = _miller_j(nmax, x, b0.j, -b0.jp)
    return js, ys


def _miller_j(nmax, x, j0, j1):
    """J_n(x), n = 0..nmax, by Miller's backward recurrence.

    Normalized by whichever of the given J0, J1 is larger in magnitude.
    """
    top = max(nmax, int(math.ceil(x))) + 20 + 2 * int(math.sqrt(40.0 * max(nmax, x, 1.0)))
    js = np.zeros(max(nmax, 1) + 1)
    jp1, jc = 0.0, 1e-300
    for n in range(top, 0, -1):
        jm1 = 2.0 * n / x * jc - jp1
        jp1, jc = jc, jm1
        if n - 1 < len(js):
            js[n - 1] = jc
        if n < len(js):
            js[n] = jp1
        if abs(jc) > _RESCALE:
            jc /= _RESCALE
            jp1 /= _RESCALE
            js /= _RESCALE
    if abs(j0) >= abs(j1):
        js *= j0 / js[0]
    else:
        js *= j1 / js[1]
    return js[: nmax + 1], None


def hankel_h(n, x):
    """(H_n(x), H_n'(x)) for integer n >= 0, with H_n' = H_{n-1} - (n/x) H_n."""
    n = int(n)
    if n < 0:
        raise DomainError("negative orders are not supported")
    if n == 0:
        b = bessel_jy(0, x)
        return b.h, b.hp
    hi = bessel_jy(n, x)
    lo = bessel_jy(n - 1, x)
    return hi.h, lo.h - n / x * hi.h


def hankel_sequence(nmax, x):
    """Arrays H_n(x) and H_n'(x) for n = 0..nmax."""
    js, ys = bessel_jy_integer_sequence(max(nmax, 1), x)
    h = js + 1j * ys
    hp = np.empty_like(h)
    hp[0] = -h[1]
    n = np.arange(1, len(h))
    hp[1:] = h[:-1] - n / x * h[1:]
    return h[: nmax + 1], hp[: nmax + 1]


def hankel_sequence_scaled(nmax, x):
    """H_n(x) and the log-derivative H_n'(x)/H_n(x) for n = 0..nmax.

    Unlike :func:`hankel_sequence` this never raises: once Y_n overflows the
    returned H_n is complex infinity, while the log-derivative (computed from
    the ratio form of the recurrence, which is stable in the direction of
    growth) stays finite.
    """
    nmax = int(nmax)
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"Bessel argument must be positive, got {x}")
    b0 = bessel_jy(0, x)
    b1 = bessel_jy(1, x)
    h = np.empty(nmax + 1, dtype=complex)
    logd = np.empty(nmax + 1, dtype=complex)
    h[0] = b0.h
    logd[0] = b0.hp / b0.h
    if nmax >= 1:
        h[1] = b1.h
        logd[1] = b1.hp / b1.h
    # s = H_n / H_{n-1}
    s = b1.h / b0.h
    overflow = False
    for n in range(1, nmax):
        s_next = 2.0 * n / x - 1.0 / s
        logd[n + 1] = 1.0 / s_next - (n + 1) / x
        if not overflow:
            val = complex(h[n]) * s_next
            if not (math.isfinite(val.real) and math.isfinite(val.imag)):
                overflow = True
            else:
                h[n + 1] = val
        if overflow:
            h[n + 1] = complex(math.inf, math.inf)
        s = s_next
    if overflow:
        return h, logd
    # integer-order J from Miller's recurrence is more accurate than the
    # upward recurrence once n > x; Y from the upward recurrence is fine
    js, _ = _miller_j(nmax, x, b0.j, b1.j)
    h = js + 1j * h.imag
    hp = np.empty_like(h)
    hp[0] = -h[1] if nmax >= 1 else b0.hp
    n = np.arange(1, nmax + 1)
    hp[1:] = h[:-1] - n / x * h[1:]
    logd = hp / h
    return h, logd
