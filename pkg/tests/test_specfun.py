import math

import numpy as np
import pytest
from scipy import special as sp

from helmrad.errors import ScaledOverflowError
from helmrad.specfun import (
    bessel_j,
    bessel_jy,
    bessel_jy_integer_sequence,
    hankel_h,
    hankel_sequence,
    hankel_sequence_scaled,
    log_bessel_j_small,
)


def test_j0_small_argument():
    assert bessel_jy(0, 1e-10).j == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("x", [1.0, 10.0, 100.0])
def test_half_integer_closed_form(x):
    b = bessel_jy(0.5, x)
    assert b.j == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), abs=1e-12)
    assert b.y == pytest.approx(-math.sqrt(2 / (math.pi * x)) * math.cos(x), abs=1e-12)


def test_first_zero_of_j0():
    assert abs(bessel_jy(0, 2.404825557695773).j) <= 1e-12


@pytest.mark.parametrize(
    "nu,x", [(0, 0.3), (1, 5.0), (2.5, 1.7), (10, 3.0), (40.5, 60.0), (100, 150.0), (7, 40.0), (300, 5000.0)]
)
def test_against_scipy(nu, x):
    b = bessel_jy(nu, x)
    scale = max(abs(sp.jv(nu, x)), abs(sp.yv(nu, x)) if abs(sp.yv(nu, x)) < 1e300 else 1.0, 1e-300)
    assert abs(b.j - sp.jv(nu, x)) <= 1e-12 * max(1.0, abs(sp.jv(nu, x)))
    assert abs(b.y - sp.yv(nu, x)) <= 1e-12 * scale
    assert abs(b.jp - sp.jvp(nu, x)) <= 1e-12 * max(1.0, abs(sp.jvp(nu, x)))


def test_wronskian_random_samples():
    rng = np.random.default_rng(2024)
    nus = 200 * rng.random(10_000)
    xs = 0.01 + 399.99 * rng.random(10_000)
    worst = 0.0
    for nu, x in zip(nus, xs):
        try:
            b = bessel_jy(nu, x)
        except ScaledOverflowError:
            continue
        worst = max(worst, b.wronskian_error())
    assert worst <= 1e-10


def test_recurrence_integer_chain():
    x = 37.0
    j, y = bessel_jy_integer_sequence(120, x)
    for n in range(1, 120):
        terms = [abs(j[n - 1]), abs(j[n + 1]), abs(2 * n / x * j[n])]
        assert abs(j[n - 1] + j[n + 1] - 2 * n / x * j[n]) <= 1e-10 * max(terms)


def test_hankel_order0():
    h, hp = hankel_h(0, 1.0)
    assert h == pytest.approx(sp.j0(1.0) + 1j * sp.y0(1.0), abs=1e-14)
    # Wronskian of J and Y expressed through H and its conjugate
    assert (np.conj(h) * hp - h * np.conj(hp)).imag == pytest.approx(4 / math.pi, rel=1e-12)


def test_hankel_large_argument_amplitude():
    h, _ = hankel_h(5, 100.0)
    assert abs(h) == pytest.approx(math.sqrt(2 / (math.pi * 100.0)), rel=0.02)


def test_hankel_high_order_recurrence_consistency():
    hs, _ = hankel_sequence(51, 10.0)
    h, _ = hankel_h(50, 10.0)
    assert abs(hs[50] - h) <= 1e-10 * abs(h)
    rec = 2 * 50 / 10.0 * hs[50] - hs[49]
    assert abs(rec - hs[51]) <= 1e-10 * abs(hs[51])
    assert abs(h - sp.hankel1(50, 10.0)) <= 1e-12 * abs(h)


def test_scaled_sequence_reports_overflow():
    h, logd = hankel_sequence_scaled(400, 2.0)
    assert np.isinf(h[-1]) or abs(h[-1]) > 1e250
    assert np.all(np.isfinite(logd))
    exact = sp.h1vp(120, 2.0) / sp.hankel1(120, 2.0)
    assert logd[120] == pytest.approx(exact, rel=1e-10)


def test_y_overflow_raises():
    with pytest.raises(ScaledOverflowError):
        bessel_jy(200, 1e-3)


def test_j_without_y_at_tiny_argument():
    j, jp = bessel_j(3, 1e-5)
    assert j == pytest.approx(sp.jv(3, 1e-5), rel=1e-12)
    assert jp == pytest.approx(sp.jvp(3, 1e-5), rel=1e-12)


def test_log_j_small():
    logj, ratio = log_bessel_j_small(500, 1e-3)
    expect = 500 * math.log(5e-4) - math.lgamma(501)
    assert logj == pytest.approx(expect, rel=1e-12)
    assert ratio == pytest.approx(500 / 1e-3, rel=1e-9)
