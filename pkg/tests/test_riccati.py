import numpy as np
import pytest
from scipy import special as sp

from helmrad.errors import PreconditionError
from helmrad.riccati import Kind, build_log_pair, log_basis


def const(c):
    return lambda r: np.full(np.shape(r), float(c))


def test_constant_closed_form():
    mu, a, b = 3.0, 0.2, 2.2
    inc, dec = build_log_pair(const(-mu * mu), a, b)
    r = np.linspace(a, b, 300)
    assert inc.kind is Kind.INCREASING and dec.kind is Kind.DECREASING
    assert np.max(np.abs(inc.dsigma(r) - mu * np.tanh(mu * (r - a)))) <= 1e-11 * mu
    expect = np.log(np.cosh(mu * (r - a))) - np.log(np.cosh(mu * (b - a)))
    assert np.max(np.abs(inc.sigma(r) - expect)) <= 1e-11


def test_backward_is_reflection():
    a, b = 0.0, 1.5
    inc, dec = build_log_pair(const(-4.0), a, b)
    r = np.linspace(a, b, 100)
    assert np.max(np.abs(dec.dsigma(r) + inc.dsigma(a + b - r))) <= 1e-12


def test_anchor_and_cosh_ratio():
    inc, dec = build_log_pair(const(-1.0), 0.0, 1.0)
    assert log_basis(inc, 1.0)[0] == 1.0
    assert log_basis(dec, 0.0)[0] == 1.0
    y, _ = log_basis(inc, np.array([0.5, 1.0]))
    assert y[0] / y[1] == pytest.approx(np.cosh(0.5) / np.cosh(1.0), rel=1e-13)


def test_evanescent_bessel_region():
    n = k = 100.0
    turning = np.sqrt(n * n - 0.25) / k

    def Q(r):
        r = np.asarray(r, float)
        return (0.25 - n * n) / (r * r) + k * k

    a, b = 0.01, 0.9 * turning
    inc, _ = build_log_pair(Q, a, b, origin_singular=True)
    r = np.linspace(0.05, b, 200)
    log_ref = 0.5 * np.log(r) + np.log(sp.jv(n, k * r))
    drift = inc.sigma(r) - log_ref
    assert np.max(np.abs(np.expm1(drift - drift[-1]))) <= 1e-9


def test_residual_sign_and_wronskian():
    k = 50.0

    def Q(r):
        r = np.asarray(r, float)
        return k * k * (1.0 - 2.0 * np.exp(-r)) - 2.0 / (r * r)

    a, b = 0.1, 0.6
    inc, dec = build_log_pair(Q, a, b)
    r = a + (b - a) * np.random.default_rng(7).random(100)
    for ls in (inc, dec):
        y, dy = log_basis(ls, r)
        ddy = (ls.dsigma.diff()(r) + ls.dsigma(r) ** 2) * y
        assert np.max(np.abs(ddy + Q(r) * y) / (np.abs(Q(r)) * y)) <= 1e-9
        assert np.all(ls.sigma.node_values() <= 1e-15)
    u, du = log_basis(inc, r)
    v, dv = log_basis(dec, r)
    w = u * dv - du * v
    assert np.all(w != 0)
    assert np.max(np.abs(w / w[0] - 1.0)) <= 1e-8


def test_rejects_positive():
    with pytest.raises(PreconditionError):
        build_log_pair(const(1.0), 0.0, 1.0)
