import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from helmrad.cheb import (
    ChebExpansion,
    PiecewiseCheb,
    adaptive_fit,
    cheb_diff,
    cheb_eval,
    cheb_integrate,
    cheb_roots,
)
from helmrad.errors import DomainError


def test_eval_constant():
    f = adaptive_fit(lambda x: 3.0 + 0 * x, 0.0, 1.0)
    assert cheb_eval(f, 0.5) == pytest.approx(3.0, rel=1e-14)


def test_eval_identity():
    f = adaptive_fit(lambda x: x, -1.0, 1.0)
    assert cheb_eval(f, 0.25) == pytest.approx(0.25, abs=1e-14)


def test_eval_cos():
    f = adaptive_fit(np.cos, 0.0, np.pi)
    assert abs(cheb_eval(f, 1.0) - np.cos(1.0)) <= 1e-14


def test_eval_outside_raises():
    f = adaptive_fit(np.cos, 0.0, 1.0)
    with pytest.raises(DomainError):
        cheb_eval(f, 1.5)


def test_nodal_values_reproduced():
    f = ChebExpansion.interpolate(np.exp, 0.0, 2.0)
    vals = np.exp(f.nodes())
    assert np.max(np.abs(f(f.nodes()) - vals)) <= 10 * np.finfo(float).eps * vals.max()


def test_diff_polynomial():
    d = cheb_diff(ChebExpansion.interpolate(lambda x: x * x, 0.0, 1.0))
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(d(x) - 2 * x)) <= 1e-13


def test_diff_constant_is_zero():
    d = cheb_diff(ChebExpansion(0.0, 1.0, np.array([5.0])))
    assert np.all(d(np.linspace(0, 1, 5)) == 0.0)


def test_diff_sin():
    d = cheb_diff(ChebExpansion.interpolate(np.sin, 0.0, 1.0))
    x = np.linspace(0, 1, 100)
    assert np.max(np.abs(d(x) - np.cos(x))) <= 1e-12


def test_integrate_examples():
    x = np.linspace(0, 2, 50)
    F = cheb_integrate(adaptive_fit(lambda t: 1.0 + 0 * t, 0.0, 2.0), 0.0, 0.0)
    assert np.max(np.abs(F(x) - x)) <= 1e-14
    x = np.linspace(0, 1, 50)
    F = cheb_integrate(adaptive_fit(lambda t: 2 * t, 0.0, 1.0), 1.0, 0.0)
    assert np.max(np.abs(F(x) - (x * x - 1))) <= 1e-14
    x = np.linspace(0, np.pi, 100)
    F = cheb_integrate(adaptive_fit(np.cos, 0.0, np.pi), np.pi, 0.0)
    assert np.max(np.abs(F(x) - (np.sin(x) - np.sin(np.pi)))) <= 1e-12


def test_integrate_across_many_pieces():
    f = adaptive_fit(lambda t: np.cos(100 * t), 0.0, 1.0)
    assert f.npieces > 1
    F = cheb_integrate(f, 0.3, 2.0)
    x = np.linspace(0, 1, 1000)
    expect = (np.sin(100 * x) - np.sin(30.0)) / 100 + 2.0
    assert np.max(np.abs(F(x) - expect)) <= 1e-12


def test_fit_polynomial_single_piece():
    f = adaptive_fit(lambda x: x * x, -1.0, 3.0, 1e-12)
    assert f.npieces == 1
    x = np.linspace(-1, 3, 200)
    assert np.max(np.abs(f(x) - x * x)) <= 1e-14 * 9


def test_fit_kink_refines_near_kink():
    c = 1.0 / 3.0
    f = adaptive_fit(lambda x: np.abs(x - c), 0.0, 1.0, 1e-12)
    widths = np.diff(f.breaks)
    closest = np.argmin(np.abs(0.5 * (f.breaks[:-1] + f.breaks[1:]) - c))
    assert widths[closest] < 1e-6
    assert widths.max() > 0.1
    x = np.concatenate([np.linspace(0, 0.3, 200), np.linspace(0.37, 1, 200)])
    assert np.max(np.abs(f(x) - np.abs(x - c))) <= 1e-12


def test_fit_oscillatory():
    f = adaptive_fit(lambda x: np.cos(100 * x), 0.0, 1.0, 1e-12)
    assert f.npieces > 1
    x = np.linspace(0, 1, 1000)
    assert np.max(np.abs(f(x) - np.cos(100 * x))) <= 1e-10


def test_pieces_tile():
    f = adaptive_fit(lambda x: np.exp(np.sin(20 * x)), 0.0, 2.0)
    ps = f.pieces
    assert ps[0].a == 0.0 and ps[-1].b == 2.0
    assert all(p.b == q.a for p, q in zip(ps, ps[1:]))


def test_shared_breakpoint_goes_left():
    f = PiecewiseCheb([0.0, 1.0, 2.0], [[1.0, 0.0], [2.0, 0.0]])
    assert f(1.0) == 1.0


def test_roots_simple():
    r = cheb_roots(adaptive_fit(lambda x: x * x - 1, -2.0, 2.0))
    assert np.allclose(r, [-1.0, 1.0], atol=1e-14)
    assert len(cheb_roots(adaptive_fit(lambda x: 2.0 + 0 * x, 0.0, 1.0))) == 0


def test_roots_turning_point():
    k, n = 100.0, 120.0
    f = adaptive_fit(lambda r: k * k * r * r + (0.25 - n * n) / (r * r), 0.1, 2.0)
    r = cheb_roots(f)
    assert len(r) == 1
    assert r[0] == pytest.approx(((n * n - 0.25) / k**2) ** 0.25, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 40.0), st.floats(0.0, 3.0))
def test_roots_count_matches_sign_changes(w, shift):
    f = adaptive_fit(lambda x: np.sin(w * x + shift), 0.0, 1.0)
    x = np.linspace(0, 1, 10_000)
    s = np.sin(w * x + shift)
    # a root on an endpoint is not a sign change of the samples
    assume(min(abs(s[0]), abs(s[-1])) > 1e-6)
    changes = np.count_nonzero(np.sign(s[1:]) != np.sign(s[:-1]))
    assert len(cheb_roots(f)) == changes


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 30.0), st.floats(-2.0, 2.0), st.integers(0, 2**32 - 1))
def test_fit_round_trip(w, c, seed):
    def g(x):
        return np.exp(c * x) * np.cos(w * x)

    tol = 1e-12
    f = adaptive_fit(g, 0.0, 1.0, tol)
    x = np.random.default_rng(seed).random(1000)
    scale = max(1.0, np.exp(abs(c)))
    assert np.max(np.abs(f(x) - g(x))) <= 10 * tol * scale * max(1.0, w)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 30.0), st.floats(-1.0, 1.0))
def test_diff_inverts_integrate(w, c):
    f = adaptive_fit(lambda x: np.exp(c * x) * np.sin(w * x) + 2.0, 0.0, 1.0)
    back = cheb_integrate(f, 0.0, 0.0).diff()
    x = np.linspace(0, 1, 300)
    assert np.max(np.abs(back(x) - f(x))) <= 1e-12 * np.max(np.abs(f(x)))
