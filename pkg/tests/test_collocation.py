import numpy as np
import pytest

from helmrad.cheb import PiecewiseCheb
from helmrad.collocation import KUMMER, RICCATI, solve_nonlinear_ode
from helmrad.errors import DomainError
from helmrad.phase import build_phase, windowed_coefficient


def test_kummer_constant_coefficient():
    sol = solve_nonlinear_ode(KUMMER, lambda t: np.ones_like(t), 0.0, 3.0, (1.0, 0.0))
    x = np.linspace(0, 3, 50)
    assert np.max(np.abs(sol.y(x) - 1.0)) <= 1e-14
    assert np.max(np.abs(sol.dy(x))) <= 1e-13


def test_riccati_tanh():
    a = 0.5
    sol = solve_nonlinear_ode(RICCATI, lambda t: -np.ones_like(t), a, 4.0, (0.0,))
    x = np.linspace(a, 4.0, 200)
    assert np.max(np.abs(sol.y(x) - np.tanh(x - a))) <= 1e-11


def test_riccati_backward_reflects():
    sol = solve_nonlinear_ode(RICCATI, lambda t: -np.ones_like(t), 0.0, 2.0, (0.0,), "backward")
    x = np.linspace(0, 2, 100)
    assert np.max(np.abs(sol.y(x) + np.tanh(2.0 - x))) <= 1e-11


def test_kummer_linear_coefficient_terminal_problem():
    Q = lambda t: np.asarray(t, float)  # noqa: E731
    lam = np.sqrt(1.75)
    qt = windowed_coefficient(Q, 1.0, 2.0, lam)
    ivp = solve_nonlinear_ode(KUMMER, qt, 1.0, 2.0, (lam, 0.0))
    end = (float(ivp.y(2.0)), float(ivp.dy(2.0)))
    tvp = solve_nonlinear_ode(KUMMER, Q, 1.0, 2.0, end, "backward")
    t = tvp.y.nodes().ravel()
    ddy = tvp.dy.diff()(t)
    res = KUMMER.residual(Q(t), tvp.y(t), tvp.dy(t), ddy)
    assert np.max(np.abs(res)) <= 1e-10


def test_residual_at_random_points_per_piece():
    Q = lambda t: 400.0 * (1.0 + 0.5 * np.sin(3 * t))  # noqa: E731
    ph = build_phase(Q, 0.0, 2.0)
    rng = np.random.default_rng(1)
    br = ph.dalpha.breaks
    t = np.concatenate([lo + (hi - lo) * rng.random(10) for lo, hi in zip(br[:-1], br[1:])])
    res = KUMMER.residual(Q(t), ph.dalpha(t), ph.ddalpha(t), ph.ddalpha.diff()(t))
    assert np.max(np.abs(res)) <= 1e-10


def test_bad_interval():
    with pytest.raises(DomainError):
        solve_nonlinear_ode(RICCATI, lambda t: -np.ones_like(t), 1.0, 1.0, (0.0,))


def test_kummer_needs_positive_slope():
    with pytest.raises(DomainError):
        solve_nonlinear_ode(KUMMER, lambda t: np.ones_like(t), 0.0, 1.0, (-1.0, 0.0))


def test_node_residual_finite_where_terms_vanish():
    # sigma' = x^2 solves sigma'' + sigma'^2 + Q = 0 with Q = -(2x + x^4);
    # every term is zero at x = 0, where the pointwise ratio is 0/0
    breaks = np.array([0.0, 0.5, 1.0])
    x = PiecewiseCheb(breaks, np.zeros((2, 16))).nodes()
    y = PiecewiseCheb.from_node_values(breaks, x**2)
    Q = lambda t: -(2.0 * t + t**4)  # noqa: E731
    with np.errstate(invalid="ignore", divide="ignore"):
        pointwise = np.abs(RICCATI.residual(Q(x), y(x), y.diff()(x)))
    assert not np.nanmax(pointwise) <= 1.0
    res = RICCATI.node_residual(Q, y, y.diff())
    assert res.shape == x.shape
    assert np.max(res) <= 1e-13
