import math

import numpy as np
import pytest
from scipy import special as sp

from helmrad.errors import DomainError, UnsupportedPotentialError
from helmrad.oracle import rsq_closed_form, square_shell_closed_form, zero_closed_form
from helmrad.pbessel import (
    XI_LEFT,
    NormalFormQ,
    PotentialSpec,
    build_partition,
    eval_mode,
    mode_residual,
    seed_values,
    solve_mode,
    zero_potential,
)
from helmrad.potentials import named_potential


def constant_potential(value, R):
    return PotentialSpec(lambda r: np.full(np.shape(r), float(value)), R)


def test_partition_no_turning_points():
    assert build_partition(NormalFormQ(64.0, 0, zero_potential(2.0))) == [XI_LEFT, 2.0]


def test_partition_rsq_turning_point():
    k = 256.0
    part = build_partition(NormalFormQ(k, 256, named_potential("rsq")))
    assert len(part) == 3
    assert part[1] == pytest.approx(((256**2 - 0.25) / k**2) ** 0.25, rel=1e-12)


def test_partition_keeps_discontinuity():
    assert build_partition(NormalFormQ(16.0, 0, named_potential("square_shell"))) == [XI_LEFT, 1.0, 2.0]


def test_seed_leading_behaviour():
    s = seed_values(NormalFormQ(1.0, 0, zero_potential()))
    assert s.phi * math.exp(s.log_scale) == pytest.approx(math.sqrt(XI_LEFT), rel=1e-12)
    s = seed_values(NormalFormQ(1.0, 2, zero_potential()))
    assert s.dphi / s.phi == pytest.approx(2.5 / XI_LEFT, rel=1e-12)


def test_seed_huge_order_stays_finite():
    s = seed_values(NormalFormQ(16.0, 100_000, zero_potential()))
    assert math.isfinite(s.log_scale) and s.log_scale < -1e6


def test_wavenumber_inside_uses_q0():
    # q = 1 throughout: psi_n is J_n(k sqrt(2) r)
    k, n, R = 10.0, 3, 1.5
    ms = solve_mode(NormalFormQ(k, n, constant_potential(1.0, R)))
    c = k * math.sqrt(2.0)
    r = np.linspace(0.1, R, 50)
    ref = sp.jv(n, c * r)
    ref = ref / max(abs(sp.jv(n, c * R)), abs(sp.jvp(n, c * R)) * c / k)
    psi, _ = eval_mode(ms, r)
    assert np.max(np.abs(psi - ref * np.sign(ref[-1] * psi[-1]))) <= 1e-11


def test_bessel_mode():
    k = 256.0
    ms = solve_mode(NormalFormQ(k, 0, zero_potential(2.0)))
    r = np.linspace(0.1, 2.0, 100)
    psi, dpsi = eval_mode(ms, r)
    ref, dref = zero_closed_form(k, 0, r, 2.0)
    assert np.max(np.abs(psi - ref)) <= 1e-11 * np.max(np.abs(ref))


@pytest.mark.parametrize("n", [0, 512, 1024])
def test_rsq_mode(n):
    k = 1024.0
    ms = solve_mode(NormalFormQ(k, n, named_potential("rsq")))
    r = np.linspace(2.0 / 100, 2.0, 100)
    psi, dpsi = eval_mode(ms, r)
    ref, dref = rsq_closed_form(k, n, r)
    assert np.max(np.abs(psi - ref)) <= 1e-9
    assert np.max(np.abs(dpsi - dref)) <= 1e-9 * k


def test_square_shell_mode():
    k = 256.0
    r = np.linspace(0.02, 2.0, 100)
    for n in (0, 100, 300):
        ms = solve_mode(NormalFormQ(k, n, named_potential("square_shell")))
        ref, _ = square_shell_closed_form(k, n, r)
        assert np.max(np.abs(eval_mode(ms, r)[0] - ref)) <= 1e-9


def test_eval_at_R_returns_stored():
    ms = solve_mode(NormalFormQ(32.0, 5, named_potential("gaussian")))
    psi, dpsi = eval_mode(ms, ms.R)
    assert psi == ms.psi_R and dpsi == ms.dpsi_R
    assert max(abs(ms.psi_R), abs(ms.dpsi_R) / 32.0) == pytest.approx(1.0, rel=1e-15)


def test_eval_bessel_point():
    k = 64.0
    ms = solve_mode(NormalFormQ(k, 0, zero_potential(2.0)))
    ref, _ = zero_closed_form(k, 0, np.array([0.5]), 2.0)
    assert abs(eval_mode(ms, 0.5)[0] - ref[0]) <= 1e-11


def test_deep_evanescence_underflows_to_zero():
    ms = solve_mode(NormalFormQ(4.0, 2000, zero_potential(2.0)))
    psi, dpsi = eval_mode(ms, 1e-3)
    assert psi == 0.0 and dpsi == 0.0
    assert np.isfinite(ms.psi_R)


def test_eval_outside_raises():
    ms = solve_mode(NormalFormQ(8.0, 1, zero_potential(1.0)))
    with pytest.raises(DomainError):
        eval_mode(ms, 1.5)


def test_continuity_and_residual():
    rng = np.random.default_rng(11)
    for name, k, n in [("rsq", 512.0, 256), ("square_shell", 128.0, 200), ("discont", 64.0, 90), ("volcano", 64.0, 40)]:
        nf = NormalFormQ(k, n, named_potential(name))
        ms = solve_mode(nf)
        for jump_phi, jump_dphi in ms.interface_jumps():
            assert jump_phi <= 1e-10 and jump_dphi <= 1e-10
        P = ms.partition
        r = np.concatenate([a + (b - a) * rng.random(20) for a, b in zip(P[:-1], P[1:])])
        assert np.max(mode_residual(ms, nf, r)) <= 1e-10


def test_mode_is_real():
    ms = solve_mode(NormalFormQ(40.0, 3, named_potential("volcano")))
    psi, _ = eval_mode(ms, np.linspace(0.1, 4.0, 20))
    assert psi.dtype.kind == "f"


def test_piece_count_grows_slowly():
    pot = named_potential("rsq")
    counts = [solve_mode(NormalFormQ(2.0**p, 2**p, pot)).piece_count for p in (8, 10, 12)]
    # at most C log k: the ratio of log k over this range is 1.5
    assert counts[-1] <= 1.5 * counts[0]


def test_unsupported_potential():
    with pytest.raises(UnsupportedPotentialError):
        solve_mode(NormalFormQ(8.0, 0, constant_potential(-2.0, 1.0)))


def test_potential_validation():
    with pytest.raises(DomainError):
        PotentialSpec(lambda r: r, 1.0, singular_points=(0.5, 0.2))
    with pytest.raises(DomainError):
        PotentialSpec(lambda r: r, 1.0, singular_points=(1.5,))
    with pytest.raises(DomainError):
        NormalFormQ(-1.0, 0, zero_potential())
    with pytest.raises(DomainError):
        NormalFormQ(1.0, 1.5, zero_potential())
