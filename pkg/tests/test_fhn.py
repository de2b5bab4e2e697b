import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rdkernel.convolve import Grid
from rdkernel.errors import DomainError
from rdkernel.fhn import (
    FHNParams,
    cubic_f,
    fhn_apriori_bounds,
    front_positions,
    front_speed,
    lipschitz_phi,
    phi_reaction,
    phi_reaction_slope,
    solve_fhn,
    steady_states,
    traveling_wave,
    wave_profile,
    wave_residual,
)
from rdkernel.model import beta0, beta1
from rdkernel.solver import SolverConfig


def test_params_need_excitable_threshold():
    with pytest.raises(DomainError):
        FHNParams.of(1.2, 0.1, 1, 1)
    with pytest.raises(DomainError):
        FHNParams.of(0.0, 0.1, 1, 1)


def test_cubic_roots_and_value():
    fp = FHNParams.of(0.25, 0.1, 1, 1)
    for r in (0.0, 0.25, 1.0):
        assert cubic_f(r, fp) == 0.0
    assert cubic_f(0.5, fp) == pytest.approx(0.0625)


@given(st.floats(-5, 5), st.floats(0.01, 0.99))
def test_kinetics_split(u, a):
    fp = FHNParams.of(a, 0.1, 1, 1)
    assert cubic_f(u, fp) == pytest.approx(-a * u + phi_reaction(u, fp), abs=1e-12 * (1 + abs(u)) ** 3)


def test_phi_slope_is_derivative():
    fp = FHNParams.of(0.3, 0.1, 1, 1)
    u = np.linspace(-2, 3, 41)
    h = 1e-6
    fd = (phi_reaction(u + h, fp) - phi_reaction(u - h, fp)) / (2 * h)
    assert np.allclose(fd, phi_reaction_slope(u, fp), atol=1e-6)


def test_steady_state_examples():
    s = steady_states(FHNParams.of(0.25, 1, 10, 1))
    assert s.regime == "tri"
    assert s.u_A == pytest.approx((1.25 - math.sqrt(0.1625)) / 2, rel=1e-14)
    assert s.u_A == pytest.approx(0.4234436, abs=1e-7)
    assert s.u_B == pytest.approx(0.8265564, abs=1e-7)
    assert s.v_A == pytest.approx(0.1 * s.u_A) and s.v_B == pytest.approx(0.1 * s.u_B)
    assert steady_states(FHNParams.of(0.25, 1, 1, 1)).regime == "mono"
    s0 = steady_states(FHNParams.of(0.3, 0, 1, 1))
    assert (s0.u_A, s0.u_B, s0.v_A, s0.v_B) == pytest.approx((0.3, 1.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        steady_states(FHNParams.of(0.3, 0.1, 0, 1))


def test_discriminant_zero_boundary():
    # (1 - a)^2 = 4 b / beta exactly: u_A = u_B
    s = steady_states(FHNParams.of(0.5, 0.0625, 1, 1))
    assert s.regime == "tri" and s.u_A == s.u_B


@given(st.floats(0.01, 0.99), st.floats(0, 0.2), st.floats(0.5, 10))
def test_steady_states_lie_on_nullclines(a, b, beta):
    fp = FHNParams.of(a, b, beta, 1)
    s = steady_states(fp)
    if s.regime == "mono":
        assert (1 - a) ** 2 < 4 * b / beta
        return
    assert s.u_A <= s.u_B
    for u, v in ((s.u_A, s.v_A), (s.u_B, s.v_B)):
        assert abs(cubic_f(u, fp) - v) < 1e-12
        assert abs(b * u - beta * v) < 1e-12


def test_traveling_wave_examples():
    fp = FHNParams.of(0.25, 0, 1, 0.5)
    tw = traveling_wave(fp)
    assert tw.gamma == pytest.approx(1.0) and tw.c == pytest.approx(0.25)
    assert wave_profile(0.0, tw) == 0.5
    assert np.max(np.abs(wave_residual(np.array([-2.0, 0.0, 2.0]), fp))) < 1e-10
    z = np.linspace(-800, 800, 1001)
    prof = wave_profile(z, tw)
    assert np.all(np.diff(prof) <= 0) and prof[0] == 1.0 and prof[-1] == 0.0
    assert traveling_wave(FHNParams.of(0.7, 0, 1, 1)).c < 0


def test_wave_warns_off_exact_case():
    with pytest.warns(RuntimeWarning):
        traveling_wave(FHNParams.of(0.25, 0.01, 1, 1))


def test_apriori_pair_examples():
    fp = FHNParams.of(0.25, 0.5, 2, 1)
    bu, bv = fhn_apriori_bounds(0, 0, 0.3, fp, 1.7)
    assert bu == pytest.approx(beta0(fp.base) * 0.3) and bv == pytest.approx(0.5 * beta1(fp.base) * 0.3)
    fp0 = FHNParams.of(0.25, 0, 2, 1)
    assert fhn_apriori_bounds(1, 0, 0, fp0, 2.0) == pytest.approx((math.exp(-0.5), 0.0))
    # a = beta = b = 1 lies outside the excitable range; the formula itself does not need it
    fp1 = FHNParams.__new__(FHNParams)
    object.__setattr__(fp1, "base", FHNParams.of(0.5, 1, 1, 1).base.__class__(1, 1, 1, 1))
    bu, _ = fhn_apriori_bounds(1, 1, 0.5, fp1, 1.0)
    assert bu == pytest.approx((1 + math.pi) * math.exp(-1) + math.exp(-1) + 0.5 * (1 + math.pi), rel=1e-14)
    assert bu == pytest.approx(3.9623, abs=1e-4)


def test_lipschitz_range():
    fp = FHNParams.of(0.25, 0.05, 0.5, 1)
    cf, (lo, hi) = lipschitz_phi(1.0, 0.2, fp)
    assert (lo, hi) == pytest.approx((-1.5, 2.5))
    u = np.linspace(lo, hi, 10001)
    assert cf == pytest.approx(np.max(np.abs(phi_reaction_slope(u, fp))), rel=1e-6)


def test_zero_data_stays_zero():
    fp = FHNParams.of(0.25, 0.05, 0.5, 1)
    cfg = SolverConfig(Grid.from_spacing(-5, 5, 0.1), T=0.5)
    run = solve_fhn(lambda x: np.zeros_like(x), lambda x: np.zeros_like(x), fp, cfg)
    assert np.all(run.u == 0) and np.all(run.v == 0)


def test_steady_state_persists():
    fp = FHNParams.of(0.25, 0.05, 0.5, 1)
    s = steady_states(fp)
    cfg = SolverConfig(Grid.from_spacing(-5, 5, 0.1), T=1.0, fixpoint_tol=1e-12)
    run = solve_fhn(lambda x: np.full_like(x, s.u_B), lambda x: np.full_like(x, s.v_B), fp, cfg)
    assert np.max(np.abs(run.u - s.u_B)) < 1e-8
    assert np.max(np.abs(run.v - s.v_B)) < 1e-8


def test_pulse_routes_and_bounds():
    fp = FHNParams.of(0.25, 0.05, 0.5, 1)
    cfg = SolverConfig(Grid.from_spacing(-15, 15, 0.1), T=1.0)
    u0 = lambda x: 0.6 * np.exp(-x * x)
    v0 = lambda x: 0.1 * np.exp(-x * x)
    run = solve_fhn(u0, v0, fp, cfg)
    assert run.route_discrepancy < 1e-5
    phi_sup = float(np.max(np.abs(phi_reaction(run.u, fp))))
    bu, bv = fhn_apriori_bounds(0.6, 0.1, phi_sup, fp, run.times)
    assert np.all(np.max(np.abs(run.u), axis=1) <= bu + 1e-8)
    assert np.all(np.max(np.abs(run.v), axis=1) <= bv + 1e-8)
    assert len(run.states) == len(run.times)


def test_front_tracking():
    tw = traveling_wave(FHNParams.of(0.25, 0, 1, 0.5))
    x = np.linspace(-10, 10, 2001)
    times = np.linspace(0, 2, 5)
    rows = np.array([wave_profile(x - tw.c * t, tw) for t in times])
    pos = front_positions(x, rows)
    assert np.allclose(pos, tw.c * times, atol=1e-4)
    assert front_speed(times, pos) == pytest.approx(tw.c, rel=1e-4)
    with pytest.raises(DomainError):
        front_speed([0.0], [0.0])
