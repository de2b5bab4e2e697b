import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

import oracles
from rdkernel import kernels
from rdkernel.errors import DomainError
from rdkernel.kernels import (
    abs_mass_bound_K,
    abs_mass_bound_K_envelope,
    abs_mass_bound_K_relaxed,
    kernel_bound,
    kernel_K,
    kernel_K1,
    kernel_K2,
    kernel_values,
    pde_residual,
    phi,
    psi,
)
from rdkernel.model import ModelParams, decay_E, mass_K_exact
from rdkernel.specfun import bessel_j1

UNIT = ModelParams(1, 1, 1, 1)


def test_psi_examples():
    assert psi(0.0, 1.0, ModelParams(0, 0, 1, 1)) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-15)
    assert psi(0.0, 1.0, ModelParams(1, 0, 1, 1)) == pytest.approx(0.1037768743551487, rel=1e-14)
    val, _ = quad(lambda x: psi(x, 0.7, ModelParams(0.4, 0, 1, 2)), -np.inf, np.inf)
    assert val == pytest.approx(math.exp(-0.28), rel=1e-10)
    with pytest.raises(DomainError):
        psi(0.0, 0.0, UNIT)


def test_phi_examples():
    assert phi(0.5, 1.0, ModelParams(1, 0, 1, 1)) == 0.0
    assert phi(1.0, 2.0, ModelParams(1, 1, 0, 1)) == pytest.approx(bessel_j1(2.0), rel=1e-14)
    assert phi(1.0, 2.0, ModelParams(1, 1, 0, 1)) == pytest.approx(0.5767248077568734, rel=1e-14)
    # limit y -> t is b y
    assert phi(2.0 - 1e-10, 2.0, ModelParams(1, 1.5, 1, 1)) == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(DomainError):
        phi(1.0, 1.0, UNIT)


@pytest.mark.parametrize("x,t", [(0.0, 1.0), (0.3, 0.2), (1.7, 2.5), (-4.0, 3.0)])
def test_b_zero_reduces_to_psi(x, t):
    p = ModelParams(0.7, 0, 1.3, 0.8)
    assert kernel_K(x, t, p).value == psi(x, t, p)
    assert kernel_K(x, t, p).error_estimate == 0.0
    assert kernel_bound(x, t, p) == pytest.approx(psi(x, t, p), rel=1e-15)


def test_K_pinned_value():
    # cross-checked against the mpmath oracle and the Laplace identity
    v = kernel_K(0.0, 1.0, UNIT)
    assert v.value == pytest.approx(0.04032627577544785, rel=1e-10)
    assert 0 < v.value <= 0.1037769
    assert v.value <= kernel_bound(0.0, 1.0, UNIT)


def test_K1_b_zero_analytic():
    assert kernel_K1(0.0, 1.0, ModelParams(0, 0, 0, 1)).value == pytest.approx(1 / math.sqrt(math.pi), rel=1e-11)


def test_small_time_vanishing():
    assert abs(kernel_K1(0.5, 1e-6, UNIT).value) < 1e-12
    assert abs(kernel_K2(0.5, 1e-6, UNIT).value) < 1e-12
    assert abs(kernel_K2(0.0, 1e-8, UNIT).value) < 1e-7


ORACLE_POINTS = [(0.0, 1.0), (0.5, 1.0), (1.3, 0.4), (2.0, 3.0), (0.1, 0.05)]


@pytest.mark.parametrize("p", [UNIT, ModelParams(1, 2, 0.5, 1), ModelParams(2, 1, 3, 0.25), ModelParams(1, 0.5, 3, 1)])
@pytest.mark.parametrize("kind", ["K", "K1", "K2"])
def test_against_mpmath(kind, p):
    for x, t in ORACLE_POINTS:
        got = kernel_values(x, t, p, (kind,))[0][kind]
        ref = oracles.kernel(kind, x, t, p)
        assert float(got) == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_vector_and_scalar_agree():
    xs = np.array([0.0, 0.5, 2.0])
    ts = np.array([1.0, 0.5, 3.0])
    vals, err = kernel_values(xs, ts, UNIT)
    for i in range(3):
        assert vals["K1"][i] == pytest.approx(kernel_K1(xs[i], ts[i], UNIT).value, rel=1e-10)
    assert err >= 0


def test_weights_keep_values():
    xs = np.array([0.2, 0.2, 0.2])
    ts = np.array([0.5, 5.0, 20.0])
    plain, _ = kernel_values(xs, ts, UNIT, ("K",))
    scaled, _ = kernel_values(xs, ts, UNIT, ("K",), weights=np.exp(0.9 * ts))
    assert np.allclose(plain["K"], scaled["K"], rtol=1e-8, atol=1e-14)


def test_time_convolution_identities():
    x, t = 0.5, 1.0
    k1 = quad(lambda s: math.exp(-(t - s)) * kernel_K(x, s, UNIT).value, 0, t, epsabs=1e-12, epsrel=1e-11)[0]
    k2 = quad(lambda s: math.exp(-(t - s)) * kernel_K1(x, s, UNIT).value, 0, t, epsabs=1e-12, epsrel=1e-11)[0]
    assert k1 == pytest.approx(kernel_K1(x, t, UNIT).value, abs=1e-6)
    assert k2 == pytest.approx(kernel_K2(x, t, UNIT).value, abs=1e-6)


def test_mass_of_K_matches_closed_form():
    val = quad(lambda x: kernel_K(x, 0.5, UNIT).value, -12, 12, epsabs=1e-11, limit=200)[0]
    assert val == pytest.approx(mass_K_exact(0.5, UNIT), abs=1e-6)


def test_bound_examples():
    p = ModelParams(1, 1, 2, 1)
    expected = (math.exp(-1) + decay_E(1.0, p)) / (2 * math.sqrt(math.pi))
    assert kernel_bound(0.0, 1.0, p) == pytest.approx(expected, rel=1e-14)
    assert kernel_bound(0.0, 1.0, p) == pytest.approx(0.169376, abs=1e-6)
    xs = np.linspace(0, 5, 50)
    assert np.all(np.diff(kernel_bound(xs, 1.0, p)) < 0)


def test_abs_mass_examples():
    assert abs_mass_bound_K(1.0, ModelParams(1, 0, 2, 1)) == pytest.approx(math.exp(-1))
    assert abs_mass_bound_K(1.0, UNIT) == pytest.approx(math.exp(-1) * (1 + math.pi), rel=1e-14)
    assert abs_mass_bound_K(1.0, UNIT) == pytest.approx(1.5236067909623, abs=1e-12)
    assert abs_mass_bound_K_relaxed(1.0, UNIT) == pytest.approx(abs_mass_bound_K(1.0, UNIT), rel=1e-15)


@settings(max_examples=60)
@given(st.floats(0.1, 3), st.floats(0, 3), st.floats(0.1, 3), st.floats(0.01, 20))
def test_abs_mass_bound_chain(a, b, beta, t):
    p = ModelParams(a, b, beta, 1)
    full = abs_mass_bound_K(t, p)
    relaxed = abs_mass_bound_K_relaxed(t, p)
    env = abs_mass_bound_K_envelope(t, p)
    assert full <= relaxed * (1 + 1e-12) and relaxed <= env * (1 + 1e-12)


@settings(max_examples=25)
@given(st.floats(-4, 4), st.floats(0.02, 6), st.sampled_from([UNIT, ModelParams(1, 2, 0.5, 1), ModelParams(2, 0.5, 2, 0.5)]))
def test_pointwise_bound(x, t, p):
    vals, err = kernel_values(x, t, p)
    assert abs(float(vals["K"])) <= kernel_bound(x, t, p) + 1e-9 + err


def test_residual_second_order_off_origin():
    r1, k = pde_residual(0.7, 0.8, UNIT, 1e-2)
    r2, _ = pde_residual(0.7, 0.8, UNIT, 5e-3)
    assert r1 / r2 == pytest.approx(4, rel=0.1)
    r3, k = pde_residual(0.7, 0.8, UNIT, 1e-3)
    assert abs(r3) / abs(k) < 1e-5


def test_residual_heat_case():
    p = ModelParams(1, 0, 1, 1)
    r1, _ = pde_residual(0.4, 1.0, p, 1e-2)
    r2, _ = pde_residual(0.4, 1.0, p, 5e-3)
    assert r1 / r2 == pytest.approx(4, rel=0.05)
    with pytest.raises(DomainError):
        pde_residual(0.0, 0.01, p, 0.01)


def test_memory_backends_agree():
    u = np.linspace(0, 1, 257)
    x = np.array([0.0, 0.3, 2.0, -1.0])
    t = np.array([1.0, 0.2, 3.0, 7.0])
    for p in (UNIT, ModelParams(2, 0.5, 2, 0.5)):
        a = kernels.memory_integrand(x, t, p, backend="numba")(u)
        b = kernels.memory_integrand(x, t, p, backend="numpy")(u)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-15)


def test_domain_errors():
    with pytest.raises(DomainError):
        kernel_K(float("nan"), 1.0, UNIT)
    with pytest.raises(DomainError):
        kernel_K1(0.0, -1.0, UNIT)
    with pytest.raises(DomainError):
        kernels.KernelPoint(0.0, 0.0)
