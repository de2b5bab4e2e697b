import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

import oracles
from rdkernel import specfun
from rdkernel.errors import DomainError, RangeError
from rdkernel.specfun import (
    bessel_i0,
    bessel_i0e,
    bessel_i1,
    bessel_i1e,
    bessel_j0,
    bessel_j1,
    bessel_j1_over_x,
)


def test_j0_reference_values():
    assert bessel_j0(0.0) == 1.0
    assert abs(bessel_j0(2.4048255576957728)) < 1e-10
    assert bessel_j0(1.0) == pytest.approx(0.7651976865579666, abs=1e-15)


def test_j1_reference_values():
    assert bessel_j1(0.0) == 0.0
    assert bessel_j1(1.0) == pytest.approx(0.4400505857449335, abs=1e-15)
    assert bessel_j1(1e-6) == pytest.approx(5e-7, rel=1e-12)


def test_i_reference_values():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i1(0.0) == 0.0
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-15)
    assert bessel_i1(1.0) == pytest.approx(0.5651591039924850, rel=1e-15)


@pytest.mark.parametrize("x", [0.3, 1.0, 4.9, 5.1, 7.5, 12.0, 24.9, 25.1, 40.0, 80.0])
def test_against_mpmath_across_regions(x):
    assert bessel_j0(x) == pytest.approx(oracles.j0(x), abs=2e-15)
    assert bessel_j1(x) == pytest.approx(oracles.j1(x), abs=2e-15)
    assert bessel_j1_over_x(x) == pytest.approx(2 * oracles.j1(x) / x, abs=2e-15)


@pytest.mark.parametrize("x", [0.5, 3.0, 29.0, 31.0, 100.0, 600.0])
def test_modified_against_mpmath(x):
    assert bessel_i0e(x) == pytest.approx(oracles.i0(x) * math.exp(-x), rel=1e-13)
    assert bessel_i1e(x) == pytest.approx(oracles.i1(x) * math.exp(-x), rel=1e-13)


def test_random_battery_bounds_and_parity():
    x = np.random.default_rng(1).uniform(-50, 50, 10_000)
    j0, j1 = bessel_j0(x), bessel_j1(x)
    assert np.all(np.abs(j0) <= 1) and np.all(np.abs(j1) <= 1)
    ax = np.abs(x)
    i0, i1 = bessel_i0(ax), bessel_i1(ax)
    assert np.all(i1 < i0) and np.all(i0 <= np.exp(ax))
    assert np.max(np.abs(bessel_j0(-x) - j0)) < 1e-13
    assert np.max(np.abs(bessel_j1(-x) + j1)) < 1e-13
    assert np.max(np.abs(bessel_i1e(-x) + bessel_i1e(x))) < 1e-13


def test_matches_scipy_on_dense_grid():
    x = np.linspace(0, 60, 6001)
    assert np.max(np.abs(bessel_j0(x) - special.j0(x))) < 5e-15
    assert np.max(np.abs(bessel_j1(x) - special.j1(x))) < 5e-15
    # relative error is only meaningful away from the zeros
    big = np.abs(special.j1(x)) > 1e-3
    assert np.max(np.abs(bessel_j1(x[big]) / special.j1(x[big]) - 1)) < 1e-11


def test_derivative_relation():
    # J0' = -J1; central difference error is O(h^2)
    x = np.linspace(0.5, 40, 50)
    errs = []
    for h in (1e-2, 5e-3):
        d = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
        errs.append(np.max(np.abs(d + bessel_j1(x))))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


@given(st.floats(-200, 200, allow_nan=False))
def test_j1x_consistent_with_j1(x):
    if abs(x) > 1e-3:
        assert bessel_j1_over_x(x) == pytest.approx(2 * bessel_j1(x) / x, abs=1e-14)
    assert abs(bessel_j1_over_x(x)) <= 1 + 1e-15


@given(st.floats(0, 60, allow_nan=False))
def test_pair_kernel_matches_public(x):
    j0, jx = specfun.j0_j1x_scalar(x)
    assert j0 == pytest.approx(bessel_j0(x), abs=1e-15)
    assert jx == pytest.approx(bessel_j1_over_x(x), abs=1e-15)


@pytest.mark.parametrize("name", sorted(specfun.NUMBA_IMPLS))
def test_backends_agree(name):
    x = np.random.default_rng(2).uniform(-80, 80, 5000)
    a = specfun.NUMBA_IMPLS[name](x)
    b = specfun.NUMPY_IMPLS[name](x)
    assert np.max(np.abs(a - b)) < 1e-14


def test_errors():
    with pytest.raises(DomainError):
        bessel_j0(float("nan"))
    with pytest.raises(RangeError):
        bessel_i0(800.0)
    assert np.isfinite(bessel_i0e(800.0))


def test_array_shape_preserved():
    x = np.linspace(0, 3, 12).reshape(3, 4)
    assert bessel_j0(x).shape == (3, 4)
    assert isinstance(bessel_j0(1.0), float)
