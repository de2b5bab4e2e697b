import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from rdkernel import tables
from rdkernel.convolve import Field, Grid, TimeSlab, spacetime_convolve, spatial_convolve, time_weights
from rdkernel.errors import DomainError, InputError
from rdkernel.kernels import ABS_MASS_BOUNDS
from rdkernel.model import ModelParams, chi, chi_integral, mass_K2_exact, mass_K_exact, mass_K_integral

UNIT = ModelParams(1, 1, 1, 1)
GRID = Grid.from_spacing(-5, 5, 0.1)


def test_grid_and_field_validation():
    assert GRID.n == 101 and GRID.dx == pytest.approx(0.1)
    with pytest.raises(DomainError):
        Grid(0, 1, 2)
    with pytest.raises(InputError):
        Field(GRID, 0.0, np.zeros(5))
    with pytest.raises(InputError):
        Field(GRID, 0.0, np.full(GRID.n, np.nan))
    with pytest.raises(DomainError):
        TimeSlab(1.0, 1.0, 2)


@pytest.mark.parametrize("n", range(1, 12))
def test_time_weights_integrate_cubics(n):
    w = time_weights(n)
    s = np.arange(n + 1)
    assert w.sum() == pytest.approx(n)
    if n >= 2:
        assert w @ s ** 3 == pytest.approx(n ** 4 / 4, rel=1e-12)


@pytest.mark.parametrize("p", [UNIT, ModelParams(1, 0.5, 3, 1), ModelParams(2, 0.5, 2, 0.5), ModelParams(1, 0, 2, 1)])
@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_constant_data_gives_masses(p, t):
    one = lambda x: np.ones_like(x)
    for which, exact in (("K", mass_K_exact), ("K1", chi), ("K2", mass_K2_exact)):
        out = spatial_convolve(one, which, t, GRID, p)
        assert np.max(np.abs(out.values - exact(t, p))) < 1e-6


def test_gaussian_heat_identity():
    p = ModelParams(0.6, 0, 1, 0.7)
    s2, t = 0.5, 0.8
    g = lambda x: np.exp(-x * x / (2 * s2)) / math.sqrt(2 * math.pi * s2)
    ref = np.array([oracles.heat_gaussian(x, t, s2, p.eps, p.a) for x in GRID.x])
    errs = [np.max(np.abs(spatial_convolve(g, "K", t, GRID, p, refine=r).values - ref)) for r in (2, 4, 20)]
    # sampled data are piecewise linear: second order in the sampling step
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
    assert errs[2] < 1e-6


def test_field_input_edge_extended():
    f = Field(GRID, 0.0, np.ones(GRID.n))
    out = spatial_convolve(f, "K1", 1.0, GRID, UNIT)
    assert np.allclose(out.values, chi(1.0, UNIT), atol=1e-6)


def test_linearity_and_translation():
    g1 = np.exp(-GRID.x ** 2)
    g2 = np.sin(GRID.x) * np.exp(-0.2 * GRID.x ** 2)
    c = lambda v: spatial_convolve(Field(GRID, 0, v), "K", 0.5, GRID, UNIT).values
    assert np.max(np.abs(c(2.5 * g1 + g2) - (2.5 * c(g1) + c(g2)))) < 1e-10
    shifted = np.roll(g1, 1)
    shifted[0] = 0.0
    d = c(shifted)[1:] - c(g1)[:-1]
    assert np.max(np.abs(d[20:-20])) < 1e-10


@settings(max_examples=15)
@given(st.floats(0.05, 4), st.sampled_from(["K", "K1", "K2"]), st.integers(0, 10_000))
def test_magnitude_bounded_by_abs_mass(t, which, seed):
    vals = np.random.default_rng(seed).uniform(-1, 1, GRID.n)
    out = spatial_convolve(Field(GRID, 0, vals), which, t, GRID, UNIT)
    assert out.sup <= np.max(np.abs(vals)) * ABS_MASS_BOUNDS[which](t, UNIT) + 1e-8


def test_spacetime_examples():
    zero = spacetime_convolve(lambda x, t: np.zeros_like(x), "K", 1.0, GRID, UNIT)
    assert np.all(zero.values == 0)
    one = spacetime_convolve(lambda x, t: np.ones_like(x), "K", 1.0, GRID, UNIT)
    assert np.max(np.abs(one.values - mass_K_integral(1.0, UNIT))) < 1e-6
    three = spacetime_convolve(lambda x, t: np.full_like(x, 3.0), "K1", 2.0, GRID, ModelParams(1, 0.5, 3, 1))
    assert np.max(np.abs(three.values - 3 * chi_integral(2.0, ModelParams(1, 0.5, 3, 1)))) < 1e-6


def test_spacetime_reduces_memory_source_to_K1():
    # K convolved in space-time with v0(x) exp(-beta tau) equals v0 * K1
    p = ModelParams(1, 1, 2, 1)
    v0 = lambda x: np.exp(-x * x)
    lhs = spacetime_convolve(lambda x, t: v0(x) * math.exp(-p.beta * t), "K", 1.0, GRID, p, dt_max=0.01)
    rhs = spatial_convolve(v0, "K1", 1.0, GRID, p)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-6


def test_errors():
    with pytest.raises(DomainError):
        spatial_convolve(np.ones, "K3", 1.0, GRID, UNIT)
    with pytest.raises(DomainError):
        spatial_convolve(np.ones_like, "K", 0.0, GRID, UNIT)
    with pytest.raises(InputError):
        spatial_convolve(lambda x: np.where(x > 0, np.inf, 0.0), "K", 1.0, GRID, UNIT)


def test_table_backends_agree():
    lags = np.array([0.0, 0.01, 0.3, 2.0])
    for p in (UNIT, ModelParams(2, 0.5, 2, 0.5)):
        nb = tables.hat_tables(lags, 80, 0.05, p, backend="numba")
        npy = tables.hat_tables(lags, 80, 0.05, p, backend="numpy")
        for a, b in zip(nb, npy):
            assert np.max(np.abs(a - b)) < 1e-13


def test_table_rows_sum_to_masses():
    t = 0.7
    wk, wk1, wk2 = tables.hat_tables(np.array([t]), 200, 0.05, UNIT)
    total = lambda row: row[0] + 2 * row[1:].sum()
    assert total(wk[0]) == pytest.approx(mass_K_exact(t, UNIT), abs=1e-9)
    assert total(wk1[0]) == pytest.approx(chi(t, UNIT), abs=1e-9)
    assert total(wk2[0]) == pytest.approx(mass_K2_exact(t, UNIT), abs=1e-9)
