"""Whole-line spatial and space-time convolutions with K, K1, K2 on uniform grids.

Gridded data are treated as piecewise linear and convolved with exact hat
weights (see :mod:`rdkernel.tables`) through zero-padded real FFTs.  Fields are
extended beyond the grid by their edge values; callables are sampled on the
extended grid instead.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import fft as sfft

from .errors import DomainError, InputError
from .tables import TableRule, full_stencil, hat_tables, truncation_radius

KIND_INDEX = {"K": 0, "K1": 1, "K2": 2}


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("grid needs n >= 3")
        if not self.x_max > self.x_min:
            raise DomainError("grid needs x_max > x_min")

    @classmethod
    def from_spacing(cls, x_min, x_max, dx):
        n = int(round((x_max - x_min) / dx)) + 1
        return cls(x_min, x_min + (n - 1) * dx, n)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n)

    def padded_x(self, M):
        return self.x_min + self.dx * np.arange(-M, self.n + M)

    def refined(self, factor):
        return Grid(self.x_min, self.x_max, (self.n - 1) * factor + 1)


@dataclass
class Field:
    grid: Grid
    t: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise InputError(f"field has {self.values.shape} values, grid has {self.grid.n}")
        if not np.all(np.isfinite(self.values)):
            raise InputError("field values must be finite")

    @property
    def sup(self):
        return float(np.max(np.abs(self.values)))


@dataclass
class TimeSlab:
    t0: float
    t1: float
    n_t: int
    fields: list = field(default_factory=list)

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise DomainError("slab needs t1 > t0")
        if len(self.fields) not in (0, self.n_t):
            raise InputError("slab field count does not match n_t")

    @property
    def times(self):
        return np.linspace(self.t0, self.t1, self.n_t)

    @property
    def values(self):
        return np.array([f.values for f in self.fields])

    @property
    def grid(self):
        return self.fields[0].grid


def time_weights(n):
    """Quadrature weights (unit step) on n + 1 equispaced nodes.

    End-corrected trapezoid for n >= 5 (fourth order), composite Simpson for
    n = 2 and 4, three-eighths rule for n = 3, trapezoid for n = 1.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return np.zeros(1)
    if n == 1:
        return np.array([0.5, 0.5])
    if n == 2:
        return np.array([1.0, 4.0, 1.0]) / 3.0
    if n == 3:
        return np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    if n == 4:
        return np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 3.0
    w = np.ones(n + 1)
    ends = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])
    w[:3] = ends
    w[-3:] = ends[::-1]
    return w


class ConvolutionPlan:
    """Cached kernel spectra for one grid, one parameter set and lags ``k * dt``.

    ``pad`` turns data into the extended grid of ``n + 2M`` points;
    ``convolve`` returns the n interior values of the whole-line convolution.
    """

    def __init__(self, grid, p, dt, n_lags, kinds=("K",), rule=TableRule(), M=None):
        if not dt > 0 or n_lags < 0:
            raise DomainError("need dt > 0 and n_lags >= 0")
        self.grid = grid
        self.p = p
        self.dt = float(dt)
        self.n_lags = int(n_lags)
        self.lags = self.dt * np.arange(self.n_lags + 1)
        if M is None:
            M = max(1, math.ceil(truncation_radius(self.lags[-1], p.eps) / grid.dx))
        self.M = int(M)
        self.n_pad = grid.n + 2 * self.M
        self.nfft = sfft.next_fast_len(grid.n + 4 * self.M, real=True)
        self.tables = dict(zip(("K", "K1", "K2"), hat_tables(self.lags, self.M, grid.dx, p, rule)))
        self._spectra = {}
        for kind in kinds:
            self.spectrum_of(kind)

    def spectrum_of(self, kind):
        if kind not in self._spectra:
            stencil = full_stencil(self.tables[kind])
            self._spectra[kind] = sfft.rfft(stencil, n=self.nfft, axis=-1)
        return self._spectra[kind]

    @property
    def padded_x(self):
        return self.grid.padded_x(self.M)

    def pad(self, data, t=None):
        """Values on the extended grid from a Field, an array or ``f(x)`` / ``f(x, t)``."""
        if callable(data):
            xp = self.padded_x
            vals = data(xp) if t is None else data(xp, t)
            vals = np.broadcast_to(np.asarray(vals, dtype=float), xp.shape).copy()
        else:
            vals = data.values if isinstance(data, Field) else np.asarray(data, dtype=float)
            if vals.shape != (self.grid.n,):
                raise InputError("data does not match the grid")
            vals = np.pad(vals, self.M, mode="edge")
        if not np.all(np.isfinite(vals)):
            raise InputError("data must be finite")
        return vals

    def data_spectrum(self, padded):
        return sfft.rfft(padded, n=self.nfft, axis=-1)

    def from_spectrum(self, spec):
        full = sfft.irfft(spec, n=self.nfft, axis=-1)
        return full[..., 2 * self.M:2 * self.M + self.grid.n]

    def convolve(self, padded, kind, lag):
        return self.from_spectrum(self.spectrum_of(kind)[lag] * self.data_spectrum(padded))


def _check_kind(which):
    if which not in KIND_INDEX:
        raise DomainError(f"unknown kernel {which!r}; expected one of K, K1, K2")


def spatial_convolve(f, which, t, out_grid, p, refine=1, rule=TableRule()):
    """``int f(xi) kernel(x - xi, t) d xi`` at every node of ``out_grid``.

    ``f`` is a Field on ``out_grid`` (edge-extended) or a callable of x,
    sampled on a grid ``refine`` times finer.
    """
    _check_kind(which)
    if not t > 0:
        raise DomainError("t must be > 0")
    if isinstance(f, Field) or not callable(f):
        refine = 1
    grid = out_grid.refined(refine) if refine > 1 else out_grid
    plan = ConvolutionPlan(grid, p, t, 1, (which,), rule)
    vals = plan.convolve(plan.pad(f), which, 1)[::refine]
    return Field(out_grid, t, vals)


def spacetime_convolve(F, which, t, out_grid, p, dt_max=0.01, refine=1, rule=TableRule()):
    """``int_0^t int F(xi, tau) kernel(x - xi, t - tau) d xi d tau`` on ``out_grid``.

    ``F(x, tau)`` is sampled at equispaced tau (step at most ``dt_max``) and the
    outer integral uses :func:`time_weights`.
    """
    _check_kind(which)
    if not t > 0:
        raise DomainError("t must be > 0")
    n = max(4, math.ceil(t / dt_max))
    dt = t / n
    grid = out_grid.refined(refine) if refine > 1 else out_grid
    plan = ConvolutionPlan(grid, p, dt, n, (which,), rule)
    w = time_weights(n)
    kspec = plan.spectrum_of(which)
    acc = np.zeros(plan.nfft // 2 + 1, dtype=complex)
    for m in range(n + 1):
        fm = plan.pad(F, m * dt)
        acc += w[m] * kspec[n - m] * plan.data_spectrum(fm)
    vals = dt * plan.from_spectrum(acc)[::refine]
    return Field(out_grid, t, vals)
