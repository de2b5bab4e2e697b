"""FitzHugh-Nagumo system ``u_t = eps u_xx - v + f(u)``, ``v_t = b u - beta v``.

With ``f(u) = u (a - u)(u - 1) = -a u + phi(u)``, ``phi(u) = u^2 (a + 1 - u)``,
eliminating v turns the u equation into the memory problem solved by
:mod:`rdkernel.solver`:

    u = u0 * K - v0 * K1 + int_0^t K * phi(u) dtau
    v = v0 exp(-beta t) + b [u0 * K1 - v0 * K2 + int_0^t K1 * phi(u) dtau]
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .convolve import Field, time_weights
from .errors import DomainError
from .model import ModelParams, beta0, beta1, decay_E
from .solver import IVProblem, SolverConfig, picard_solve, weighted_history


@dataclass(frozen=True)
class FHNParams:
    base: ModelParams

    def __post_init__(self):
        if not 0 < self.base.a < 1:
            raise DomainError(f"cubic threshold a must lie in (0, 1), got {self.base.a}")

    @classmethod
    def of(cls, a, b, beta, eps):
        return cls(ModelParams(a, b, beta, eps))

    @property
    def a(self):
        return self.base.a

    @property
    def b(self):
        return self.base.b

    @property
    def beta(self):
        return self.base.beta

    @property
    def eps(self):
        return self.base.eps


@dataclass
class FHNState:
    u: Field
    v: Field

    def __post_init__(self):
        if self.u.grid != self.v.grid or self.u.t != self.v.t:
            raise DomainError("u and v must share grid and time")


@dataclass(frozen=True)
class SteadyStates:
    regime: str  # "mono" or "tri"
    u_A: float = None
    v_A: float = None
    u_B: float = None
    v_B: float = None


@dataclass(frozen=True)
class TravelingWave:
    gamma: float
    c: float


def cubic_f(u, fp):
    return u * (fp.a - u) * (u - 1.0)


def phi_reaction(u, fp):
    """Nonlinear part of the kinetics: ``f(u) + a u``."""
    return u * u * (fp.a + 1.0 - u)


def phi_reaction_slope(u, fp):
    return 2.0 * (fp.a + 1.0) * u - 3.0 * u * u


def steady_states(fp):
    """Nonzero intersections of ``v = f(u)`` and ``v = (b / beta) u``."""
    if fp.beta == 0:
        raise DomainError("steady states need beta > 0")
    disc = (1.0 - fp.a) ** 2 - 4.0 * fp.b / fp.beta
    if disc < 0:
        return SteadyStates("mono")
    root = math.sqrt(disc)
    u_a = 0.5 * (fp.a + 1.0 - root)
    u_b = 0.5 * (fp.a + 1.0 + root)
    k = fp.b / fp.beta
    return SteadyStates("tri", u_a, k * u_a, u_b, k * u_b)


def traveling_wave(fp):
    """Logistic front for b = 0; warns when b != 0 (no longer an exact solution)."""
    if fp.b != 0:
        warnings.warn("traveling-wave profile is exact only for b = 0", RuntimeWarning, stacklevel=2)
    return TravelingWave(1.0 / math.sqrt(2.0 * fp.eps), math.sqrt(fp.eps / 2.0) * (1.0 - 2.0 * fp.a))


def wave_profile(z, tw):
    """``1 / (1 + exp(gamma z))``, written to avoid overflow."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * (1.0 - np.tanh(0.5 * tw.gamma * z))
    return float(out) if out.ndim == 0 else out


def wave_residual(z, fp):
    """``eps u'' + c u' + f(u)`` of the profile, with analytic derivatives."""
    tw = TravelingWave(1.0 / math.sqrt(2.0 * fp.eps), math.sqrt(fp.eps / 2.0) * (1.0 - 2.0 * fp.a))
    u = np.asarray(wave_profile(z, tw))
    du = -tw.gamma * u * (1.0 - u)
    d2u = tw.gamma ** 2 * u * (1.0 - u) * (1.0 - 2.0 * u)
    return fp.eps * d2u + tw.c * du + cubic_f(u, fp)


def lipschitz_phi(u0_sup, v0_sup, fp):
    """``(C_F, (lo, hi))``: max of ``|phi'|`` over a working range for u.

    The range is ``[-m, 1 + m]`` with ``m = max(|u0|, |v0| / min(1, beta)) + 0.5``
    (``beta`` read as 1 when zero).
    """
    bt = fp.beta if fp.beta > 0 else 1.0
    m = max(u0_sup, v0_sup / min(1.0, bt)) + 0.5
    lo, hi = -m, 1.0 + m
    cands = [lo, hi]
    vertex = (fp.a + 1.0) / 3.0
    if lo < vertex < hi:
        cands.append(vertex)
    return max(abs(phi_reaction_slope(u, fp)) for u in cands), (lo, hi)


def fhn_apriori_bounds(u0_sup, v0_sup, phi_sup, fp, t):
    """Closed-form bounds ``(|u|, |v|)`` at time t from the data and ``sup|phi(u)|``."""
    p = fp.base
    t = np.asarray(t, dtype=float)
    e = np.asarray(decay_E(t, p))
    om = p.omega
    bu = (u0_sup * (1.0 + math.pi * math.sqrt(p.b) * t) * np.exp(-om * t)
          + v0_sup * e + (beta0(p) * phi_sup if phi_sup > 0 else 0.0))
    bv = (v0_sup * np.exp(-p.beta * t) + p.b * (u0_sup + t * v0_sup) * e
          + (p.b * beta1(p) * phi_sup if p.b * phi_sup > 0 else 0.0))
    if t.ndim == 0:
        return float(bu), float(bv)
    return bu, bv


@dataclass
class FHNRun:
    times: np.ndarray
    grid: object
    u: np.ndarray
    v: np.ndarray
    v_direct: np.ndarray
    solution: object
    lipschitz_CF: float

    @property
    def states(self):
        return [FHNState(Field(self.grid, float(t), self.u[i]), Field(self.grid, float(t), self.v[i]))
                for i, t in enumerate(self.times)]

    @property
    def route_discrepancy(self):
        """Largest gap between the two ways of computing v."""
        return float(np.max(np.abs(self.v - self.v_direct)))


def _on_grid(data, x):
    if callable(data):
        return np.broadcast_to(np.asarray(data(x), dtype=float), x.shape).copy()
    return np.asarray(data.values if isinstance(data, Field) else data, dtype=float)


def solve_fhn(u0, v0, fp, cfg, lipschitz_CF=None):
    """Solve for u by fixed-point iteration, then v from u0, v0 and phi(u).

    ``u0``, ``v0`` are callables of x or arrays on ``cfg.grid``.  ``v`` is also
    computed directly as ``v0 exp(-beta t) + b int exp(-beta (t - tau)) u dtau``
    (``v_direct``) as a consistency check.
    """
    p = fp.base
    x = cfg.grid.x
    u0_grid = _on_grid(u0, x)
    v0_grid = _on_grid(v0, x)
    if lipschitz_CF is None:
        lipschitz_CF, _ = lipschitz_phi(float(np.max(np.abs(u0_grid))), float(np.max(np.abs(v0_grid))), fp)
    prob = IVProblem(p, u0, lambda xx, t, u: phi_reaction(u, fp), lipschitz_CF)

    def base(plan):
        u0p = plan.pad(u0)
        v0p = plan.pad(v0)
        out = np.empty((plan.n_lags + 1, plan.grid.n))
        out[0] = u0_grid
        uspec = plan.data_spectrum(u0p)
        vspec = plan.data_spectrum(v0p)
        out[1:] = plan.from_spectrum(plan.spectrum_of("K")[1:] * uspec - plan.spectrum_of("K1")[1:] * vspec)
        return out

    sol = picard_solve(prob, cfg, base_builder=base, kinds=("K", "K1", "K2"))
    plan = sol.plan
    times = sol.times
    dt = sol.dt
    n_steps = len(times) - 1
    decay = np.exp(-p.beta * times)[:, None]

    k1 = plan.spectrum_of("K1")
    k2 = plan.spectrum_of("K2")
    mem = weighted_history(k1, sol.source_spectra, 1, n_steps, 0, n_steps)
    lin = k1[1:] * plan.data_spectrum(plan.pad(u0)) - k2[1:] * plan.data_spectrum(plan.pad(v0))
    v = np.empty_like(sol.u)
    v[0] = v0_grid
    v[1:] = decay[1:] * v0_grid + p.b * plan.from_spectrum(lin + dt * mem)

    # direct route: time quadrature of exp(-beta (t - tau)) u(tau)
    v_direct = np.empty_like(sol.u)
    v_direct[0] = v0_grid
    for n in range(1, n_steps + 1):
        w = time_weights(n) * np.exp(-p.beta * dt * (n - np.arange(n + 1)))
        v_direct[n] = decay[n] * v0_grid + p.b * dt * (w @ sol.u[:n + 1])
    return FHNRun(times, cfg.grid, sol.u, v, v_direct, sol, lipschitz_CF)


def front_positions(x, u, level=0.5):
    """Leftmost-to-right crossing of ``level`` per row, by linear interpolation."""
    u = np.atleast_2d(u)
    out = np.full(u.shape[0], np.nan)
    for i, row in enumerate(u):
        s = row - level
        idx = np.nonzero((s[:-1] >= 0) & (s[1:] < 0))[0]
        if idx.size:
            j = idx[0]
            out[i] = x[j] + (x[j + 1] - x[j]) * s[j] / (s[j] - s[j + 1])
    return out


def front_speed(times, positions):
    """Least-squares slope of front position against time."""
    ok = np.isfinite(positions)
    if ok.sum() < 2:
        raise DomainError("need at least two front positions")
    return float(np.polyfit(np.asarray(times)[ok], np.asarray(positions)[ok], 1)[0])
