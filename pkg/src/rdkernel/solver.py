"""Fixed-point solution of ``u = K * g + int_0^t K * F(., tau, u) dtau``.

Time is discretised on equispaced levels ``t_n = n dt`` and the tau integral
uses :func:`rdkernel.convolve.time_weights`; space uses exact hat weights.
Picard iteration runs block by block (block length theta from the contraction
estimate).  Levels in finished blocks are frozen: their contribution to later
levels is a precomputed history sum in Fourier space, so each iteration only
touches the levels of the current block.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._accel import njit, pick
from .convolve import ConvolutionPlan, Field, Grid, TimeSlab, time_weights
from .errors import ConfigError, ConvergenceError, DomainError
from .kernels import abs_mass_bound_K_relaxed
from .model import beta0, memory_ratio
from .tables import TableRule


@dataclass
class IVProblem:
    """Data of the initial-value problem.

    ``g`` is a callable of x (or an array on the solver grid); ``F(x, t, u)``
    receives arrays.  ``sup_F`` and ``sup_g`` are caller-supplied norms used
    only by the a-priori bound.
    """

    params: object
    g: object
    F: object = None
    lipschitz_CF: float = 0.0
    sup_F: float = 0.0
    sup_g: float = None

    def __post_init__(self):
        if not self.lipschitz_CF >= 0 or not math.isfinite(self.lipschitz_CF):
            raise DomainError("lipschitz_CF must be finite and >= 0")
        if self.F is None:
            self.F = zero_source

    @property
    def linear(self):
        return self.lipschitz_CF == 0


def zero_source(x, t, u):
    return np.zeros_like(x)


@dataclass
class SolverConfig:
    grid: Grid
    T: float
    theta: float = None
    fixpoint_tol: float = 1e-10
    max_iters: int = 100
    dt_max: float = 0.01
    safety: float = 0.5
    # nonlinear problems get at least this many time levels per block
    block_levels: int = 4
    rule: TableRule = field(default_factory=TableRule)

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError("T must be > 0")
        if self.theta is not None and not 0 < self.theta <= self.T:
            raise ConfigError("theta must lie in (0, T]")
        if not self.fixpoint_tol > 0 or self.max_iters < 1:
            raise ConfigError("need fixpoint_tol > 0 and max_iters >= 1")
        if not 0 < self.safety < 1:
            raise ConfigError("safety must lie in (0, 1)")
        if self.block_levels < 1:
            raise ConfigError("block_levels must be >= 1")


@dataclass
class Solution:
    slab: TimeSlab
    iterations_per_block: list
    residuals: list
    contraction_factors: list
    theoretical_rate: float
    theta: float
    dt: float
    plan: ConvolutionPlan = None
    source_spectra: np.ndarray = None

    @property
    def times(self):
        return self.slab.times

    @property
    def u(self):
        return self.slab.values


def contraction_theta(prob, p, safety=0.5, T=None):
    """Block length with ``C_F theta (1 + pi sqrt(b)/omega) = safety``; T when C_F = 0."""
    if prob.lipschitz_CF == 0:
        if T is None:
            raise DomainError("linear problem: theta is the horizon T, which was not given")
        return float(T)
    return safety / (prob.lipschitz_CF * (1.0 + memory_ratio(p)))


def contraction_rate(prob, p, theta):
    return prob.lipschitz_CF * theta * (1.0 + memory_ratio(p))


@njit
def _greg(n, m):
    # entry m of time_weights(n)
    if n == 1:
        return 0.5
    if n == 2:
        return 4.0 / 3.0 if m == 1 else 1.0 / 3.0
    if n == 3:
        return 9.0 / 8.0 if 0 < m < 3 else 3.0 / 8.0
    if n == 4:
        if m == 0 or m == 4:
            return 1.0 / 3.0
        return 4.0 / 3.0 if m % 2 == 1 else 2.0 / 3.0
    k = min(m, n - m)
    if k == 0:
        return 3.0 / 8.0
    if k == 1:
        return 7.0 / 6.0
    if k == 2:
        return 23.0 / 24.0
    return 1.0


@njit
def _mac_nb(kspec, fspec, n_lo, n_hi, m_lo, m_hi):
    nf = kspec.shape[1]
    out = np.zeros((n_hi - n_lo + 1, nf), dtype=np.complex128)
    for n in range(n_lo, n_hi + 1):
        row = out[n - n_lo]
        for m in range(m_lo, min(m_hi, n) + 1):
            w = _greg(n, m)
            kr = kspec[n - m]
            fr = fspec[m]
            for j in range(nf):
                row[j] += w * kr[j] * fr[j]
    return out


def _mac_np(kspec, fspec, n_lo, n_hi, m_lo, m_hi):
    out = np.zeros((n_hi - n_lo + 1, kspec.shape[1]), dtype=complex)
    for n in range(n_lo, n_hi + 1):
        top = min(m_hi, n)
        if top < m_lo:
            continue
        w = time_weights(n)[m_lo:top + 1]
        ks = kspec[n - top:n - m_lo + 1][::-1]
        out[n - n_lo] = np.einsum("m,mj,mj->j", w, ks, fspec[m_lo:top + 1])
    return out


_mac = pick(_mac_nb, _mac_np)


def weighted_history(kspec, fspec, n_lo, n_hi, m_lo, m_hi, backend=None):
    """``sum_{m_lo <= m <= min(m_hi, n)} w_{n,m} kspec[n-m] fspec[m]`` for n in [n_lo, n_hi]."""
    fn = {"numba": _mac_nb, "numpy": _mac_np, None: _mac}[backend]
    return fn(kspec, fspec, int(n_lo), int(n_hi), int(m_lo), int(m_hi))


def time_levels(prob, cfg):
    """Return (theta, n_steps, dt, block_steps)."""
    p = prob.params
    theta = cfg.theta if cfg.theta is not None else contraction_theta(prob, p, cfg.safety, cfg.T)
    if not prob.linear and contraction_rate(prob, p, theta) >= 1:
        raise ConfigError("theta violates the contraction condition C_F theta (1 + pi sqrt(b)/omega) < 1")
    n_steps = max(4, math.ceil(cfg.T / cfg.dt_max - 1e-9))
    if not prob.linear:
        n_steps = max(n_steps, math.ceil(cfg.block_levels * cfg.T / theta - 1e-9))
    dt = cfg.T / n_steps
    block = max(1, int(math.floor(theta / dt + 1e-9)))
    return theta, n_steps, dt, block


def _default_base(prob, plan):
    g_pad = plan.pad(prob.g)
    base = np.empty((plan.n_lags + 1, plan.grid.n))
    base[0] = g_pad[plan.M:plan.M + plan.grid.n]
    gspec = plan.data_spectrum(g_pad)
    kspec = plan.spectrum_of("K")
    base[1:] = plan.from_spectrum(kspec[1:] * gspec[None, :])
    return base


def picard_solve(prob, cfg, base_builder=None, kinds=("K",)):
    """Solve by blockwise Picard iteration starting from the source-free term.

    ``base_builder(plan)`` may replace ``K * g`` by another known term on all
    levels (shape ``(n_steps + 1, n)``).  Raises :class:`ConvergenceError` with
    the residual history when a block does not converge in ``max_iters``.
    """
    p = prob.params
    theta, n_steps, dt, block = time_levels(prob, cfg)
    grid = cfg.grid
    plan = ConvolutionPlan(grid, p, dt, n_steps, tuple(set(("K",) + tuple(kinds))), cfg.rule)
    base = (base_builder or (lambda pl: _default_base(prob, pl)))(plan)
    xp = plan.padded_x
    M, n = plan.M, grid.n
    times = dt * np.arange(n_steps + 1)
    kspec = plan.spectrum_of("K")
    nf = kspec.shape[1]

    def source(level, u):
        vals = prob.F(xp, times[level], np.pad(u, M, mode="edge"))
        return np.broadcast_to(np.asarray(vals, dtype=float), xp.shape)

    u = np.empty((n_steps + 1, n))
    u[0] = base[0]
    fspec = np.zeros((n_steps + 1, nf), dtype=complex)
    fspec[0] = plan.data_spectrum(source(0, u[0]))

    iters, residuals, factors = [], [], []
    rate = contraction_rate(prob, p, theta)
    start = 1
    while start <= n_steps:
        end = min(start + block - 1, n_steps)
        hist = weighted_history(kspec, fspec, start, end, 0, start - 1)
        v = base[start:end + 1].copy()
        res = []
        for k in range(cfg.max_iters):
            for i, lev in enumerate(range(start, end + 1)):
                fspec[lev] = plan.data_spectrum(source(lev, v[i]))
            inner = weighted_history(kspec, fspec, start, end, start, end)
            new = base[start:end + 1] + dt * plan.from_spectrum(hist + inner)
            upd = float(np.max(np.abs(new - v)))
            v = new
            res.append(upd)
            if prob.linear or upd <= cfg.fixpoint_tol:
                break
        else:
            raise ConvergenceError(
                f"block [{times[start]:.4g}, {times[end]:.4g}] did not converge in {cfg.max_iters} iterations",
                res)
        u[start:end + 1] = v
        for i, lev in enumerate(range(start, end + 1)):
            fspec[lev] = plan.data_spectrum(source(lev, v[i]))
        iters.append(len(res))
        residuals.append(res)
        factors.append([res[j + 1] / res[j] for j in range(len(res) - 1) if res[j] > 0])
        start = end + 1

    fields = [Field(grid, float(t), u[i]) for i, t in enumerate(times)]
    slab = TimeSlab(0.0, cfg.T, n_steps + 1, fields)
    return Solution(slab, iters, residuals, factors, rate, theta, dt, plan, fspec)


def apply_map(v, prob, cfg):
    """One application of the solution map to the slab ``v`` (levels of the solver grid)."""
    p = prob.params
    n_steps = v.n_t - 1
    dt = (v.t1 - v.t0) / n_steps
    plan = ConvolutionPlan(cfg.grid, p, dt, n_steps, ("K",), cfg.rule)
    base = _default_base(prob, plan)
    xp = plan.padded_x
    times = v.times
    vals = v.values
    fspec = np.array([
        plan.data_spectrum(np.broadcast_to(
            np.asarray(prob.F(xp, times[i], np.pad(vals[i], plan.M, mode="edge")), dtype=float), xp.shape))
        for i in range(n_steps + 1)])
    total = weighted_history(plan.spectrum_of("K"), fspec, 1, n_steps, 0, n_steps)
    out = base.copy()
    out[1:] += dt * plan.from_spectrum(total)
    return TimeSlab(v.t0, v.t1, v.n_t, [Field(cfg.grid, float(t), out[i]) for i, t in enumerate(times)])


def linear_solve(g, f, p, cfg):
    """``K * g + int_0^t K * f dtau`` for a source ``f(x, t)`` independent of u."""
    prob = IVProblem(p, g, lambda x, t, u: f(x, t), 0.0)
    return picard_solve(prob, cfg)


def apriori_bound(prob, t):
    """``beta0 ||F|| + ||g|| (exp(-a t) + sqrt(b) pi t exp(-omega t))``."""
    p = prob.params
    sup_g = prob.sup_g if prob.sup_g is not None else _sup_of(prob.g)
    src = beta0(p) * prob.sup_F if prob.sup_F > 0 else 0.0
    return src + sup_g * np.asarray(abs_mass_bound_K_relaxed(t, p))


def _sup_of(g):
    if callable(g):
        raise DomainError("sup_g must be supplied for callable initial data")
    vals = g.values if isinstance(g, Field) else np.asarray(g)
    return float(np.max(np.abs(vals)))


def continuous_dependence_check(prob1, prob2, cfg, n_u=33):
    """Empirical ratio ``||u1 - u2|| / (sup|g1 - g2| + sup|F1 - F2|)`` over the run.

    The sup of ``F1 - F2`` is taken over grid nodes, time levels and a sample
    of u values spanning both solutions.  Returns 0 for identical data.
    """
    s1 = picard_solve(prob1, cfg)
    s2 = picard_solve(prob2, cfg)
    du = float(np.max(np.abs(s1.u - s2.u)))
    x = s1.plan.padded_x
    g1 = s1.plan.pad(prob1.g)
    g2 = s1.plan.pad(prob2.g)
    dg = float(np.max(np.abs(g1 - g2)))
    lo = min(s1.u.min(), s2.u.min())
    hi = max(s1.u.max(), s2.u.max())
    dF = 0.0
    for t in s1.times:
        for uv in np.linspace(lo, hi, n_u):
            uu = np.full_like(x, uv)
            diff = np.asarray(prob1.F(x, t, uu)) - np.asarray(prob2.F(x, t, uu))
            dF = max(dF, float(np.max(np.abs(diff))))
    denom = dg + dF
    if denom == 0:
        return 0.0
    return du / denom
