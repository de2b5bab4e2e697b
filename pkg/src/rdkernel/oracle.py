"""Independent finite-difference reference solvers (method of lines, RK4).

The memory term ``b int_0^t exp(-beta (t - tau)) u dtau`` is carried by an
auxiliary field ``w`` with ``w_t = -beta w + u``, ``w(0) = 0``, which makes the
system local.  Second-order central differences in space.  Shares no numerics
with the kernel pipeline.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._accel import njit, pick
from .convolve import Field, Grid, TimeSlab
from .errors import ConfigError

BOUNDARY_CONDITIONS = ("dirichlet_far_field", "neumann_zero")
STABILITY_SAFETY = 0.4


@dataclass(frozen=True)
class FDConfig:
    grid: Grid
    dt: float
    T: float
    bc: str = "dirichlet_far_field"
    n_store: int = 20

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ConfigError(f"unknown boundary condition {self.bc!r}")
        if not (self.dt > 0 and self.T > 0):
            raise ConfigError("dt and T must be > 0")
        if self.n_store < 1:
            raise ConfigError("n_store must be >= 1")

    def check_stability(self, eps):
        limit = STABILITY_SAFETY * self.grid.dx ** 2 / (2.0 * eps)
        if self.dt > limit * (1 + 1e-12):
            raise ConfigError(f"dt = {self.dt:.3g} exceeds the explicit stability limit {limit:.3g}")

    def steps(self):
        """Return (n_steps, dt_used, steps_per_store), n_steps a multiple of n_store."""
        per = math.ceil(self.T / (self.dt * self.n_store) - 1e-9)
        n = per * self.n_store
        return n, self.T / n, per


@dataclass
class FDResult:
    times: np.ndarray
    grid: Grid
    u: np.ndarray
    aux: np.ndarray  # memory field w for the linear problem, v for FitzHugh-Nagumo

    @property
    def slab(self):
        return TimeSlab(float(self.times[0]), float(self.times[-1]), len(self.times),
                        [Field(self.grid, float(t), self.u[i]) for i, t in enumerate(self.times)])

    @property
    def aux_slab(self):
        return TimeSlab(float(self.times[0]), float(self.times[-1]), len(self.times),
                        [Field(self.grid, float(t), self.aux[i]) for i, t in enumerate(self.times)])


@njit
def _laplacian_nb(u, dx, neumann, out):
    n = u.shape[0]
    inv = 1.0 / (dx * dx)
    for i in range(1, n - 1):
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv
    if neumann:
        out[0] = 2.0 * (u[1] - u[0]) * inv
        out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv
    else:
        out[0] = 0.0
        out[n - 1] = 0.0


def _laplacian_np(u, dx, neumann, out):
    inv = 1.0 / (dx * dx)
    out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) * inv
    if neumann:
        out[0] = 2.0 * (u[1] - u[0]) * inv
        out[-1] = 2.0 * (u[-2] - u[-1]) * inv
    else:
        out[0] = 0.0
        out[-1] = 0.0


_laplacian = pick(_laplacian_nb, _laplacian_np)


def _p0_rhs(u, w, src, p, dx, neumann, lap):
    _laplacian(u, dx, neumann, lap)
    du = p.eps * lap - p.a * u - p.b * w + src
    if not neumann:
        du[0] = 0.0
        du[-1] = 0.0
    return du, -p.beta * w + u


def fd_solve_p0(g, F, p, cfg):
    """Integrate ``u_t = eps u_xx - a u - b w + F``, ``w_t = -beta w + u`` with RK4.

    ``g(x)`` is the initial datum, ``F(x, t, u)`` the source (None for zero).
    Dirichlet boundaries hold the initial values.  Returns :class:`FDResult`
    with ``aux = w`` at the stored times.
    """
    cfg.check_stability(p.eps)
    x = cfg.grid.x
    dx = cfg.grid.dx
    neumann = cfg.bc == "neumann_zero"
    n_steps, dt, per = cfg.steps()
    u = np.array(np.broadcast_to(np.asarray(g(x), dtype=float), x.shape))
    w = np.zeros_like(u)
    lap = np.zeros_like(u)

    def src(t, uu):
        if F is None:
            return 0.0
        return np.asarray(F(x, t, uu), dtype=float)

    times = [0.0]
    us, ws = [u.copy()], [w.copy()]
    t = 0.0
    for k in range(1, n_steps + 1):
        k1u, k1w = _p0_rhs(u, w, src(t, u), p, dx, neumann, lap)
        u2, w2 = u + 0.5 * dt * k1u, w + 0.5 * dt * k1w
        k2u, k2w = _p0_rhs(u2, w2, src(t + 0.5 * dt, u2), p, dx, neumann, lap)
        u3, w3 = u + 0.5 * dt * k2u, w + 0.5 * dt * k2w
        k3u, k3w = _p0_rhs(u3, w3, src(t + 0.5 * dt, u3), p, dx, neumann, lap)
        u4, w4 = u + dt * k3u, w + dt * k3w
        k4u, k4w = _p0_rhs(u4, w4, src(t + dt, u4), p, dx, neumann, lap)
        u = u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        w = w + dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
        t = k * dt
        if k % per == 0:
            times.append(t)
            us.append(u.copy())
            ws.append(w.copy())
    return FDResult(np.array(times), cfg.grid, np.array(us), np.array(ws))


@njit
def _fhn_rhs_nb(u, v, eps, a, b, beta, dx, neumann, du, dv):
    n = u.shape[0]
    inv = 1.0 / (dx * dx)
    for i in range(n):
        if 0 < i < n - 1:
            lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv
        elif neumann:
            lap = 2.0 * (u[1] - u[0]) * inv if i == 0 else 2.0 * (u[n - 2] - u[n - 1]) * inv
        else:
            lap = 0.0
        ui = u[i]
        du[i] = eps * lap - v[i] + ui * (a - ui) * (ui - 1.0)
        dv[i] = b * ui - beta * v[i]
    if not neumann:
        du[0] = 0.0
        du[n - 1] = 0.0


@njit
def _fhn_run_nb(u, v, n_steps, per, dt, eps, a, b, beta, dx, neumann):
    n = u.shape[0]
    n_out = n_steps // per + 1
    us = np.empty((n_out, n))
    vs = np.empty((n_out, n))
    us[0] = u
    vs[0] = v
    k1u = np.empty(n); k1v = np.empty(n); k2u = np.empty(n); k2v = np.empty(n)
    k3u = np.empty(n); k3v = np.empty(n); k4u = np.empty(n); k4v = np.empty(n)
    tu = np.empty(n); tv = np.empty(n)
    for k in range(1, n_steps + 1):
        _fhn_rhs_nb(u, v, eps, a, b, beta, dx, neumann, k1u, k1v)
        for i in range(n):
            tu[i] = u[i] + 0.5 * dt * k1u[i]
            tv[i] = v[i] + 0.5 * dt * k1v[i]
        _fhn_rhs_nb(tu, tv, eps, a, b, beta, dx, neumann, k2u, k2v)
        for i in range(n):
            tu[i] = u[i] + 0.5 * dt * k2u[i]
            tv[i] = v[i] + 0.5 * dt * k2v[i]
        _fhn_rhs_nb(tu, tv, eps, a, b, beta, dx, neumann, k3u, k3v)
        for i in range(n):
            tu[i] = u[i] + dt * k3u[i]
            tv[i] = v[i] + dt * k3v[i]
        _fhn_rhs_nb(tu, tv, eps, a, b, beta, dx, neumann, k4u, k4v)
        for i in range(n):
            u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i])
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])
        if k % per == 0:
            us[k // per] = u
            vs[k // per] = v
    return us, vs


def _fhn_rhs_np(u, v, eps, a, b, beta, dx, neumann):
    lap = np.empty_like(u)
    _laplacian_np(u, dx, neumann, lap)
    du = eps * lap - v + u * (a - u) * (u - 1.0)
    if not neumann:
        du[0] = 0.0
        du[-1] = 0.0
    return du, b * u - beta * v


def _fhn_run_np(u, v, n_steps, per, dt, eps, a, b, beta, dx, neumann):
    us, vs = [u.copy()], [v.copy()]
    args = (eps, a, b, beta, dx, neumann)
    for k in range(1, n_steps + 1):
        k1u, k1v = _fhn_rhs_np(u, v, *args)
        k2u, k2v = _fhn_rhs_np(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v, *args)
        k3u, k3v = _fhn_rhs_np(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v, *args)
        k4u, k4v = _fhn_rhs_np(u + dt * k3u, v + dt * k3v, *args)
        u = u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if k % per == 0:
            us.append(u.copy())
            vs.append(v.copy())
    return np.array(us), np.array(vs)


_fhn_run = pick(_fhn_run_nb, _fhn_run_np)


def fd_solve_fhn(u0, v0, fp, cfg, backend=None):
    """Integrate ``u_t = eps u_xx - v + f(u)``, ``v_t = b u - beta v`` with RK4.

    ``u0``, ``v0`` are callables of x or arrays on ``cfg.grid``; ``fp`` is
    :class:`rdkernel.fhn.FHNParams` (or anything with ``.base``).  Returns
    :class:`FDResult` with ``aux = v``.
    """
    p = fp.base
    cfg.check_stability(p.eps)
    x = cfg.grid.x
    u = np.array(np.broadcast_to(np.asarray(u0(x) if callable(u0) else u0, dtype=float), x.shape))
    v = np.array(np.broadcast_to(np.asarray(v0(x) if callable(v0) else v0, dtype=float), x.shape))
    n_steps, dt, per = cfg.steps()
    fn = {"numba": _fhn_run_nb, "numpy": _fhn_run_np, None: _fhn_run}[backend]
    us, vs = fn(u, v, n_steps, per, dt, p.eps, p.a, p.b, p.beta, cfg.grid.dx, cfg.bc == "neumann_zero")
    times = dt * per * np.arange(us.shape[0])
    return FDResult(times, cfg.grid, us, vs)
