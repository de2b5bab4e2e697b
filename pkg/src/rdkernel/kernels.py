"""Pointwise fundamental kernel K, its time convolutions K1, K2, and their bounds.

With ``psi`` the decaying heat kernel and ``phi`` the memory weight,

    K(x, t)  = psi(x, t) - int_0^t psi(x, y) phi(y, t) dy
    K1(x, t) = int_0^t exp(-beta (t - y)) psi(x, y) J0(Z) dy
    K2(x, t) = int_0^t exp(-beta (t - y)) psi(x, y) (t - y) j1x(Z) dy

where ``Z = 2 sqrt(b y (t - y))`` and ``j1x(z) = 2 J1(z) / z``.  K1 and K2 are
``exp(-beta t)`` convolved in time with K and K1 respectively.

The memory integrals are computed in ``u = sqrt(y / t)``: the substitution
absorbs the ``1/sqrt(y)`` of psi and leaves integrands analytic on ``[0, 1]``
(J0 and j1x are even, so only ``Z^2`` enters).  Many points are integrated at
once as one vector-valued integrand sharing a subdivision.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._accel import njit, pick
from .errors import DomainError
from .model import decay_E
from .quadrature import QuadSpec, integrate
from .specfun import bessel_i0e, bessel_j1_over_x, j0_j1x_scalar, _map_np_j0, _map_np_j1x

KINDS = ("K", "K1", "K2")

DEFAULT_QUAD = QuadSpec(rel_tol=1e-11, abs_tol=1e-15, max_subdivisions=4000)
# finite differences divide by h^2, so the stencil values need near-roundoff accuracy
PDE_QUAD = QuadSpec(rel_tol=1e-14, abs_tol=1e-17, max_subdivisions=8000)


@dataclass(frozen=True)
class KernelPoint:
    x: float
    t: float

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise DomainError("x must be finite")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise DomainError(f"t must be > 0, got {self.t}")


@dataclass(frozen=True)
class KernelValue:
    value: float
    error_estimate: float


def _points(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("x must be finite")
    if np.any(~(t > 0)) or not np.all(np.isfinite(t)):
        raise DomainError("t must be finite and > 0")
    return np.broadcast_arrays(x, t)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def psi(x, t, p):
    """Heat kernel of diffusivity eps times ``exp(-a t)``."""
    x, t = _points(x, t)
    return _scalar(np.exp(-x * x / (4.0 * p.eps * t) - p.a * t) / (2.0 * np.sqrt(math.pi * p.eps * t)))


def phi(y, t, p):
    """Memory weight ``b y j1x(2 sqrt(b y (t - y))) exp(-beta (t - y))`` for 0 < y < t."""
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(~(y > 0)) or np.any(~(y < t)):
        raise DomainError("phi requires 0 < y < t")
    z = 2.0 * np.sqrt(p.b * y * (t - y))
    return _scalar(p.b * y * bessel_j1_over_x(z) * np.exp(-p.beta * (t - y)))


@njit
def _memory_nb(u, x, t, eps, a, b, beta, kinds):
    nu = u.shape[0]
    npt = x.shape[0]
    nk = kinds.shape[0]
    out = np.empty((nu, nk * npt))
    inv_pe = 1.0 / math.sqrt(math.pi * eps)
    for j in range(npt):
        tj = t[j]
        cg = x[j] * x[j] / (4.0 * eps * tj)
        pref = math.sqrt(tj) * inv_pe
        for i in range(nu):
            u2 = u[i] * u[i]
            if cg > 0.0 and u2 < cg / 745.0:
                for k in range(nk):
                    out[i, k * npt + j] = 0.0
                continue
            y = tj * u2
            rest = tj - y
            base = pref * math.exp(-(cg / u2 if cg > 0.0 else 0.0) - a * y - beta * rest)
            z = 2.0 * math.sqrt(b * y * rest)
            j0, jx = j0_j1x_scalar(z)
            for k in range(nk):
                kind = kinds[k]
                if kind == 0:
                    v = base * b * y * jx
                elif kind == 1:
                    v = base * j0
                else:
                    v = base * rest * jx
                out[i, k * npt + j] = v
    return out


def _memory_np(u, x, t, eps, a, b, beta, kinds):
    u = u[:, None]
    u2 = u * u
    c_gauss = x * x / (4.0 * eps * t)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        expo = np.where(c_gauss > 0, c_gauss / u2, 0.0)
    y = t * u2
    rest = t - y
    base = np.sqrt(t / (math.pi * eps)) * np.exp(-expo - a * y - beta * rest)
    z = np.sqrt(4.0 * b * y * rest)
    blocks = []
    for kind in kinds:
        if kind == 0:
            blocks.append(base * b * y * _map_np_j1x(z.ravel()).reshape(z.shape))
        elif kind == 1:
            blocks.append(base * _map_np_j0(z.ravel()).reshape(z.shape))
        else:
            blocks.append(base * rest * _map_np_j1x(z.ravel()).reshape(z.shape))
    return np.concatenate(blocks, axis=1)


_memory = pick(_memory_nb, _memory_np)


def memory_integrand(x, t, p, kinds=KINDS, backend=None):
    """Vector integrand in ``u`` for the memory integrals at the points (x, t).

    Returns ``f(u) -> array (len(u), len(kinds) * npoints)``, blocks ordered
    as ``kinds``; the K block is the integral to subtract from psi.
    """
    x = np.ascontiguousarray(np.ravel(x), dtype=float)
    t = np.ascontiguousarray(np.ravel(t), dtype=float)
    codes = np.array([KINDS.index(k) for k in kinds], dtype=np.int64)
    fn = {"numba": _memory_nb, "numpy": _memory_np, None: _memory}[backend]
    args = (float(p.eps), float(p.a), float(p.b), float(p.beta), codes)

    def f(u):
        return fn(np.ascontiguousarray(u, dtype=float), x, t, *args)

    return f


def kernel_values(x, t, p, kinds=KINDS, spec=DEFAULT_QUAD, weights=None):
    """Evaluate several kernels at many points with one adaptive integration.

    Returns ``({kind: values}, error_estimate)`` with values shaped like the
    broadcast of x and t.  The tolerance applies to the largest magnitude over
    all points; positive ``weights`` (broadcast like x) rescale the points for
    that purpose, and the error estimate then refers to ``weights * value``.
    """
    x, t = _points(x, t)
    shape = x.shape
    n = x.size
    if n == 0:
        return {k: np.zeros(shape) for k in kinds}, 0.0
    need = p.b > 0 or any(k != "K" for k in kinds)
    if need:
        f = memory_integrand(x, t, p, kinds)
        if weights is not None:
            w = np.tile(np.broadcast_to(np.asarray(weights, dtype=float), shape).ravel(), len(kinds))
            res = integrate(lambda u: f(u) * w, 0.0, 1.0, spec)
            vals = np.atleast_1d(res.value) / w
        else:
            res = integrate(f, 0.0, 1.0, spec)
            vals = np.atleast_1d(res.value)
        err = res.error_estimate
    else:
        vals = np.zeros(n * len(kinds))
        err = 0.0
    out = {}
    for i, kind in enumerate(kinds):
        block = vals[i * n:(i + 1) * n].reshape(shape)
        if kind == "K":
            block = np.asarray(psi(x, t, p)).reshape(shape) - block
        out[kind] = block
    return out, err


def _single(kind, x, t, p, spec):
    vals, err = kernel_values(x, t, p, (kind,), spec)
    return KernelValue(_scalar(vals[kind]), err)


def kernel_K(x, t, p, spec=DEFAULT_QUAD):
    """Fundamental solution K(x, t); reduces to psi when b = 0."""
    return _single("K", x, t, p, spec)


def kernel_K1(x, t, p, spec=DEFAULT_QUAD):
    return _single("K1", x, t, p, spec)


def kernel_K2(x, t, p, spec=DEFAULT_QUAD):
    return _single("K2", x, t, p, spec)


def kernel_bound(x, t, p):
    """Gaussian envelope ``psi-shape * [exp(-a t) + b t E(t)]`` dominating |K|."""
    x, t = _points(x, t)
    gauss = np.exp(-x * x / (4.0 * p.eps * t)) / (2.0 * np.sqrt(math.pi * p.eps * t))
    return _scalar(gauss * (np.exp(-p.a * t) + p.b * t * np.asarray(decay_E(t, p))))


def abs_mass_bound_K(t, p):
    """``exp(-a t) + sqrt(b) pi t exp(-(a+beta) t/2) I0((beta-a) t/2)`` bounding int |K| dx."""
    t = np.asarray(t, dtype=float)
    # exp(-k t) I0(|beta-a| t/2) = exp(-omega t) i0e(|beta-a| t/2)
    mem = math.sqrt(p.b) * math.pi * t * np.exp(-p.omega * t) * bessel_i0e(abs(p.beta - p.a) * t / 2.0)
    return _scalar(np.exp(-p.a * t) + mem)


def abs_mass_bound_K_relaxed(t, p):
    """``exp(-a t) + sqrt(b) pi t exp(-omega t)``, which dominates abs_mass_bound_K."""
    t = np.asarray(t, dtype=float)
    return _scalar(np.exp(-p.a * t) + math.sqrt(p.b) * math.pi * t * np.exp(-p.omega * t))


def abs_mass_bound_K_envelope(t, p):
    """``(1 + sqrt(b) pi t) exp(-omega t)``, the coarsest form."""
    t = np.asarray(t, dtype=float)
    return _scalar((1.0 + math.sqrt(p.b) * math.pi * t) * np.exp(-p.omega * t))


def abs_mass_bound_K1(t, p):
    return decay_E(t, p)


def abs_mass_bound_K2(t, p):
    t = np.asarray(t, dtype=float)
    return _scalar(t * np.asarray(decay_E(t, p)))


ABS_MASS_BOUNDS = {"K": abs_mass_bound_K, "K1": abs_mass_bound_K1, "K2": abs_mass_bound_K2}


def pde_residual(x, t, p, h, spec=PDE_QUAD):
    """Central-difference value of ``K_t - eps K_xx + a K + b K1`` at (x, t).

    The memory term of the operator applied to K equals K1, so the residual
    vanishes as O(h^2).  Returns ``(residual, K(x, t))``.
    """
    if not (t > 2 * h > 0):
        raise DomainError("need t > 2h > 0")
    xs = np.array([x, x, x, x + h, x - h])
    ts = np.array([t, t + h, t - h, t, t])
    vals, _ = kernel_values(xs, ts, p, ("K", "K1"), spec)
    k = vals["K"]
    k_t = (k[1] - k[2]) / (2.0 * h)
    k_xx = (k[3] - 2.0 * k[0] + k[4]) / (h * h)
    res = k_t - p.eps * k_xx + p.a * k[0] + p.b * vals["K1"][0]
    return float(res), float(k[0])
