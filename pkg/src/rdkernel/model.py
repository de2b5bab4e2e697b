"""Operator parameters and the scalar functions derived from them.

The operator is ``u_t - eps u_xx + a u + b int_0^t exp(-beta (t - tau)) u dtau``.
Throughout, ``k = (a + beta) / 2`` and ``q = b - (a - beta)^2 / 4``; the
oscillation frequency is ``rho = sqrt(q)`` when ``q > 0`` and the formulas are
continued through ``q = 0`` into the hyperbolic regime ``q < 0``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

# |q| t^2 below this uses the entire-function series instead of sin/sinh.
_SERIES_SWITCH = 1e-2


@dataclass(frozen=True)
class ModelParams:
    """Constants of the operator: reaction rate, memory coupling, memory decay, diffusivity.

    ``b = 0``, ``beta = 0`` and ``a = 0`` are admitted and flagged by
    :attr:`degenerate`; constants that need ``a, beta > 0`` become infinite.
    """

    a: float
    b: float
    beta: float
    eps: float

    def __post_init__(self):
        for name in ("a", "b", "beta", "eps"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
        if self.eps <= 0:
            raise DomainError(f"eps must be > 0, got {self.eps}")
        if self.a < 0 or self.b < 0 or self.beta < 0:
            raise DomainError("a, b and beta must be >= 0")

    @property
    def degenerate(self):
        return self.a == 0 or self.b == 0 or self.beta == 0

    @property
    def omega(self):
        return min(self.a, self.beta)

    @property
    def k(self):
        return 0.5 * (self.a + self.beta)

    @property
    def q(self):
        return self.b - 0.25 * (self.a - self.beta) ** 2

    def derived(self):
        return DerivedConstants.from_params(self)

    def as_dict(self):
        return {"a": self.a, "b": self.b, "beta": self.beta, "eps": self.eps}


@dataclass(frozen=True)
class DerivedConstants:
    omega: float
    beta0: float
    beta1: float
    rho: float
    rho_kind: str  # "oscillatory", "critical" or "hyperbolic"

    @classmethod
    def from_params(cls, p):
        q = p.q
        if q > 0:
            kind = "oscillatory"
        elif q < 0:
            kind = "hyperbolic"
        else:
            kind = "critical"
        return cls(p.omega, beta0(p), beta1(p), math.sqrt(abs(q)), kind)


def memory_ratio(p):
    """``pi sqrt(b) / omega``, taken as 0 when b = 0."""
    if p.b == 0:
        return 0.0
    if p.omega == 0:
        return math.inf
    return math.pi * math.sqrt(p.b) / p.omega


def beta0(p):
    """Bound on the time-integrated absolute mass of K."""
    if p.a == 0:
        return math.inf
    if p.b == 0:
        return 1.0 / p.a
    if p.beta == 0:
        return math.inf
    ab = p.a * p.beta
    return 1.0 / p.a + math.pi * math.sqrt(p.b) * (p.a + p.beta) / (2.0 * ab ** 1.5)


def beta1(p):
    """``1 / (a beta)``: the integral of decay_E over (0, inf)."""
    if p.a == 0 or p.beta == 0:
        return math.inf
    return 1.0 / (p.a * p.beta)


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("t must be finite and >= 0")
    return t


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def decay_E(t, p):
    """``(exp(-beta t) - exp(-a t)) / (a - beta)``, limit ``t exp(-a t)`` at a = beta."""
    t = _check_t(t)
    d = p.a - p.beta
    if d == 0:
        return _out(t * np.exp(-p.a * t))
    # exp(-slow t) (1 - exp(-|d| t)) / |d| with the slower rate factored out: no overflow
    slow = min(p.a, p.beta)
    ad = abs(d)
    return _out(np.exp(-slow * t) * (-np.expm1(-ad * t)) / ad)


def _sin_cos_q(q, t):
    """S = sin(sqrt(q) t)/sqrt(q) and C = cos(sqrt(q) t), continued to q <= 0."""
    t = np.asarray(t, dtype=float)
    z = q * t * t
    S = np.empty_like(t)
    C = np.empty_like(t)
    small = np.abs(z) < _SERIES_SWITCH
    if np.any(small):
        ts = t[small]
        zs = z[small]
        # S = t sum (-z)^n/(2n+1)!, C = sum (-z)^n/(2n)!
        s_term = np.ones_like(ts)
        c_term = np.ones_like(ts)
        s_sum = np.ones_like(ts)
        c_sum = np.ones_like(ts)
        for n in range(1, 10):
            s_term = s_term * (-zs) / ((2 * n) * (2 * n + 1))
            c_term = c_term * (-zs) / ((2 * n - 1) * (2 * n))
            s_sum += s_term
            c_sum += c_term
        S[small] = ts * s_sum
        C[small] = c_sum
    big = ~small
    if np.any(big):
        tb = t[big]
        r = math.sqrt(abs(q))
        if q > 0:
            S[big] = np.sin(r * tb) / r
            C[big] = np.cos(r * tb)
        else:
            S[big] = np.sinh(r * tb) / r
            C[big] = np.cosh(r * tb)
    return S, C


def _scalar_or_array(t, arr):
    return float(arr[0]) if np.ndim(t) == 0 else arr


def chi(t, p):
    """``exp(-k t) sin(rho t) / rho``; solves chi'' + 2k chi' + (a beta + b) chi = 0."""
    t_in = t
    t = np.atleast_1d(_check_t(t))
    S, _ = _sin_cos_q(p.q, t)
    return _scalar_or_array(t_in, np.exp(-p.k * t) * S)


def chi_prime(t, p):
    t_in = t
    t = np.atleast_1d(_check_t(t))
    S, C = _sin_cos_q(p.q, t)
    return _scalar_or_array(t_in, np.exp(-p.k * t) * (C - p.k * S))


def mass_K_exact(t, p):
    """Exact whole-line mass of K: ``chi'(t) + beta chi(t)``; equals 1 at t = 0."""
    t_in = t
    t = np.atleast_1d(_check_t(t))
    S, C = _sin_cos_q(p.q, t)
    return _scalar_or_array(t_in, np.exp(-p.k * t) * (C + 0.5 * (p.beta - p.a) * S))


def mass_K1_exact(t, p):
    """Exact whole-line mass of K1, which is chi(t)."""
    return chi(t, p)


def _gl_time_convolution(t, p, rate, func, nodes=48):
    # int_0^t exp(-rate (t - s)) func(s) ds for smooth func, Gauss-Legendre in s
    t = np.atleast_1d(t)
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        s = 0.5 * ti * (xg + 1.0)
        out[i] = 0.5 * ti * np.sum(wg * np.exp(-rate * (ti - s)) * func(s, p))
    return out


def mass_K2_exact(t, p):
    """Whole-line mass of K2 = exp(-beta t) * K1 (time convolution)."""
    t_in = t
    t = np.atleast_1d(_check_t(t))
    # closed form cancels when b t^2 is small
    direct = p.b * t * t > 1e-3
    out = np.empty_like(t)
    if np.any(direct):
        td = t[direct]
        S, C = _sin_cos_q(p.q, td)
        out[direct] = (np.exp(-p.beta * td) - np.exp(-p.k * td) * (C + 0.5 * (p.a - p.beta) * S)) / p.b
    if not np.all(direct):
        out[~direct] = _gl_time_convolution(t[~direct], p, p.beta, chi)
    return _scalar_or_array(t_in, out)


def chi_integral(t, p):
    """``int_0^t chi``; with mass_K_exact this gives the space-time mass of K."""
    t_in = t
    t = np.atleast_1d(_check_t(t))
    c0 = p.a * p.beta + p.b
    direct = c0 * t * t > 1e-3
    out = np.empty_like(t)
    if np.any(direct):
        td = t[direct]
        S, C = _sin_cos_q(p.q, td)
        out[direct] = (1.0 - np.exp(-p.k * td) * (C + p.k * S)) / c0
    if not np.all(direct):
        out[~direct] = _gl_time_convolution(t[~direct], p, 0.0, chi)
    return _scalar_or_array(t_in, out)


def mass_K_integral(t, p):
    """``int_0^t mass_K_exact = chi(t) + beta int_0^t chi``."""
    t_in = t
    t = np.atleast_1d(_check_t(t))
    out = np.atleast_1d(chi(t, p)) + p.beta * np.atleast_1d(chi_integral(t, p))
    return _scalar_or_array(t_in, out)


def sigma(s, p):
    """Positive root of ``s + a + b / (s + beta)`` for real s > max(-a, -beta)."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= max(-p.a, -p.beta)):
        raise DomainError(f"s must exceed max(-a, -beta) = {max(-p.a, -p.beta)}")
    return _out(np.sqrt(s_arr + p.a + p.b / (s_arr + p.beta)))
