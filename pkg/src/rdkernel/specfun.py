"""Bessel functions J0, J1 and modified Bessel functions I0, I1 of real argument.

Regions (identical in the numba and numpy backends):

* ``|x| <= 5``: power series.
* ``5 < |x| < 25``: Miller backward recurrence normalised with
  ``J0 + 2 (J2 + J4 + ...) = 1`` (J only).
* ``|x| >= 25``: Hankel asymptotic expansion, 30 terms (J only).
* I0, I1: power series for ``|x| <= 30``, asymptotic expansion beyond; the
  scaled forms ``i0e = exp(-|x|) I0`` never overflow.
"""

import math

import numpy as np

from ._accel import njit, pick
from .errors import DomainError, RangeError

SERIES_LIMIT = 5.0
ASYMPTOTIC_LIMIT = 25.0
I_SERIES_LIMIT = 30.0
#: ``bessel_i0`` / ``bessel_i1`` raise :class:`RangeError` above this magnitude.
OVERFLOW_THRESHOLD = 700.0

_MILLER_START = 80
_ASYMPTOTIC_TERMS = 30
_SERIES_TERMS = 45
_I_SERIES_TERMS = 120
_TWO_OVER_PI = 2.0 / math.pi


# ---------------------------------------------------------------------------
# scalar kernels (compiled by numba when available)


@njit
def _j0_series(x):
    q = 0.25 * x * x
    term = 1.0
    s = 1.0
    for k in range(1, _SERIES_TERMS):
        term *= -q / (k * k)
        s += term
        if abs(term) < 1e-17 * abs(s):
            break
    return s


@njit
def _j1x_series(x):
    # 2 J1(x) / x
    q = 0.25 * x * x
    term = 1.0
    s = 1.0
    for k in range(1, _SERIES_TERMS):
        term *= -q / (k * (k + 1))
        s += term
        if abs(term) < 1e-17 * abs(s):
            break
    return s


@njit
def _miller(x):
    """Return (J0(x), J1(x)) for x > 0 by downward recurrence."""
    jp1 = 0.0
    j = 1e-30
    norm = 0.0
    j1 = 0.0
    for k in range(_MILLER_START, 0, -1):
        jm1 = (2.0 * k / x) * j - jp1
        jp1 = j
        j = jm1
        # j now holds J_{k-1}
        if k - 1 == 1:
            j1 = j
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += j
        if abs(j) > 1e250:
            j *= 1e-250
            jp1 *= 1e-250
            norm *= 1e-250
            j1 *= 1e-250
    norm = j + 2.0 * norm
    return j / norm, j1 / norm


@njit
def _hankel(mu, x):
    """Asymptotic P, Q for order with 4 nu^2 = mu."""
    p = 1.0
    q = 0.0
    t = 1.0
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        t *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 1:
            q += sign * t
        else:
            p += sign * t
    return p, q


@njit
def j0_scalar(x):
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        return _j0_series(ax)
    if ax < ASYMPTOTIC_LIMIT:
        return _miller(ax)[0]
    p, q = _hankel(0.0, ax)
    chi = ax - 0.25 * math.pi
    return math.sqrt(_TWO_OVER_PI / ax) * (p * math.cos(chi) - q * math.sin(chi))


@njit
def j1_scalar(x):
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        return 0.5 * x * _j1x_series(ax)
    if ax < ASYMPTOTIC_LIMIT:
        v = _miller(ax)[1]
    else:
        p, q = _hankel(4.0, ax)
        chi = ax - 0.75 * math.pi
        v = math.sqrt(_TWO_OVER_PI / ax) * (p * math.cos(chi) - q * math.sin(chi))
    return v if x >= 0.0 else -v


@njit
def j1x_scalar(x):
    """2 J1(x) / x, continuous at 0 where it equals 1."""
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        return _j1x_series(ax)
    return 2.0 * j1_scalar(ax) / ax


@njit
def j0_j1x_scalar(x):
    """``(J0(x), 2 J1(x) / x)`` sharing one recurrence or asymptotic evaluation."""
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        return _j0_series(ax), _j1x_series(ax)
    if ax < ASYMPTOTIC_LIMIT:
        j0, j1 = _miller(ax)
        return j0, 2.0 * j1 / ax
    return j0_scalar(ax), j1x_scalar(ax)


@njit
def _i_series_scaled(ax, order):
    q = 0.25 * ax * ax
    term = 1.0
    s = 1.0
    for k in range(1, _I_SERIES_TERMS):
        term *= q / (k * (k + order))
        s += term
        if term < 1e-17 * s:
            break
    if order == 1:
        s *= 0.5 * ax
    return s * math.exp(-ax)


@njit
def _i_asymptotic_scaled(ax, mu):
    s = 1.0
    t = 1.0
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        t *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * ax)
        s += t
    return s / math.sqrt(2.0 * math.pi * ax)


@njit
def i0e_scalar(x):
    ax = abs(x)
    if ax <= I_SERIES_LIMIT:
        return _i_series_scaled(ax, 0)
    return _i_asymptotic_scaled(ax, 0.0)


@njit
def i1e_scalar(x):
    ax = abs(x)
    if ax <= I_SERIES_LIMIT:
        v = _i_series_scaled(ax, 1)
    else:
        v = _i_asymptotic_scaled(ax, 4.0)
    return v if x >= 0.0 else -v


# ---------------------------------------------------------------------------
# array kernels: numba loops


@njit
def _map_nb_j0(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = j0_scalar(x[i])
    return out


@njit
def _map_nb_j1(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = j1_scalar(x[i])
    return out


@njit
def _map_nb_j1x(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = j1x_scalar(x[i])
    return out


@njit
def _map_nb_i0e(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = i0e_scalar(x[i])
    return out


@njit
def _map_nb_i1e(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = i1e_scalar(x[i])
    return out


# ---------------------------------------------------------------------------
# array kernels: vectorised numpy


def _np_series(ax, order):
    q = 0.25 * ax * ax
    term = np.ones_like(ax)
    s = np.ones_like(ax)
    for k in range(1, _SERIES_TERMS):
        term = term * (-q / (k * (k + order)))
        s = s + term
    return s


def _np_miller(ax):
    jp1 = np.zeros_like(ax)
    j = np.full_like(ax, 1e-30)
    norm = np.zeros_like(ax)
    j1 = np.zeros_like(ax)
    for k in range(_MILLER_START, 0, -1):
        jm1 = (2.0 * k / ax) * j - jp1
        jp1 = j
        j = jm1
        if k - 1 == 1:
            j1 = j.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm = norm + j
        big = np.abs(j) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            j, jp1, norm, j1 = j * scale, jp1 * scale, norm * scale, j1 * scale
    norm = j + 2.0 * norm
    return j / norm, j1 / norm


def _np_hankel(mu, ax):
    p = np.ones_like(ax)
    q = np.zeros_like(ax)
    t = np.ones_like(ax)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        t = t * ((mu - (2 * k - 1) ** 2) / (k * 8.0 * ax))
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 1:
            q = q + sign * t
        else:
            p = p + sign * t
    return p, q


def _np_j(x, order):
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= SERIES_LIMIT
    mid = (ax > SERIES_LIMIT) & (ax < ASYMPTOTIC_LIMIT)
    large = ax >= ASYMPTOTIC_LIMIT
    if small.any():
        s = _np_series(ax[small], order)
        out[small] = s if order == 0 else 0.5 * ax[small] * s
    if mid.any():
        out[mid] = _np_miller(ax[mid])[order]
    if large.any():
        xl = ax[large]
        p, q = _np_hankel(4.0 * order * order, xl)
        chi = xl - (0.5 * order + 0.25) * math.pi
        out[large] = np.sqrt(_TWO_OVER_PI / xl) * (p * np.cos(chi) - q * np.sin(chi))
    if order == 1:
        out = np.where(x < 0.0, -out, out)
    return out


def _map_np_j0(x):
    return _np_j(x, 0)


def _map_np_j1(x):
    return _np_j(x, 1)


def _map_np_j1x(x):
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= SERIES_LIMIT
    out[small] = _np_series(ax[small], 1)
    big = ~small
    if big.any():
        out[big] = 2.0 * _np_j(ax[big], 1) / ax[big]
    return out


def _np_ie(x, order):
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= I_SERIES_LIMIT
    if small.any():
        xs = ax[small]
        q = 0.25 * xs * xs
        term = np.ones_like(xs)
        s = np.ones_like(xs)
        for k in range(1, _I_SERIES_TERMS):
            term = term * (q / (k * (k + order)))
            s = s + term
        if order == 1:
            s = s * 0.5 * xs
        out[small] = s * np.exp(-xs)
    big = ~small
    if big.any():
        xb = ax[big]
        mu = 4.0 * order * order
        s = np.ones_like(xb)
        t = np.ones_like(xb)
        for k in range(1, _ASYMPTOTIC_TERMS + 1):
            t = t * (-(mu - (2 * k - 1) ** 2) / (k * 8.0 * xb))
            s = s + t
        out[big] = s / np.sqrt(2.0 * math.pi * xb)
    if order == 1:
        out = np.where(x < 0.0, -out, out)
    return out


def _map_np_i0e(x):
    return _np_ie(x, 0)


def _map_np_i1e(x):
    return _np_ie(x, 1)


NUMBA_IMPLS = {
    "j0": _map_nb_j0, "j1": _map_nb_j1, "j1x": _map_nb_j1x,
    "i0e": _map_nb_i0e, "i1e": _map_nb_i1e,
}
NUMPY_IMPLS = {
    "j0": _map_np_j0, "j1": _map_np_j1, "j1x": _map_np_j1x,
    "i0e": _map_np_i0e, "i1e": _map_np_i1e,
}
_ACTIVE = {name: pick(NUMBA_IMPLS[name], NUMPY_IMPLS[name]) for name in NUMBA_IMPLS}


# ---------------------------------------------------------------------------
# public surface


def _apply(name, x, limit=None):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: argument must be finite")
    if limit is not None and arr.size and np.max(np.abs(arr)) > limit:
        raise RangeError(f"{name}: |x| exceeds overflow threshold {limit}")
    flat = np.ascontiguousarray(arr.ravel())
    out = _ACTIVE[name if limit is None else name + "e"](flat).reshape(arr.shape)
    if limit is not None:
        out = out * np.exp(np.abs(arr))
    if out.ndim == 0:
        return float(out)
    return out


def bessel_j0(x):
    """Bessel function of the first kind, order 0."""
    return _apply("j0", x)


def bessel_j1(x):
    """Bessel function of the first kind, order 1."""
    return _apply("j1", x)


def bessel_j1_over_x(x):
    """``2 J1(x) / x`` with the removable singularity filled in (value 1 at 0)."""
    return _apply("j1x", x)


def bessel_i0(x):
    """Modified Bessel function I0; raises RangeError for |x| > OVERFLOW_THRESHOLD."""
    return _apply("i0", x, OVERFLOW_THRESHOLD)


def bessel_i1(x):
    """Modified Bessel function I1; raises RangeError for |x| > OVERFLOW_THRESHOLD."""
    return _apply("i1", x, OVERFLOW_THRESHOLD)


def bessel_i0e(x):
    """Exponentially scaled ``exp(-|x|) I0(x)``."""
    return _apply("i0e", x)


def bessel_i1e(x):
    """Exponentially scaled ``exp(-|x|) I1(x)``."""
    return _apply("i1e", x)
