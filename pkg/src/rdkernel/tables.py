"""Hat-function weight tables: exact convolution weights for piecewise-linear data.

For a grid of spacing h and lag s, entry ``[p]`` of a table is

    W(p h, s) = int hat_h(xi) kernel(p h - xi, s) d xi,

so that ``(f * kernel)(x_i) = sum_j f_j W((i - j) h, s)`` holds exactly for the
piecewise-linear interpolant of f.  Tables are symmetric in p and stored for
``p = 0..M``.  The Gaussian part is integrated in closed form; the memory
integral over ``y = s u^2`` uses a fixed composite Gauss-Legendre rule in u.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._accel import njit, pick
from .specfun import j0_j1x_scalar, _map_np_j0, _map_np_j1x

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
# B(w) underflows to 0 beyond this argument
_B_CUTOFF = 38.0


@dataclass(frozen=True)
class TableRule:
    panels: int = 8
    nodes: int = 16

    def nodes_weights(self):
        x, w = np.polynomial.legendre.leggauss(self.nodes)
        edges = np.linspace(0.0, 1.0, self.panels + 1)
        u = np.concatenate([0.5 * (lo + hi) + 0.5 * (hi - lo) * x for lo, hi in zip(edges[:-1], edges[1:])])
        wt = np.concatenate([0.5 * (hi - lo) * w for lo, hi in zip(edges[:-1], edges[1:])])
        return u, wt


def truncation_radius(s, eps):
    """Gaussian tail of the kernel beyond this radius is below ~1e-14 of its mass."""
    return 8.0 * math.sqrt(2.0 * eps * s)


@njit
def _ramp(w):
    # B(w) = E[(X - w)+] for standard normal X
    if w > _B_CUTOFF:
        return 0.0
    return _INV_SQRT_2PI * math.exp(-0.5 * w * w) - w * 0.5 * math.erfc(w * _INV_SQRT2)


@njit
def _hat_gauss_nb(y, eps, h, M, out, bvals):
    """out[p] = hat_h convolved with the heat kernel of time y, at lag p h."""
    if y <= 0.0:
        out[:] = 0.0
        out[0] = 1.0
        return
    sig = math.sqrt(2.0 * eps * y)
    r = h / sig
    last = M + 1
    for p in range(M + 2):
        w = p * r
        if w > _B_CUTOFF:
            bvals[p:] = 0.0
            last = p
            break
        bvals[p] = _ramp(w)
    out[0] = 1.0 + 2.0 * (bvals[1] - bvals[0]) / r
    for p in range(1, M + 1):
        if p - 1 >= last:
            out[p:] = 0.0
            break
        out[p] = (bvals[p - 1] - 2.0 * bvals[p] + bvals[p + 1]) / r


@njit
def _tables_nb(lags, M, h, eps, a, b, beta, un, uw):
    n = lags.shape[0]
    wk = np.zeros((n, M + 1))
    wk1 = np.zeros((n, M + 1))
    wk2 = np.zeros((n, M + 1))
    hvals = np.zeros(M + 1)
    bvals = np.zeros(M + 2)
    for i in range(n):
        s = lags[i]
        if s <= 0.0:
            wk[i, 0] = 1.0
            continue
        _hat_gauss_nb(s, eps, h, M, hvals, bvals)
        es = math.exp(-a * s)
        for p in range(M + 1):
            wk[i, p] = es * hvals[p]
        for j in range(un.shape[0]):
            u = un[j]
            y = s * u * u
            rest = s - y
            wgt = uw[j] * 2.0 * s * u * math.exp(-a * y - beta * rest)
            z = 2.0 * math.sqrt(b * y * rest)
            j0, jx = j0_j1x_scalar(z)
            ck = wgt * b * y * jx
            c1 = wgt * j0
            c2 = wgt * rest * jx
            _hat_gauss_nb(y, eps, h, M, hvals, bvals)
            for p in range(M + 1):
                hv = hvals[p]
                if hv == 0.0:
                    break
                wk[i, p] -= ck * hv
                wk1[i, p] += c1 * hv
                wk2[i, p] += c2 * hv
    return wk, wk1, wk2


def _ramp_np(w):
    from scipy.special import erfc

    w = np.minimum(w, _B_CUTOFF + 1.0)
    out = _INV_SQRT_2PI * np.exp(-0.5 * w * w) - w * 0.5 * erfc(w * _INV_SQRT2)
    return np.where(w > _B_CUTOFF, 0.0, out)


def _hat_gauss_np(y, eps, h, M):
    """Rows of hat-Gaussian weights for an array of times y: shape (len(y), M+1)."""
    y = np.asarray(y, dtype=float)
    out = np.zeros((y.size, M + 1))
    zero = y <= 0
    out[zero, 0] = 1.0
    pos = ~zero
    if np.any(pos):
        r = h / np.sqrt(2.0 * eps * y[pos])
        bv = _ramp_np(r[:, None] * np.arange(M + 2)[None, :])
        out[pos, 0] = 1.0 + 2.0 * (bv[:, 1] - bv[:, 0]) / r
        out[pos, 1:] = (bv[:, :-2] - 2.0 * bv[:, 1:-1] + bv[:, 2:])[:, :M] / r[:, None]
    return out


def _tables_np(lags, M, h, eps, a, b, beta, un, uw):
    n = lags.shape[0]
    wk = np.zeros((n, M + 1))
    wk1 = np.zeros((n, M + 1))
    wk2 = np.zeros((n, M + 1))
    for i, s in enumerate(lags):
        if s <= 0.0:
            wk[i, 0] = 1.0
            continue
        wk[i] = math.exp(-a * s) * _hat_gauss_np(np.array([s]), eps, h, M)[0]
        y = s * un * un
        rest = s - y
        wgt = uw * 2.0 * s * un * np.exp(-a * y - beta * rest)
        z = 2.0 * np.sqrt(b * y * rest)
        jx = _map_np_j1x(z)
        hv = _hat_gauss_np(y, eps, h, M)
        wk[i] -= (wgt * b * y * jx) @ hv
        wk1[i] = (wgt * _map_np_j0(z)) @ hv
        wk2[i] = (wgt * rest * jx) @ hv
    return wk, wk1, wk2


_tables = pick(_tables_nb, _tables_np)


def hat_tables(lags, M, h, p, rule=TableRule(), backend=None):
    """Weight tables for K, K1, K2 at each lag; each of shape (len(lags), M + 1).

    ``backend`` forces "numba" or "numpy"; default follows the package switch.
    """
    lags = np.ascontiguousarray(lags, dtype=float)
    un, uw = rule.nodes_weights()
    fn = {"numba": _tables_nb, "numpy": _tables_np, None: _tables}[backend]
    return fn(lags, int(M), float(h), float(p.eps), float(p.a), float(p.b), float(p.beta), un, uw)


def full_stencil(row):
    """Symmetric table row ``W[0..M]`` to the full stencil ``W[-M..M]``."""
    row = np.asarray(row)
    return np.concatenate([row[..., :0:-1], row], axis=-1)
