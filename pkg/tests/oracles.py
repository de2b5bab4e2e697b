"""Reference implementations that share no numerics with the package.

Bessel values come from mpmath; kernel values from mpmath tanh-sinh quadrature
of the defining y-integral (no substitution); masses from the matrix
exponential of the spatially constant ODE system.
"""

import mpmath as mp

mp.mp.dps = 30


def j0(x):
    return float(mp.besselj(0, x))


def j1(x):
    return float(mp.besselj(1, x))


def i0(x):
    return float(mp.besseli(0, x))


def i1(x):
    return float(mp.besseli(1, x))


def _psi(x, y, p):
    return mp.exp(-x * x / (4 * p.eps * y) - p.a * y) / (2 * mp.sqrt(mp.pi * p.eps * y))


def _j1x(z):
    return mp.mpf(1) if z == 0 else 2 * mp.besselj(1, z) / z


def kernel(kind, x, t, p):
    """K, K1 or K2 at (x, t) by extended-precision quadrature in y."""
    x, t = mp.mpf(x), mp.mpf(t)
    a, b, beta = mp.mpf(p.a), mp.mpf(p.b), mp.mpf(p.beta)

    def z(y):
        return 2 * mp.sqrt(b * y * (t - y))

    if kind == "K":
        mem = mp.quad(lambda y: _psi(x, y, p) * b * y * _j1x(z(y)) * mp.exp(-beta * (t - y)), [0, t / 2, t])
        return float(_psi(x, t, p) - mem)
    if kind == "K1":
        return float(mp.quad(lambda y: mp.exp(-beta * (t - y)) * _psi(x, y, p) * mp.besselj(0, z(y)), [0, t / 2, t]))
    return float(mp.quad(lambda y: mp.exp(-beta * (t - y)) * _psi(x, y, p) * (t - y) * _j1x(z(y)), [0, t / 2, t]))


def masses(t, p):
    """Spatially constant solution of u' = -a u - b w, w' = -beta w + u, u(0) = 1.

    Returns a dict with the whole-line masses of K (u), K1 (w), K2 and the
    running time integrals of the masses of K and K1.
    """
    a, b, beta = mp.mpf(p.a), mp.mpf(p.b), mp.mpf(p.beta)
    # state: u, w, z (= exp(-beta t) * w), U = int u, W = int w
    A = mp.matrix([
        [-a, -b, 0, 0, 0],
        [1, -beta, 0, 0, 0],
        [0, 1, -beta, 0, 0],
        [1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0],
    ])
    v = mp.expm(A * mp.mpf(t)) * mp.matrix([1, 0, 0, 0, 0])
    return {"K": float(v[0]), "K1": float(v[1]), "K2": float(v[2]), "int_K": float(v[3]), "int_K1": float(v[4])}


def heat_gaussian(x, t, s2, eps, a):
    """``exp(-a t)`` times N(0, s2) convolved with the heat kernel of diffusivity eps."""
    var = s2 + 2 * eps * t
    return float(mp.exp(-a * t) * mp.exp(-mp.mpf(x) ** 2 / (2 * var)) / mp.sqrt(2 * mp.pi * var))
