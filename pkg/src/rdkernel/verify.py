"""Registry of executable checks on the kernel identities, bounds and estimates.

Each check takes a parameter set and a :class:`VerifyConfig` and returns
:class:`CheckReport` objects.  Bound checks are one-sided (``value <= bound +
tol``), identity checks two-sided (``|lhs - rhs| <= tol``).
"""

from dataclasses import asdict, dataclass, field
import json
import math

import numpy as np

from .convolve import Grid, spatial_convolve
from .errors import QuadratureError
from .fhn import FHNParams, fhn_apriori_bounds, phi_reaction, solve_fhn
from .kernels import (
    PDE_QUAD,
    QuadSpec,
    abs_mass_bound_K,
    abs_mass_bound_K_envelope,
    abs_mass_bound_K_relaxed,
    kernel_bound,
    kernel_values,
    pde_residual,
)
from .model import ModelParams, beta0, beta1, chi, decay_E, mass_K2_exact, mass_K_exact, sigma
from .quadrature import integrate, integrate_semi_infinite
from .solver import IVProblem, SolverConfig, apriori_bound, picard_solve

BATTERIES = {
    "default": [(1.0, 1.0, 1.0, 1.0), (1.0, 2.0, 0.5, 1.0), (2.0, 1.0, 3.0, 0.25)],
    "degenerate": [
        (1.0, 1.0, 1.0, 1.0),   # a = beta
        (2.0, 0.5, 2.0, 0.5),   # a = beta
        (1.0, 1.0, 3.0, 1.0),   # 4b = (a - beta)^2
        (1.0, 0.5, 3.0, 1.0),   # 4b < (a - beta)^2
        (1.0, 0.0, 2.0, 1.0),   # b = 0
    ],
}
BATTERIES["full"] = list(dict.fromkeys(BATTERIES["default"] + BATTERIES["degenerate"]))


def battery(name):
    if name not in BATTERIES:
        raise KeyError(f"unknown battery {name!r}; choose from {sorted(BATTERIES)}")
    return [ModelParams(*row) for row in BATTERIES[name]]


@dataclass
class CheckReport:
    name: str
    params: dict
    kind: str  # "identity", "bound" or "rate"
    margin: float
    tolerance: float
    passed: bool
    points: list = field(default_factory=list)
    detail: str = ""

    def to_json(self):
        d = asdict(self)
        d["margin"] = _finite(d["margin"])
        d["tolerance"] = _finite(d["tolerance"])
        return json.dumps(d, sort_keys=True)


def _finite(v):
    return v if math.isfinite(v) else repr(v)


def identity_report(name, p, err, tol, points, detail=""):
    return CheckReport(name, p.as_dict(), "identity", float(err), float(tol), bool(err <= tol), points, detail)


def bound_report(name, p, slack, tol, points, detail=""):
    """``slack = min(bound - value)``; passes when ``slack >= -tol``."""
    return CheckReport(name, p.as_dict(), "bound", float(slack), float(tol), bool(slack >= -tol), points, detail)


@dataclass
class VerifyConfig:
    n_random: int = 200
    seed: int = 20240611
    fault: float = 0.0  # relative perturbation injected into K values
    double_integral_horizon: float = 20.0


class KernelSource:
    """Kernel values as seen by the checks, optionally with an injected fault."""

    def __init__(self, fault=0.0):
        self.fault = fault

    def values(self, x, t, p, kinds=("K", "K1", "K2"), spec=None, weights=None):
        kw = {} if spec is None else {"spec": spec}
        vals, err = kernel_values(x, t, p, kinds, weights=weights, **kw)
        if self.fault and "K" in vals:
            vals["K"] = vals["K"] * (1.0 + self.fault)
        return vals, err


# -- spatial mass quadrature --------------------------------------------------

def _half_line_rule(panels=20, nodes=20):
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, 1.0, panels + 1)
    v = np.concatenate([0.5 * (lo + hi) + 0.5 * (hi - lo) * xg for lo, hi in zip(edges[:-1], edges[1:])])
    w = np.concatenate([0.5 * (hi - lo) * wg for lo, hi in zip(edges[:-1], edges[1:])])
    return v, w


def spatial_masses(src, t, p, kinds=("K", "K1", "K2")):
    """Signed and absolute whole-line masses of each kernel at the times t.

    Uses symmetry and a composite Gauss rule on ``[0, 14 sqrt(eps t)]``, beyond
    which the Gaussian envelope is below 1e-21.  Returns
    ``({kind: signed}, {kind: absolute}, error_estimate)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    v, w = _half_line_rule()
    X = 14.0 * np.sqrt(p.eps * t)
    xx = X[:, None] * v[None, :]
    tt = np.broadcast_to(t[:, None], xx.shape)
    vals, err = src.values(xx, tt, p, kinds)
    signed = {k: 2.0 * X * (vals[k] @ w) for k in kinds}
    absolute = {k: 2.0 * X * (np.abs(vals[k]) @ w) for k in kinds}
    return signed, absolute, float(err) * float(np.max(2.0 * X))


# -- checks -----------------------------------------------------------------

LAPLACE_R = (0.1, 1.0, 3.0)
LAPLACE_S = (0.5, 1.0, 5.0)


def laplace_rhs(r, s, p):
    sg = sigma(s, p)
    return math.exp(-r * sg) / (2.0 * math.sqrt(p.eps) * sg)


def laplace_lhs(r, s, p, src=KernelSource(), rel_tol=1e-9):
    """``int_0^inf exp(-s t) K(r sqrt(eps), t) dt`` by chunked quadrature."""
    x = r * math.sqrt(p.eps)
    spec_in = QuadSpec(rel_tol=1e-12, abs_tol=1e-18, max_subdivisions=4000)

    def f(t):
        t = np.asarray(t, dtype=float)
        w = np.exp(-s * t)
        vals, _ = src.values(np.full_like(t, x), t, p, ("K",), spec_in, weights=w)
        return w * vals["K"]

    lam = s + p.omega
    scale = laplace_rhs(r, s, p)

    def envelope(T):
        return float(np.exp(-s * T) * kernel_bound(0.0, T, p))

    outer = QuadSpec(rel_tol=rel_tol, abs_tol=1e-3 * rel_tol * scale, max_subdivisions=2000,
                     endpoint_weights="inv_sqrt_left")
    res = integrate_semi_infinite(f, 0.5 * lam, outer, min_length=max(2.0 / lam, x * x / p.eps), envelope=envelope)
    return res.value, res.error_estimate


def check_laplace_transform(p, cfg, src, rs=None, tol=1e-6):
    """Numerical Laplace transform of K in t against ``exp(-r sigma) / (2 sqrt(eps) sigma)``."""
    rs = rs or [(r, s) for r in LAPLACE_R for s in LAPLACE_S]
    worst, pts = 0.0, []
    for r, s in rs:
        rhs = laplace_rhs(r, s, p)
        try:
            lhs, est = laplace_lhs(r, s, p, src)
        except QuadratureError as e:
            return [CheckReport("laplace_transform", p.as_dict(), "identity", math.inf, tol, False,
                                [{"r": r, "s": s}], f"inconclusive: {e}")]
        rel = abs(lhs - rhs) / abs(rhs)
        worst = max(worst, rel)
        pts.append({"r": r, "s": s, "lhs": lhs, "rhs": rhs, "rel_err": rel})
    return [identity_report("laplace_transform", p, worst, tol, pts, "relative error")]


MASS_TIMES = (0.1, 0.5, 1.0, 2.0, 5.0)


def check_mass_identities(p, cfg, src, times=MASS_TIMES, tol=1e-6):
    """Whole-line masses of K, K1, K2 against their closed forms."""
    signed, _, est = spatial_masses(src, times, p)
    exact = {"K": mass_K_exact(np.array(times), p), "K1": chi(np.array(times), p),
             "K2": mass_K2_exact(np.array(times), p)}
    out = []
    for kind in ("K", "K1", "K2"):
        err = np.abs(signed[kind] - exact[kind])
        pts = [{"t": t, "quadrature": float(q), "closed_form": float(c)}
               for t, q, c in zip(times, signed[kind], exact[kind])]
        out.append(identity_report(f"mass_identities.{kind}", p, float(np.max(err)), tol, pts))
    return out


def check_time_convolution(p, cfg, src, points=((0.5, 1.0), (0.0, 0.7), (1.5, 2.0)), tol=1e-6):
    """``exp(-beta t)`` convolved in time with K equals K1, and with K1 equals K2."""
    out = []
    for inner, outer_kind in (("K", "K1"), ("K1", "K2")):
        worst, pts = 0.0, []
        for x, t in points:
            def f(tau, x=x, t=t):
                vals, _ = src.values(np.full_like(tau, x), tau, p, (inner,))
                return np.exp(-p.beta * (t - tau)) * vals[inner]

            lhs = integrate(f, 0.0, t, QuadSpec(rel_tol=1e-10, abs_tol=1e-13,
                                                endpoint_weights="inv_sqrt_left")).value
            rhs = float(src.values(x, t, p, (outer_kind,))[0][outer_kind])
            worst = max(worst, abs(lhs - rhs))
            pts.append({"x": x, "t": t, "lhs": lhs, "rhs": rhs})
        out.append(identity_report(f"time_convolution.{outer_kind}", p, worst, tol, pts))
    return out


def _sample_points(p, cfg, n=None):
    rng = np.random.default_rng(cfg.seed)
    n = n or cfg.n_random
    t = rng.uniform(0.02, 10.0, n)
    x = rng.uniform(-4.0, 4.0, n) * np.sqrt(p.eps * t)
    return x, t


def _sample_times(cfg, stream):
    """The listed mass times followed by ``n_random`` uniform times in [0.05, 10]."""
    rng = np.random.default_rng(cfg.seed + stream)
    return np.concatenate([MASS_TIMES, rng.uniform(0.05, 10.0, cfg.n_random)])


def check_kernel_estimates(p, cfg, src):
    """Pointwise Gaussian bound on |K| and the chain of absolute-mass bounds."""
    x, t = _sample_points(p, cfg)
    vals, err = src.values(x, t, p, ("K",))
    slack = kernel_bound(x, t, p) - np.abs(vals["K"])
    i = int(np.argmin(slack))
    out = [bound_report("kernel_estimates.pointwise", p, float(slack[i]), 1e-9 + err,
                        [{"x": float(x[i]), "t": float(t[i])}], f"{len(x)} random points")]
    ts = _sample_times(cfg, 1)
    signed, absolute, est = spatial_masses(src, ts, p, ("K",))
    tol = 1e-9 + est
    b221 = abs_mass_bound_K(ts, p)
    b223 = abs_mass_bound_K_relaxed(ts, p)
    b227 = abs_mass_bound_K_envelope(ts, p)
    for label, bound in (("bessel", b221), ("relaxed", b223), ("envelope", b227)):
        s = bound - absolute["K"]
        j = int(np.argmin(s))
        out.append(bound_report(f"kernel_estimates.abs_mass_{label}", p, float(s[j]), tol,
                                [{"t": float(ts[j])}], f"{len(ts)} random times"))
    chain = min(float(np.min(b223 - b221)), float(np.min(b227 - b223)))
    out.append(bound_report("kernel_estimates.bound_chain", p, chain, 1e-12, [], "bessel <= relaxed <= envelope"))
    return out


def check_mass_bounds(p, cfg, src):
    """Absolute mass of K1 below E(t); space-time absolute masses below beta0 and beta1."""
    ts = _sample_times(cfg, 2)
    _, absolute, est = spatial_masses(src, ts, p, ("K1",))
    s = np.asarray(decay_E(ts, p)) - absolute["K1"]
    j = int(np.argmin(s))
    out = [bound_report("mass_bounds.K1", p, float(s[j]), 1e-9 + est, [{"t": float(ts[j])}])]
    T = cfg.double_integral_horizon
    # graded panels in t: the masses vary fastest near 0
    edges = T * np.linspace(0.0, 1.0, 9) ** 2
    tg, wg = np.polynomial.legendre.leggauss(24)
    tn = np.concatenate([0.5 * (a + b) + 0.5 * (b - a) * tg for a, b in zip(edges[:-1], edges[1:])])
    tw = np.concatenate([0.5 * (b - a) * wg for a, b in zip(edges[:-1], edges[1:])])
    _, absolute, est = spatial_masses(src, tn, p, ("K", "K1"))
    dK = float(tw @ absolute["K"])
    dK1 = float(tw @ absolute["K1"])
    tol = 1e-9 + est * T
    out.append(bound_report("mass_bounds.spacetime_K", p, beta0(p) - dK, tol, [{"T": T, "value": dK}]))
    out.append(bound_report("mass_bounds.spacetime_K1", p, beta1(p) - dK1, tol, [{"T": T, "value": dK1}]))
    return out


def check_k2_mass_bound(p, cfg, src):
    """Absolute mass of K2 below t E(t)."""
    ts = _sample_times(cfg, 3)
    _, absolute, est = spatial_masses(src, ts, p, ("K2",))
    s = ts * np.asarray(decay_E(ts, p)) - absolute["K2"]
    j = int(np.argmin(s))
    return [bound_report("k2_mass_bound", p, float(s[j]), 1e-9 + est, [{"t": float(ts[j])}])]


# K has an |x|^3 term at the origin, so x = 0 is checked separately at first order
PDE_POINTS = ((0.7, 0.8), (0.3, 0.5), (1.2, 1.0), (0.5, 1.2), (2.0, 1.5))
PDE_STEPS = (1e-2, 5e-3, 2.5e-3)
PDE_REL_STEP = 1e-3
REL_POINT = (0.7, 0.8)
ORIGIN_STEPS = (1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4)


def richardson_ratios(p, points=PDE_POINTS, steps=PDE_STEPS):
    """Per point: (x, t, residuals over steps, successive ratios)."""
    rows = []
    for xs, t in points:
        x = xs * math.sqrt(p.eps)
        res = [pde_residual(x, t, p, h, PDE_QUAD)[0] for h in steps]
        ratios = [res[i] / res[i + 1] for i in range(len(res) - 1)]
        rows.append((x, t, res, ratios))
    return rows


def check_fundamental_solution(p, cfg, src, lo=3.5, hi=4.5, terminal_tol=1e-4, rel_tol=1e-5):
    """Finite-difference residual of the operator applied to K tends to zero.

    Second order away from the origin with terminal residual below
    ``terminal_tol * |K|``, first order at x = 0 when b > 0, and below
    ``rel_tol * |K|`` at ``REL_POINT`` with step ``PDE_REL_STEP``.
    """
    rows = richardson_ratios(p)
    pts = [{"x": x, "t": t, "residuals": res, "ratios": ratios} for x, t, res, ratios in rows]
    worst_ratio = max(abs(r - 4.0) for row in rows for r in row[3])
    ok_ratio = all(lo <= r <= hi for row in rows for r in row[3])
    out = [CheckReport("fundamental_solution.richardson", p.as_dict(), "rate", worst_ratio, 0.5, ok_ratio, pts)]
    terminal = 0.0
    for (xs, t), row in zip(PDE_POINTS, rows):
        k = src.values(xs * math.sqrt(p.eps), t, p, ("K",), PDE_QUAD)[0]["K"]
        terminal = max(terminal, abs(row[2][-1] / float(k)))
    out.append(identity_report("fundamental_solution.terminal", p, terminal, terminal_tol, [],
                               f"relative residual at h = {PDE_STEPS[-1]:g}"))
    (_, t0, res0, ratios0), = richardson_ratios(p, ((0.0, 0.6),), ORIGIN_STEPS)
    # the |x|^3 term disappears without memory
    expected = 2.0 if p.b > 0 else 4.0
    ok0 = abs(ratios0[-1] - expected) <= 0.1 * expected
    out.append(CheckReport("fundamental_solution.origin", p.as_dict(), "rate", float(ratios0[-1]),
                           0.1 * expected, ok0, [{"x": 0.0, "t": t0, "residuals": res0, "ratios": ratios0}],
                           f"expected ratio {expected:g}"))
    x, t = REL_POINT
    r, k = pde_residual(x * math.sqrt(p.eps), t, p, PDE_REL_STEP, PDE_QUAD)
    out.append(identity_report("fundamental_solution.residual", p, abs(r / k), rel_tol,
                               [{"x": x, "t": t, "h": PDE_REL_STEP}], "relative to |K|"))
    return out


def check_smoothness(p, cfg, src, points=((0.3, 0.5), (1.0, 1.0), (2.0, 2.0)), h=0.02):
    """Central differences of K in x converge at second order (K is smooth in x)."""
    worst, pts = math.inf, []
    for xs, t in points:
        x = xs * math.sqrt(p.eps)
        hs = np.array([h, h / 2, h / 4])
        xx = np.concatenate([x + hs, x - hs])
        vals, _ = src.values(xx, np.full_like(xx, t), p, ("K",), PDE_QUAD)
        d = (vals["K"][:3] - vals["K"][3:]) / (2 * hs)
        e1, e2 = abs(d[0] - d[1]), abs(d[1] - d[2])
        ratio = e1 / e2 if e2 > 1e-11 else math.inf
        worst = min(worst, ratio)
        pts.append({"x": x, "t": t, "ratio": ratio})
    # second order gives ratio 4; anything >= 3 shows a smooth first derivative
    return [CheckReport("smoothness", p.as_dict(), "rate", worst, 3.0, bool(worst >= 3.0), pts)]


def check_far_field_decay(p, cfg, src, times=(0.5, 1.0, 2.0), tol=1e-12):
    """K and its x-derivative are negligible beyond 12 sqrt(eps t); |K| stays under its envelope."""
    worst, pts = 0.0, []
    slack = math.inf
    for t in times:
        far = 12.0 * math.sqrt(p.eps * t)
        h = 1e-3 * math.sqrt(p.eps * t)
        xx = np.array([far, far + h, far - h, 2 * far])
        vals, _ = src.values(xx, np.full_like(xx, t), p, ("K",))
        k = vals["K"]
        deriv = abs(k[1] - k[2]) / (2 * h)
        worst = max(worst, abs(k[0]), abs(k[3]), deriv)
        ray = np.linspace(0.0, far, 41)
        rv, err = src.values(ray, np.full_like(ray, t), p, ("K",))
        slack = min(slack, float(np.min(kernel_bound(ray, t, p) - np.abs(rv["K"]))) + err)
        pts.append({"t": t, "x_far": far, "K": float(k[0]), "dK": float(deriv)})
    return [
        identity_report("far_field_decay.tail", p, worst, tol, pts),
        bound_report("far_field_decay.envelope", p, slack, 1e-9, []),
    ]


def check_initial_trace(p, cfg, src, delta=0.5, times=(1e-2, 1e-3, 1e-4)):
    """K vanishes away from the origin as t -> 0 and acts as the identity on smooth data."""
    x = delta * math.sqrt(p.eps)
    vals, _ = src.values(np.full(len(times), x), np.array(times), p, ("K",))
    k = np.abs(vals["K"])
    monotone = bool(np.all(np.diff(k) <= 0))
    out = [CheckReport("initial_trace.away_from_origin", p.as_dict(), "bound", float(1e-8 - k[-1]), 0.0,
                       bool(monotone and k[-1] < 1e-8), [{"t": t, "K": float(v)} for t, v in zip(times, k)])]
    grid = Grid(-5.0, 5.0, 1001)
    t = 1e-4
    conv = spatial_convolve(np.cos, "K", t, grid, p, refine=2)
    err = float(np.max(np.abs(conv.values - np.cos(grid.x))))
    # exact: cos(x) times the transformed mass at wavenumber 1, within O(t) of cos(x)
    out.append(identity_report("initial_trace.identity", p, err, 10 * t * (1 + p.a + p.eps + p.b), []))
    return out


def check_apriori_solution(p, cfg, src):
    """Solutions of a nonlinear and a forced linear problem stay below the a-priori bound."""
    grid = Grid.from_spacing(-12.0, 12.0, 0.1)
    gauss = lambda x: np.exp(-x * x)
    out = []
    cases = [
        ("nonlinear", IVProblem(p, gauss, lambda x, t, u: -0.5 * u, 0.5, sup_g=1.0)),
        ("forced", IVProblem(p, gauss, lambda x, t, u: np.exp(-t) * np.cos(x), 0.0, sup_F=1.0, sup_g=1.0)),
    ]
    for label, prob in cases:
        sol = picard_solve(prob, SolverConfig(grid, 1.0, dt_max=0.02))
        if label == "nonlinear":
            prob.sup_F = 0.5 * float(np.max(np.abs(sol.u)))
        sup = np.max(np.abs(sol.u), axis=1)
        bound = apriori_bound(prob, sol.times)
        s = bound - sup
        j = int(np.argmin(s))
        out.append(bound_report(f"apriori_solution.{label}", p, float(s[j]), 1e-8,
                                [{"t": float(sol.times[j])}]))
    return out


def check_apriori_fhn(p, cfg, src):
    """A FitzHugh-Nagumo run (threshold 0.25, other constants from p) obeys both closed-form bounds."""
    fp = FHNParams.of(0.25, p.b, p.beta if p.beta > 0 else 1.0, p.eps)
    grid = Grid.from_spacing(-10.0, 10.0, 0.1)
    u0 = lambda x: 0.6 * np.exp(-x * x)
    v0 = lambda x: 0.05 * np.exp(-x * x / 4)
    run = solve_fhn(u0, v0, fp, SolverConfig(grid, 0.5, dt_max=0.02))
    phi_sup = float(np.max(np.abs(phi_reaction(run.u, fp))))
    bu, bv = fhn_apriori_bounds(0.6, 0.05, phi_sup, fp, run.times)
    su = float(np.min(bu - np.max(np.abs(run.u), axis=1)))
    sv = float(np.min(bv - np.max(np.abs(run.v), axis=1)))
    return [bound_report("apriori_fhn.u", p, su, 1e-8, []), bound_report("apriori_fhn.v", p, sv, 1e-8, [])]


# one check per stated result; the remaining registry entries are supporting identities
REQUIRED_CHECKS = (
    "laplace_transform",
    "smoothness",
    "far_field_decay",
    "initial_trace",
    "fundamental_solution",
    "kernel_estimates",
    "mass_bounds",
    "apriori_solution",
    "apriori_fhn",
)

REGISTRY = {
    "laplace_transform": check_laplace_transform,
    "smoothness": check_smoothness,
    "far_field_decay": check_far_field_decay,
    "initial_trace": check_initial_trace,
    "fundamental_solution": check_fundamental_solution,
    "kernel_estimates": check_kernel_estimates,
    "mass_bounds": check_mass_bounds,
    "apriori_solution": check_apriori_solution,
    "apriori_fhn": check_apriori_fhn,
    "mass_identities": check_mass_identities,
    "time_convolution": check_time_convolution,
    "k2_mass_bound": check_k2_mass_bound,
}


def run_all(p_list, config=None, names=None):
    """Run the registry (or the named subset) on every parameter set, in a fixed order."""
    config = config or VerifyConfig()
    src = KernelSource(config.fault)
    names = list(REGISTRY) if names is None else list(names)
    reports = []
    for p in p_list:
        for name in names:
            reports.extend(REGISTRY[name](p, config, src))
    return reports


def all_passed(reports):
    return all(r.passed for r in reports)


def write_jsonl(reports, stream):
    for r in reports:
        stream.write(r.to_json() + "\n")


def summary_table(reports):
    lines = [f"{'check':40s} {'a':>5s} {'b':>5s} {'beta':>5s} {'eps':>5s} {'margin':>11s} {'tol':>9s}  result"]
    for r in reports:
        pr = r.params
        lines.append(f"{r.name:40s} {pr['a']:5.3g} {pr['b']:5.3g} {pr['beta']:5.3g} {pr['eps']:5.3g} "
                     f"{r.margin:11.3e} {r.tolerance:9.2e}  {'pass' if r.passed else 'FAIL'}")
    n_fail = sum(not r.passed for r in reports)
    lines.append(f"{len(reports)} checks, {n_fail} failed")
    return "\n".join(lines)
