"""Command-line entry point: ``rdkernel {kernel,solve,fhn,verify}``.

Every option can also come from ``--config FILE``, a flat ``key = value`` file;
explicit flags win over the file, which wins over the defaults.  CSV output
starts with a ``#`` block echoing the resolved configuration, so an output file
is itself a valid ``--config``.  Exit codes: 0 success, 1 numerical failure,
2 usage or configuration error.
"""

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .convolve import Grid
from .errors import ConfigError, ConvergenceError, DomainError, InputError, QuadratureError, RangeError
from .fhn import (
    FHNParams,
    front_positions,
    front_speed,
    solve_fhn,
    steady_states,
    traveling_wave,
    wave_profile,
)
from .kernels import kernel_bound, kernel_values
from .model import ModelParams, decay_E
from .solver import IVProblem, SolverConfig, linear_solve, picard_solve
from .verify import BATTERIES, REGISTRY, VerifyConfig, all_passed, battery, run_all, summary_table, write_jsonl

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


def float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def range_spec(text):
    """``lo,hi,n`` or empty."""
    if text in ("", None):
        return ""
    vals = float_list(text)
    if len(vals) != 3 or vals[2] < 1 or vals[2] != int(vals[2]):
        raise argparse.ArgumentTypeError(f"expected lo,hi,n with integer n >= 1, got {text!r}")
    return text


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(repr(float(v)) for v in value)
    return str(value)


@dataclass(frozen=True)
class Opt:
    name: str
    type: object
    default: object
    help: str
    choices: tuple = None


PARAM_OPTS = [
    Opt("a", float, 1.0, "linear decay rate a"),
    Opt("b", float, 1.0, "memory strength b"),
    Opt("beta", float, 1.0, "memory decay rate beta"),
    Opt("eps", float, 1.0, "diffusivity eps"),
]

GRID_OPTS = [
    Opt("x_min", float, -20.0, "left end of the grid"),
    Opt("x_max", float, 20.0, "right end of the grid"),
    Opt("dx", float, 0.05, "grid spacing"),
    Opt("T", float, 2.0, "time horizon"),
    Opt("dt_max", float, 0.01, "largest time step"),
    Opt("tol", float, 1e-10, "fixed-point tolerance"),
    Opt("max_iters", int, 100, "iterations allowed per block"),
    Opt("store", int, 20, "number of output time intervals"),
]

COMMANDS = {
    "kernel": [
        Opt("which", str, "K", "kernel to evaluate", ("K", "K1", "K2")),
        *PARAM_OPTS,
        Opt("x", float_list, [0.0], "comma-separated x values"),
        Opt("t", float_list, [1.0], "comma-separated t values"),
        Opt("x_range", range_spec, "", "lo,hi,n sweep in x (overrides --x)"),
        Opt("t_range", range_spec, "", "lo,hi,n sweep in t (overrides --t)"),
    ],
    "solve": [
        *PARAM_OPTS,
        *GRID_OPTS,
        Opt("g", str, "gaussian", "initial datum", ("gaussian", "step", "logistic", "constant", "file")),
        Opt("g_file", str, "", "two-column x,value CSV for --g file"),
        Opt("amplitude", float, 1.0, "amplitude of the initial datum"),
        Opt("width", float, 1.0, "length scale of the initial datum"),
        Opt("F", str, "zero", "source: zero, -cf u, or exp(-t) cos(x)", ("zero", "linear", "forced")),
        Opt("cf", float, 0.5, "coefficient of the linear source"),
    ],
    "fhn": [
        Opt("scenario", str, "pulse", "pulse, wave or steady", ("pulse", "wave", "steady")),
        Opt("a", float, 0.25, "cubic threshold a"),
        Opt("b", float, None, "coupling b (default 0 for wave, 0.05 otherwise)"),
        Opt("beta", float, 0.5, "recovery rate beta"),
        Opt("eps", float, 1.0, "diffusivity eps"),
        *[o for o in GRID_OPTS if o.name not in ("x_min", "x_max")],
        Opt("x_min", float, -25.0, "left end of the grid"),
        Opt("x_max", float, 25.0, "right end of the grid"),
        Opt("amplitude", float, 0.6, "pulse amplitude"),
        Opt("width", float, 1.0, "pulse width"),
    ],
    "verify": [
        Opt("battery", str, "default", "parameter battery", tuple(BATTERIES)),
        Opt("checks", str, "", "comma-separated check names (default: all)"),
        Opt("n_random", int, 200, "random sample points per check"),
        Opt("seed", int, 20240611, "sampling seed"),
        Opt("fault", float, 0.0, "relative fault injected into K"),
    ],
}


def build_parser():
    parser = argparse.ArgumentParser(prog="rdkernel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rdkernel {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMANDS.items():
        sp = subs.add_parser(cmd)
        sp.add_argument("--config", default=None, help="flat key = value file of option defaults")
        sp.add_argument("--out", default="-", help="output path (default stdout)")
        for o in opts:
            kw = dict(type=o.type, default=o.default, help=o.help)
            if o.choices:
                kw["choices"] = o.choices
            if o.name == "scenario":
                sp.add_argument("scenario", nargs="?", **kw)
            else:
                sp.add_argument("--" + o.name.replace("_", "-"), dest=o.name, **kw)
    return parser, subs


def load_config(path):
    """Read ``key = value`` pairs; '#' prefixes and ``result.*`` keys are ignored.

    The ``#`` echo block of a CSV written by this tool parses back to the
    configuration that produced it.
    """
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip().lstrip("#").strip()
            if "=" not in line:
                continue
            key, value = (s.strip() for s in line.split("=", 1))
            if key.startswith("result."):
                continue
            out[key.replace("-", "_")] = value
    return out


def _convert(cmd, raw):
    opts = {o.name: o for o in COMMANDS[cmd]}
    conv = {}
    for key, value in raw.items():
        if key not in opts:
            raise ConfigError(f"unknown key {key!r} for command {cmd!r}")
        o = opts[key]
        try:
            v = o.type(value)
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise ConfigError(f"bad value for {key!r}: {e}") from e
        if o.choices and v not in o.choices:
            raise ConfigError(f"{key!r} must be one of {o.choices}, got {v!r}")
        conv[key] = v
    return conv


def resolve_config(argv):
    """Parse argv (applying any ``--config`` file) to ``(command, {key: value}, out)``."""
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        file_cfg = _convert(args.command, load_config(args.config))
        subs.choices[args.command].set_defaults(**file_cfg)
        args = parser.parse_args(argv)
    cfg = {o.name: getattr(args, o.name) for o in COMMANDS[args.command]}
    return args.command, cfg, args.out


def header_lines(cmd, cfg, results=()):
    lines = [f"# rdkernel {cmd} {__version__}"]
    lines += [f"# {k} = {_fmt(v)}" for k, v in cfg.items()]
    lines += [f"# result.{k} = {_fmt(v)}" for k, v in results]
    return lines


def write_csv(stream, cmd, cfg, columns, rows, results=()):
    for line in header_lines(cmd, cfg, results):
        stream.write(line + "\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _params(cfg):
    return ModelParams(cfg["a"], cfg["b"], cfg["beta"], cfg["eps"])


def _axis(values, spec):
    if spec:
        lo, hi, n = float_list(spec)
        return np.linspace(lo, hi, int(n))
    return np.asarray(values, dtype=float)


# -- commands ------------------------------------------------------------------

def cmd_kernel(cfg):
    """Rows: kernel, x, t, value, error_estimate, bound."""
    p = _params(cfg)
    xs = _axis(cfg["x"], cfg["x_range"])
    ts = _axis(cfg["t"], cfg["t_range"])
    if xs.size == 0 or ts.size == 0:
        raise ConfigError("need at least one x and one t")
    tt, xx = np.meshgrid(ts, xs, indexing="ij")
    kind = cfg["which"]
    vals, err = kernel_values(xx.ravel(), tt.ravel(), p, (kind,))
    if kind == "K":
        bound = kernel_bound(xx.ravel(), tt.ravel(), p)
    elif kind == "K1":
        bound = np.asarray(decay_E(tt.ravel(), p))
    else:
        bound = tt.ravel() * np.asarray(decay_E(tt.ravel(), p))
    rows = [(kind, float(x), float(t), float(v), float(err), float(bd))
            for x, t, v, bd in zip(xx.ravel(), tt.ravel(), vals[kind], np.broadcast_to(bound, xx.size))]
    return ["kernel", "x", "t", "value", "error_estimate", "bound"], rows, []


def read_sampled(path):
    """Two-column numeric file (x, value); '#' lines and a text header row are skipped."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path!r}: {e}") from e
    xs, vs = [], []
    header_allowed = True
    for k, row in enumerate(csv.reader(io.StringIO(text))):
        if not row or row[0].lstrip().startswith("#"):
            continue
        if len(row) < 2:
            raise InputError(f"{path}: row {k + 1} needs two columns")
        try:
            x, v = float(row[0]), float(row[1])
        except ValueError:
            if header_allowed:
                header_allowed = False
                continue
            raise InputError(f"{path}: non-numeric row {k + 1}: {row}") from None
        header_allowed = False
        if not (math.isfinite(x) and math.isfinite(v)):
            raise InputError(f"{path}: non-finite value in row {k + 1}")
        xs.append(x)
        vs.append(v)
    if len(xs) < 2:
        raise InputError(f"{path}: need at least two samples")
    xs, vs = np.array(xs), np.array(vs)
    if np.any(np.diff(xs) <= 0):
        raise InputError(f"{path}: x must be strictly increasing")
    return xs, vs


def initial_datum(cfg):
    """Callable g(x) and sup|g| for the configured shape."""
    A, w = cfg["amplitude"], cfg["width"]
    if not w > 0:
        raise ConfigError("width must be > 0")
    shape = cfg["g"]
    if shape == "gaussian":
        return (lambda x: A * np.exp(-(x / w) ** 2)), abs(A)
    if shape == "step":
        return (lambda x: np.where(np.asarray(x) < 0, A, 0.0)), abs(A)
    if shape == "logistic":
        return (lambda x: A * 0.5 * (1.0 - np.tanh(0.5 * np.asarray(x) / w))), abs(A)
    if shape == "constant":
        return (lambda x: np.full_like(np.asarray(x, dtype=float), A)), abs(A)
    if not cfg["g_file"]:
        raise ConfigError("--g file needs --g-file")
    xs, vs = read_sampled(cfg["g_file"])
    return (lambda x: np.interp(x, xs, vs)), float(np.max(np.abs(vs)))


def _solver_config(cfg):
    if not cfg["dx"] > 0:
        raise ConfigError("dx must be > 0")
    grid = Grid.from_spacing(cfg["x_min"], cfg["x_max"], cfg["dx"])
    if cfg["store"] < 1:
        raise ConfigError("store must be >= 1")
    return SolverConfig(grid, cfg["T"], fixpoint_tol=cfg["tol"], max_iters=cfg["max_iters"], dt_max=cfg["dt_max"])


def _stored_levels(n_steps, store):
    return np.unique(np.round(np.linspace(0, n_steps, min(store, n_steps) + 1)).astype(int))


def cmd_solve(cfg):
    """Rows: t, x, u at ``store + 1`` roughly equispaced levels."""
    p = _params(cfg)
    scfg = _solver_config(cfg)
    g, _ = initial_datum(cfg)
    if cfg["F"] == "zero":
        sol = linear_solve(g, lambda x, t: np.zeros_like(x), p, scfg)
    elif cfg["F"] == "forced":
        sol = linear_solve(g, lambda x, t: np.exp(-t) * np.cos(x), p, scfg)
    else:
        cf = cfg["cf"]
        if not cf >= 0:
            raise ConfigError("cf must be >= 0")
        sol = picard_solve(IVProblem(p, g, lambda x, t, u: -cf * u, cf), scfg)
    levels = _stored_levels(len(sol.times) - 1, cfg["store"])
    x = scfg.grid.x
    rows = [(float(sol.times[i]), float(xv), float(uv)) for i in levels for xv, uv in zip(x, sol.u[i])]
    results = [("levels", len(sol.times) - 1), ("blocks", len(sol.iterations_per_block)),
               ("max_iterations", max(sol.iterations_per_block))]
    return ["t", "x", "u"], rows, results


def cmd_fhn(cfg):
    """Rows: t, x, u, v; scenario diagnostics go to ``result.*`` header lines."""
    scenario = cfg["scenario"]
    if cfg["b"] is None:
        cfg["b"] = 0.0 if scenario == "wave" else 0.05
    fp = FHNParams.of(cfg["a"], cfg["b"], cfg["beta"], cfg["eps"])
    scfg = _solver_config(cfg)
    x = scfg.grid.x
    results = []
    if scenario == "pulse":
        A, w = cfg["amplitude"], cfg["width"]
        run = solve_fhn(lambda z: A * np.exp(-(z / w) ** 2), lambda z: np.zeros_like(z), fp, scfg)
        sup = np.max(np.abs(run.u), axis=1)
        results += [("sup_u_initial", float(sup[0])), ("sup_u_final", float(sup[-1]))]
    elif scenario == "wave":
        tw = traveling_wave(fp)
        run = solve_fhn(lambda z: wave_profile(z, tw), lambda z: np.zeros_like(z), fp, scfg)
        pos = front_positions(x, run.u)
        speed = front_speed(run.times, pos)
        err = float(np.max(np.abs(run.u[-1] - wave_profile(x - tw.c * run.times[-1], tw))))
        results += [("wave_speed", tw.c), ("measured_speed", speed),
                    ("speed_relative_error", abs(speed - tw.c) / abs(tw.c)), ("profile_error", err)]
    else:
        st = steady_states(fp)
        if st.regime != "tri":
            raise ConfigError("steady scenario needs (1 - a)^2 > 4 b / beta (three steady states)")
        run = solve_fhn(lambda z: np.full_like(z, st.u_B), lambda z: np.full_like(z, st.v_B), fp, scfg)
        drift = max(float(np.max(np.abs(run.u - st.u_B))), float(np.max(np.abs(run.v - st.v_B))))
        results += [("u_B", st.u_B), ("v_B", st.v_B), ("max_drift", drift)]
    results.append(("route_discrepancy", run.route_discrepancy))
    levels = _stored_levels(len(run.times) - 1, cfg["store"])
    rows = [(float(run.times[i]), float(xv), float(uv), float(vv))
            for i in levels for xv, uv, vv in zip(x, run.u[i], run.v[i])]
    return ["t", "x", "u", "v"], rows, results


def cmd_verify(cfg, out, err_stream):
    names = [s.strip() for s in cfg["checks"].split(",") if s.strip()] or None
    unknown = [n for n in names or [] if n not in REGISTRY]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; available: {sorted(REGISTRY)}")
    vcfg = VerifyConfig(n_random=cfg["n_random"], seed=cfg["seed"], fault=cfg["fault"])
    reports = run_all(battery(cfg["battery"]), vcfg, names)
    write_jsonl(reports, out)
    err_stream.write(summary_table(reports) + "\n")
    return EXIT_OK if all_passed(reports) else EXIT_NUMERIC


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cmd, cfg, out_path = resolve_config(argv)
    except ConfigError as e:
        sys.stderr.write(f"rdkernel: config error: {e}\n")
        return EXIT_USAGE
    except OSError as e:
        sys.stderr.write(f"rdkernel: cannot read config: {e}\n")
        return EXIT_USAGE
    try:
        if cmd == "verify":
            out = _open_out(out_path)
            try:
                return cmd_verify(cfg, out, sys.stderr)
            finally:
                if out is not sys.stdout:
                    out.close()
        columns, rows, results = {"kernel": cmd_kernel, "solve": cmd_solve, "fhn": cmd_fhn}[cmd](cfg)
    except (ConfigError, DomainError, InputError) as e:
        sys.stderr.write(f"rdkernel {cmd}: {e}\n")
        return EXIT_USAGE
    except ConvergenceError as e:
        sys.stderr.write(f"rdkernel {cmd}: {e}\nresidual history:\n")
        sys.stderr.write("".join(f"  {k}: {r:.6e}\n" for k, r in enumerate(e.residuals)))
        return EXIT_NUMERIC
    except (QuadratureError, RangeError, FloatingPointError) as e:
        sys.stderr.write(f"rdkernel {cmd}: numerical failure: {e}\n")
        return EXIT_NUMERIC
    out = _open_out(out_path)
    try:
        write_csv(out, cmd, cfg, columns, rows, results)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
