"""Command-line front end.

Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure,
4 too few Monte Carlo trials.  Reports go to stdout as JSON with every float
printed to 17 significant digits; sampled curves and signals go to CSV.

A ``--config`` JSON file supplies defaults for every flag; flags given on the
command line win.  Layout::

    {"problem": {"problem": "derivative", "r": 1, "k": 0, "delta": 1.0},
     "solver": {"quad_rel_tol": 1e-10},
     "grid": {"n": 16384, "freq_max": 6.0},
     "io": {"input": "in.csv", "output": "out.csv"},
     "seed": 42, "trials": 1000}
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from . import noise_sim
from .applications import problem_from_dict
from .errors import DomainError, InsufficientTrials, NumericalError
from .lowerbound import certificate
from .optimal_core import SolverConfig, solve_cutoff
from .spectral import (FrequencyGrid, apply_recovery, read_signal_csv, read_spectrum_csv,
                       write_signal_csv)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_STATISTICAL = 4

PROFILE_POINTS = 1025
DEFAULT_SCHEDULE_N = (256, 512, 1024, 2048)


class ConfigError(Exception):
    pass


def dumps(obj: Any) -> str:
    """JSON with floats rendered by ``%.17g``."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return "%.17g" % x if math.isfinite(x) else "null"
    return json.dumps(obj)


def _write_csv(path: str, header: tuple[str, str], cols):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for a, b in zip(*cols):
            fh.write(f"{a:.17g},{b:.17g}\n")


# -- configuration -------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    return data


def _problem(args, cfg: dict):
    d = dict(cfg.get("problem") or {})
    for key in ("problem", "r", "k", "T", "delta"):
        val = getattr(args, key if key != "problem" else "kind")
        if val is not None:
            d[key] = val
    if "problem" not in d:
        raise ConfigError("a problem is required (--problem derivative|heat)")
    required = ("r", "k", "delta") if d["problem"] == "derivative" else ("r", "T", "delta")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigError("missing " + ", ".join("--" + k for k in missing))
    return problem_from_dict(d)


def _solver(args, cfg: dict) -> SolverConfig:
    d = dict(cfg.get("solver") or {})
    for key in ("quad_rel_tol", "root_rel_tol"):
        if getattr(args, key) is not None:
            d[key] = getattr(args, key)
    return SolverConfig.from_dict(d)


def _pick(args, cfg: dict, name: str, section: str | None = None, default=None):
    val = getattr(args, name, None)
    if val is not None:
        return val
    src = cfg.get(section) or {} if section else cfg
    return src.get(name, default)


def _grid(args, cfg: dict, cutoff: float) -> FrequencyGrid:
    n = _pick(args, cfg, "n", "grid", 2 ** 14)
    fmax = _pick(args, cfg, "freq_max", "grid")
    tmax = _pick(args, cfg, "t_max", "grid")
    if fmax is not None and tmax is not None:
        raise ConfigError("give freq_max or t_max, not both")
    if tmax is not None:
        return FrequencyGrid.for_time_grid(int(n), float(tmax))
    return FrequencyGrid(int(n), float(fmax) if fmax is not None else 4.0 * cutoff)


# -- commands ------------------------------------------------------------------

def _cutoff_report(problem, generic: bool, cfg: SolverConfig) -> dict:
    if generic:
        filt = solve_cutoff(problem.recovery_problem(), cfg)
        td, err = filt.cutoff, filt.error
    else:
        td, err = problem.cutoff(cfg), problem.error(cfg)
    return {"t_delta": td, "E": err, "alpha_support": [-td, td]}


def cmd_cutoff(args, cfg: dict) -> int:
    problem = _problem(args, cfg)
    solver = _solver(args, cfg)
    if args.both:
        closed = _cutoff_report(problem, False, solver)
        generic = _cutoff_report(problem, True, solver)
        out = {
            "problem": problem.to_dict(),
            "closed_form": closed,
            "generic": generic,
            "rel_diff": {k: abs(generic[k] - closed[k]) / abs(closed[k]) for k in ("t_delta", "E")},
        }
    else:
        out = {"problem": problem.to_dict(), **_cutoff_report(problem, args.generic, solver)}
    print(dumps(out))
    return 0


def cmd_recover(args, cfg: dict) -> int:
    problem = _problem(args, cfg)
    solver = _solver(args, cfg)
    path = _pick(args, cfg, "input", "io")
    if path is None:
        raise ConfigError("recover needs --input SPECTRUM.csv")
    try:
        spec = read_spectrum_csv(path, hermitian=not args.complex)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    td = problem.cutoff(solver)
    sig = apply_recovery(spec, problem, td)
    out = _pick(args, cfg, "output", "io")
    if out is None:
        write_signal_csv(sys.stdout, sig)
    else:
        try:
            write_signal_csv(out, sig)
        except OSError as exc:
            raise ConfigError(f"cannot write {out}: {exc.strerror}") from None
    print(f"t_delta={td:.17g} E={problem.error(solver):.17g}", file=sys.stderr)
    return 0


def _signal(args, cfg: dict, problem, solver: SolverConfig):
    path = _pick(args, cfg, "input", "io")
    if path is not None:
        try:
            return noise_sim.SampledSignal(read_signal_csv(path))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    kind = _pick(args, cfg, "signal", None, "extremal")
    if kind == "extremal":
        sig = noise_sim.ExtremalSignal(solve_cutoff(problem.recovery_problem(), solver))
    elif kind == "gaussian":
        sig = noise_sim.GaussianSignal()
    elif kind == "bump":
        sig = noise_sim.BumpSignal(band=problem.cutoff(solver))
    else:
        raise ConfigError(f"unknown signal {kind!r}")
    level = _pick(args, cfg, "level", None, 1.0)
    return noise_sim.scale_to_class(sig, problem.pair, float(level))


def cmd_simulate(args, cfg: dict) -> int:
    problem = _problem(args, cfg)
    solver = _solver(args, cfg)
    signal = _signal(args, cfg, problem, solver)
    if isinstance(signal, noise_sim.SampledSignal):
        grid = signal.grid()
    else:
        grid = _grid(args, cfg, problem.cutoff(solver))
    report = noise_sim.monte_carlo_error(
        problem, signal,
        trials=int(_pick(args, cfg, "trials", None, 1000)),
        seed=int(_pick(args, cfg, "seed", None, 0)),
        grid=grid,
    )
    print(dumps(report.to_dict()))
    return 0


def cmd_lower_bound(args, cfg: dict) -> int:
    problem = _problem(args, cfg)
    solver = _solver(args, cfg)
    filt = solve_cutoff(problem.recovery_problem(), solver)
    schedule = cfg.get("schedule")
    if args.N is not None or args.A is not None or schedule is None:
        A = args.A if args.A is not None else 2.0 * filt.cutoff
        schedule = [(A, N) for N in (args.N or DEFAULT_SCHEDULE_N)]
    cert = certificate(problem.recovery_problem(), schedule, solver, filt)
    print(dumps({
        "problem": problem.to_dict(),
        "schedule": [e.to_dict() for e in cert.entries],
        "theoretical_error_sq": cert.theoretical_error_sq,
    }))
    return 0


def profile_curves(problem, solver: SolverConfig, deltas) -> dict:
    """α on ``[-1.2 t_delta, 1.2 t_delta]`` and ``E`` over ``deltas``."""
    td = problem.cutoff(solver)
    t = np.linspace(-1.2 * td, 1.2 * td, PROFILE_POINTS)
    # land exactly on the support edges
    for edge in (-td, td):
        t[np.argmin(np.abs(t - edge))] = edge
    alpha = problem.alpha(t, td)
    errors = [type(problem)(**{**_fields(problem), "delta": float(d)}).error(solver) for d in deltas]
    return {"t": t, "alpha": alpha, "delta": np.asarray(deltas, float), "E": np.array(errors)}


def _fields(problem) -> dict:
    d = problem.to_dict()
    d.pop("problem")
    return d


def cmd_profile(args, cfg: dict) -> int:
    problem = _problem(args, cfg)
    solver = _solver(args, cfg)
    lo, hi = args.delta_min, args.delta_max
    if not (0 < lo < hi):
        raise ConfigError("need 0 < --delta-min < --delta-max")
    curves = profile_curves(problem, solver, np.geomspace(lo, hi, args.delta_points))
    if args.alpha_csv is None and args.error_csv is None:
        print(dumps({
            "problem": problem.to_dict(),
            "alpha": {"t": curves["t"].tolist(), "alpha": curves["alpha"].tolist()},
            "error": {"delta": curves["delta"].tolist(), "E": curves["E"].tolist()},
        }))
        return 0
    try:
        if args.alpha_csv is not None:
            _write_csv(args.alpha_csv, ("t", "alpha"), (curves["t"], curves["alpha"]))
        if args.error_csv is not None:
            _write_csv(args.error_csv, ("delta", "E"), (curves["delta"], curves["E"]))
    except OSError as exc:
        raise ConfigError(f"cannot write profile: {exc.strerror}") from None
    return 0


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (flags take precedence)")
    common.add_argument("--problem", dest="kind", choices=["derivative", "heat"])
    common.add_argument("--r", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--T", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--quad-rel-tol", dest="quad_rel_tol", type=float)
    common.add_argument("--root-rel-tol", dest="root_rel_tol", type=float)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--n", type=int, help="grid size, power of two (default 16384)")
    grid.add_argument("--freq-max", dest="freq_max", type=float, help="default 4 t_delta")
    grid.add_argument("--t-max", dest="t_max", type=float)

    p = argparse.ArgumentParser(prog="optirec", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cutoff", parents=[common], help="cutoff t_delta and optimal error E")
    path = c.add_mutually_exclusive_group()
    path.add_argument("--closed-form", dest="generic", action="store_false", default=False)
    path.add_argument("--generic", dest="generic", action="store_true")
    path.add_argument("--both", action="store_true")
    c.set_defaults(func=cmd_cutoff, subparser=c)

    r = sub.add_parser("recover", parents=[common], help="apply the optimal method to a spectrum CSV")
    r.add_argument("--input", help="spectrum CSV (omega,re,im)")
    r.add_argument("--output", help="signal CSV (default stdout)")
    r.add_argument("--complex", action="store_true", help="input is not hermitian; keep complex output")
    r.set_defaults(func=cmd_recover, subparser=r)

    s = sub.add_parser("simulate", parents=[common, grid], help="Monte Carlo error campaign")
    s.add_argument("--signal", choices=["extremal", "gaussian", "bump"])
    s.add_argument("--level", type=float, help="class norm of the test signal (default 1)")
    s.add_argument("--input", help="signal CSV (t,value) instead of a built-in signal")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate, subparser=s)

    lb = sub.add_parser("lower-bound", parents=[common], help="discrete lower-bound certificate")
    lb.add_argument("--A", type=float, help="half-width (default 2 t_delta)")
    lb.add_argument("--N", type=int, nargs="+", help=f"cell counts (default {DEFAULT_SCHEDULE_N})")
    lb.set_defaults(func=cmd_lower_bound, subparser=lb)

    pr = sub.add_parser("profile", parents=[common], help="alpha(t) and E(delta) curves")
    pr.add_argument("--delta-min", type=float, default=1e-3)
    pr.add_argument("--delta-max", type=float, default=10.0)
    pr.add_argument("--delta-points", type=int, default=41)
    pr.add_argument("--alpha-csv")
    pr.add_argument("--error-csv")
    pr.set_defaults(func=cmd_profile, subparser=pr)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except ConfigError as exc:
        args.subparser.print_usage(sys.stderr)
        print(f"optirec {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientTrials as exc:
        print(f"optirec: {exc}", file=sys.stderr)
        return EXIT_STATISTICAL
    except DomainError as exc:
        print(f"optirec: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"optirec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
