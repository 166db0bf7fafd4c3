"""Command line interface: ``stiefel-bench <subcommand> [options]``.

Experiment subcommands print a summary table (averages over converged runs,
with the divergence count) and optionally write the per-trial CSV given by
``--out``. Exit status is 0 when the experiment ran, including recorded
divergences, and 2 on configuration errors.
"""

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import bench
from .exceptions import StiefelError
from .exp import exp_alpha_reduced
from .log import SOLVER_IDS, LogConfig, default_solver, parse_solver
from .manifold import as_metric
from .matrix_io import load_matrix, load_point, save_matrix

EXIT_CONFIG = 2

# per-subcommand defaults; explicit flags and presets override them
DEFAULTS = {
    "roundtrip": dict(n=120, p=30, alpha="0", dist="1", runs=10),
    "convergence": dict(n=120, p=30, alpha="0", dist="1", runs=1),
    "sweep-alpha": dict(n=200, p=50, alpha="-0.9:5.0:0.05", dist="0.5", runs=3,
                        solvers="pshoot"),
    "sweep-dist": dict(n=2000, p=200, alpha="0", dist="0.5:4.5:0.5", runs=1,
                       solvers="alg4,alg4-sylv,alg4-sylv-cay,pshoot-2,pshoot-4"),
    "sweep-n": dict(n=None, p=200, alpha="0", dist="1.5", runs=1, tau=1e-10,
                    solvers="alg4,alg4-sylv,alg4-sylv-cay,pshoot-2,shoot-full-2"),
    "sweep-p": dict(n=6000, p=None, alpha="0", dist="1.5", runs=1, tau=1e-10,
                    solvers="alg4,alg4-sylv,alg4-sylv-cay,pshoot-2,shoot-full-2"),
}


class ConfigError(Exception):
    pass


def parse_range(text):
    """``"v"``, ``"a,b,c"`` or ``"a:b:step"`` (inclusive) as a list of floats."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            return bench.alpha_grid(start, stop, step)
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse range {text!r}; use v, a,b,c or a:b:step") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise ConfigError(f"empty or non-finite range {text!r}")
    return values


def parse_ints(text):
    if text is None:
        return None
    values = parse_range(text)
    if any(v != int(v) or v < 1 for v in values):
        raise ConfigError(f"expected positive integers, got {text!r}")
    return [int(v) for v in values]


def _single(values, flag):
    if len(values) != 1:
        raise ConfigError(f"{flag} takes a single value for this subcommand")
    return values[0]


def _default_solvers(alpha):
    metric = as_metric(alpha)
    if metric.is_canonical:
        return "alg4,alg4-sylv,pshoot"
    if metric.is_euclidean:
        return "pshoot,geonewton,eucnewton"
    return default_solver(metric)


def build_spec(args):
    """Merge subcommand defaults, an optional preset and explicit flags."""
    base = dict(DEFAULTS[args.command])
    preset = args.preset
    if args.large and preset is None and args.command in ("roundtrip", "convergence"):
        preset = "table1-large"
    if preset is not None:
        if preset in bench.LARGE_PRESETS and not args.large:
            raise ConfigError(f"preset {preset!r} requires --large")
        table = {**bench.PRESETS, **bench.LARGE_PRESETS}
        if preset not in table:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(table)}")
        ps = table[preset]
        base.update(n=ps.n, p=ps.p, alpha=str(ps.alpha), dist=str(ps.dist),
                    runs=ps.runs, solvers=",".join(ps.solvers))
    for key in ("n", "p", "alpha", "dist", "runs", "solvers", "tau"):
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    alphas = parse_range(base["alpha"])
    dists = parse_range(base["dist"])
    ns = parse_ints(base["n"]) if base["n"] is not None else None
    ps_ = parse_ints(base["p"]) if base["p"] is not None else None
    solvers = base.get("solvers") or _default_solvers(alphas[0])
    solvers = tuple(s.strip() for s in solvers.split(",") if s.strip())
    spec_kwargs = dict(
        n=_single(ns, "--n") if ns and args.command != "sweep-n" else 1,
        p=_single(ps_, "--p") if ps_ and args.command != "sweep-p" else 1,
        alpha=alphas[0] if args.command != "sweep-alpha" else 0.0,
        dist=dists[0] if args.command != "sweep-dist" else 0.0,
        solvers=solvers, runs=base["runs"], seed=args.seed,
        tau=base.get("tau") or 1e-11, steps=args.steps, max_iter=args.max_iter,
    )
    if args.command not in ("sweep-alpha", "sweep-dist") and len(alphas) > 1:
        raise ConfigError("--alpha takes a single value for this subcommand")
    if args.command != "sweep-dist" and len(dists) > 1:
        raise ConfigError("--dist takes a single value for this subcommand")
    if args.command == "sweep-n":
        spec_kwargs["n"] = max(ns) if ns else spec_kwargs["p"]
    if args.command == "sweep-p":
        spec_kwargs["p"] = min(ps_) if ps_ else 1
    try:
        spec = bench.ExperimentSpec(**spec_kwargs)
    except (ValueError, StiefelError) as exc:
        raise ConfigError(str(exc)) from None
    return spec, dict(alphas=alphas, dists=dists, ns=ns, ps=ps_)


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.3g}" if (abs(v) < 1e-3 or abs(v) >= 1e4) and v != 0 else f"{v:.4g}"
    return str(v)


def print_summary(rows, out=None):
    out = sys.stdout if out is None else out
    cols = ("solver", "n", "p", "alpha", "dist", "runs", "converged", "diverged",
            "mean_iterations", "median_iterations", "max_error_inf", "mean_wall_time",
            "median_wall_time")
    table = [cols] + [tuple(_fmt(r[c]) for c in cols) for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    for row in table:
        print("  ".join(cell.rjust(w) for cell, w in zip(row, widths)), file=out)


def _run_experiment(args):
    spec, grids = build_spec(args)
    jobs = args.jobs
    try:
        if args.command in ("roundtrip", "convergence"):
            records = bench.run_roundtrip(spec, jobs)
        elif args.command == "sweep-alpha":
            for a in grids["alphas"]:
                as_metric(a).require_riemannian()
            records = bench.run_alpha_sweep(spec, grids["alphas"], jobs)
        elif args.command == "sweep-dist":
            records = bench.run_distance_sweep(spec, grids["dists"], jobs)
        else:
            axis = args.command[-1]
            values = grids["ns"] if axis == "n" else grids["ps"]
            records = bench.run_dimension_sweep(
                spec, axis, values, jobs,
                max_n=math.inf if args.large else 16000,
                max_p=math.inf if args.large else 640,
            )
    except (ValueError, StiefelError) as exc:
        raise ConfigError(str(exc)) from None

    print_summary(bench.summarize(records))
    if args.command == "sweep-alpha":
        for solver in spec.solvers:
            for run, a in bench.alpha_argmin(records, solver).items():
                print(f"argmin alpha ({solver}, run {run}): {a:+.2f}")
    if args.command == "convergence":
        prefix = args.out or "convergence"
        for path in bench.emit_convergence_plotdata(records, prefix):
            print(f"wrote {path}")
    elif args.out:
        bench.write_records(records, args.out)
        print(f"wrote {args.out}")
    return 0


def _run_exp(args):
    U = load_point(args.point)
    delta = load_matrix(args.tangent)
    alpha = float(_single(parse_range(args.alpha or "0"), "--alpha"))
    save_matrix(args.out, exp_alpha_reduced(U, delta, alpha))
    return 0


def _run_log(args):
    U = load_point(args.point)
    U_tilde = load_point(args.target)
    alpha = float(_single(parse_range(args.alpha or "0"), "--alpha"))
    solver = args.solvers or default_solver(alpha)
    if "," in solver:
        raise ConfigError("log takes a single solver")
    fn, cfg = parse_solver(solver, LogConfig(tau=args.tau or 1e-11, max_iter=args.max_iter),
                           args.steps)
    res = fn(U, U_tilde, alpha, cfg)
    save_matrix(args.out, res.delta)
    status = "converged" if res.converged else "NOT converged"
    print(f"{solver}: {status} after {res.iterations} iterations, "
          f"residual {res.residual_history[-1]:.3e}")
    return 0 if res.converged else 1


def _add_common(sp):
    sp.add_argument("--n", help="rows; comma list or a:b:step for sweep-n")
    sp.add_argument("--p", help="columns; comma list or a:b:step for sweep-p")
    sp.add_argument("--alpha", help="metric parameter, value or a:b:step")
    sp.add_argument("--dist", help="geodesic length in multiples of pi, value or a:b:step")
    sp.add_argument("--solvers", help=f"comma list from: {', '.join(SOLVER_IDS)} "
                                      "(shooting ids accept a -<m> suffix)")
    sp.add_argument("--runs", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--steps", type=int, default=2, help="shooting time points")
    sp.add_argument("--max-iter", type=int, default=1000)
    sp.add_argument("--out", help="CSV path (prefix for convergence)")
    sp.add_argument("--large", action="store_true", help="allow the large presets and caps")
    sp.add_argument("--jobs", type=int, default=None, help="worker processes (default: cores)")
    sp.add_argument("--preset", help="table1-small, table2-small, table1-tiny, table1-large")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stiefel-bench",
        description="Riemannian exponential/logarithm experiments on the Stiefel manifold.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("roundtrip", "Exp/Log round-trip accuracy and iteration counts"),
        ("sweep-alpha", "iteration counts over the metric parameter"),
        ("sweep-dist", "iteration counts over the geodesic length"),
        ("sweep-n", "timings over the row dimension"),
        ("sweep-p", "timings over the column dimension"),
        ("convergence", "residual histories, one CSV per solver"),
    ):
        _add_common(sub.add_parser(name, help=text))
    ex = sub.add_parser("exp", help="Exp_U(delta) of matrices stored on disk")
    ex.add_argument("--point", required=True)
    ex.add_argument("--tangent", required=True)
    ex.add_argument("--alpha")
    ex.add_argument("--out", required=True)
    lg = sub.add_parser("log", help="Log_U(U_tilde) of matrices stored on disk")
    lg.add_argument("--point", required=True)
    lg.add_argument("--target", required=True)
    lg.add_argument("--alpha")
    lg.add_argument("--solvers")
    lg.add_argument("--tau", type=float)
    lg.add_argument("--steps", type=int, default=None)
    lg.add_argument("--max-iter", type=int, default=1000)
    lg.add_argument("--out", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "exp":
            return _run_exp(args)
        if args.command == "log":
            return _run_log(args)
        return _run_experiment(args)
    except (ConfigError, ValueError, StiefelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
