"""Seeded round-trip experiments for the Stiefel logarithm solvers.

Every trial draws a base point ``U`` and a tangent direction from its own
random stream, ``numpy.random.default_rng(SeedSequence([seed, run]))``
(PCG64), sets ``U_tilde = Exp_U(delta)``, runs each requested solver on
``(U, U_tilde)`` and compares the result with ``delta`` in the max-norm.
Results do not depend on the number of worker processes.
"""

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .exceptions import StiefelError
from .exp import exp_alpha_reduced
from .log import LogConfig, parse_solver, time_grid
from .manifold import as_metric, norm_alpha, random_point, random_tangent

__all__ = [
    "ExperimentSpec",
    "TrialRecord",
    "PRESETS",
    "LARGE_PRESETS",
    "alpha_grid",
    "distance_grid",
    "run_roundtrip",
    "run_alpha_sweep",
    "run_distance_sweep",
    "run_dimension_sweep",
    "alpha_argmin",
    "summarize",
    "write_records",
    "read_records",
    "emit_convergence_plotdata",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment configuration.

    ``dist`` is the geodesic length in multiples of pi. Solver ids follow
    :func:`stiefelcoords.log.parse_solver`; shooting ids without a
    ``-<m>`` suffix use ``steps`` time points.
    """

    n: int = 120
    p: int = 30
    alpha: float = 0.0
    dist: float = 1.0
    solvers: tuple = ("alg4", "alg4-sylv", "pshoot-2")
    runs: int = 10
    seed: int = 0
    tau: float = 1e-11
    steps: int = 2
    max_iter: int = 1000

    def __post_init__(self):
        if not 1 <= self.p <= self.n:
            raise ValueError(f"need n >= p >= 1, got n={self.n}, p={self.p}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not (math.isfinite(self.dist) and self.dist >= 0):
            raise ValueError("dist must be finite and nonnegative")
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if not self.solvers:
            raise ValueError("no solvers given")
        as_metric(self.alpha).require_riemannian()
        object.__setattr__(self, "solvers", tuple(self.solvers))
        cfg = self.log_config()
        for sid in self.solvers:
            parse_solver(sid, cfg, self.steps)

    def log_config(self):
        return LogConfig(tau=self.tau, max_iter=self.max_iter)


CSV_FIELDS = ("experiment", "run", "solver", "n", "p", "alpha", "dist", "steps",
              "converged", "iterations", "final_residual", "error_inf",
              "error_inf_rel", "wall_time", "status")


@dataclass
class TrialRecord:
    """Outcome of one solver on one trial. ``dist`` is in multiples of pi;
    ``steps`` is 0 for solvers without a time grid."""

    experiment: str
    run: int
    solver: str
    n: int
    p: int
    alpha: float
    dist: float
    steps: int
    converged: bool
    iterations: int
    final_residual: float
    error_inf: float
    error_inf_rel: float
    wall_time: float
    status: str = "ok"
    residual_history: list = field(default_factory=list, repr=False)

    def row(self):
        d = asdict(self)
        return {k: d[k] for k in CSV_FIELDS}


PRESETS = {
    "table1-small": ExperimentSpec(120, 30, 0.0, 1.0,
                                   ("alg4", "alg4-sylv", "pshoot-2", "shoot-full-2"), runs=10),
    "table2-small": ExperimentSpec(120, 30, -0.5, 1.0,
                                   ("pshoot-2", "pshoot-4", "geonewton", "eucnewton"), runs=10),
    "table1-tiny": ExperimentSpec(12, 3, 0.0, 0.95, ("pshoot-2", "pshoot-4"), runs=100),
}
LARGE_PRESETS = {
    "table1-large": ExperimentSpec(2000, 500, 0.0, 5.0, ("alg4-sylv", "pshoot-2"), runs=10),
}


def alpha_grid(start=-0.9, stop=5.0, step=0.05):
    """Equidistant grid, rounded so that e.g. -0.5 is hit exactly."""
    count = int(round((stop - start) / step)) + 1
    return [round(start + step * j, 10) for j in range(count)]


def distance_grid():
    return [0.5 * (j + 1) for j in range(9)]


def _trial_streams(seed, run):
    point_ss, tangent_ss = np.random.SeedSequence([seed, run]).spawn(2)
    return point_ss, tangent_ss


def _steps_of(solver_id, fn_config):
    if solver_id.startswith(("pshoot", "shoot-full")):
        return len(fn_config.time_steps)
    return 0


def _solve(experiment, run, spec, U, U_tilde, delta, metric, solver_id):
    fn, cfg = parse_solver(solver_id, spec.log_config(), spec.steps)
    base = dict(experiment=experiment, run=run, solver=solver_id, n=spec.n, p=spec.p,
                alpha=metric.alpha, dist=spec.dist, steps=_steps_of(solver_id, cfg))
    start = time.perf_counter()
    try:
        res = fn(U, U_tilde, metric, cfg)
    except StiefelError as exc:
        return TrialRecord(**base, converged=False, iterations=0, final_residual=math.nan,
                           error_inf=math.nan, error_inf_rel=math.nan,
                           wall_time=time.perf_counter() - start,
                           status=type(exc).__name__)
    scale = float(np.abs(delta).max())
    err = float(np.abs(res.delta - delta).max())
    return TrialRecord(
        **base, converged=res.converged, iterations=res.iterations,
        final_residual=float(res.residual_history[-1]), error_inf=err,
        error_inf_rel=err / scale if scale > 0 else err, wall_time=res.wall_time,
        status="ok" if res.converged else "not-converged",
        residual_history=list(res.residual_history),
    )


def _draw(spec, run, direction_alpha):
    point_ss, tangent_ss = _trial_streams(spec.seed, run)
    U = random_point(spec.n, spec.p, point_ss)
    D0 = random_tangent(U, tangent_ss, direction_alpha, 1.0)
    return U, D0


def _roundtrip_trial(args):
    spec, run, experiment = args
    metric = as_metric(spec.alpha)
    U, D0 = _draw(spec, run, metric)
    delta = D0 * (spec.dist * math.pi)
    U_tilde = exp_alpha_reduced(U, delta, metric)
    return [_solve(experiment, run, spec, U, U_tilde, delta, metric, sid)
            for sid in spec.solvers]


def _alpha_trial(args):
    spec, run, alphas = args
    U, D0 = _draw(spec, run, 0.0)
    out = []
    for a in alphas:
        metric = as_metric(a)
        delta = D0 * (spec.dist * math.pi / norm_alpha(U, D0, metric))
        U_tilde = exp_alpha_reduced(U, delta, metric)
        for sid in spec.solvers:
            out.append(_solve("sweep-alpha", run, spec, U, U_tilde, delta, metric, sid))
    return out


def _distance_trial(args):
    spec, run, dists = args
    metric = as_metric(spec.alpha)
    U, D0 = _draw(spec, run, metric)
    out = []
    for d in dists:
        sub = replace(spec, dist=d)
        delta = D0 * (d * math.pi)
        U_tilde = exp_alpha_reduced(U, delta, metric)
        for sid in spec.solvers:
            out.append(_solve("sweep-dist", run, sub, U, U_tilde, delta, metric, sid))
    return out


def _map(worker, tasks, jobs):
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(tasks) <= 1:
        results = [worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(worker, tasks))
    return [rec for chunk in results for rec in chunk]


def run_roundtrip(spec, jobs=1, experiment="roundtrip"):
    """Exp/Log round trip for every run and solver of ``spec``.

    Returns
    -------
    list of TrialRecord
        Ordered by run, then by solver in ``spec.solvers`` order.
    """
    return _map(_roundtrip_trial, [(spec, r, experiment) for r in range(spec.runs)], jobs)


def run_alpha_sweep(spec, alphas=None, jobs=1):
    """Same direction at every metric, rescaled to ``spec.dist * pi`` in each.

    ``spec.alpha`` is ignored; the direction is drawn once per run.
    """
    alphas = alpha_grid() if alphas is None else [float(a) for a in alphas]
    for a in alphas:
        as_metric(a).require_riemannian()
    return _map(_alpha_trial, [(spec, r, alphas) for r in range(spec.runs)], jobs)


def run_distance_sweep(spec, dists=None, jobs=1):
    """Fixed direction per run, scaled to each distance (multiples of pi)."""
    dists = distance_grid() if dists is None else [float(d) for d in dists]
    return _map(_distance_trial, [(spec, r, dists) for r in range(spec.runs)], jobs)


def run_dimension_sweep(spec, axis="n", values=None, jobs=1, max_n=16000, max_p=640):
    """Round trips over a grid of ``n`` (``p`` fixed) or ``p`` (``n`` fixed).

    Defaults: ``n = 1000 * 2**j`` or ``p = 10 * 2**j`` for ``j >= 1``, up to
    the caps.
    """
    if axis not in ("n", "p"):
        raise ValueError("axis must be 'n' or 'p'")
    cap = max_n if axis == "n" else max_p
    if values is None:
        unit = 1000 if axis == "n" else 10
        values = [unit * 2 ** j for j in range(1, 20) if unit * 2 ** j <= cap]
    values = [int(v) for v in values]
    if any(v > cap for v in values):
        raise ValueError(f"{axis} values above the cap {cap}")
    records = []
    for v in values:
        sub = replace(spec, **{axis: v})
        records.extend(run_roundtrip(sub, jobs, experiment=f"sweep-{axis}"))
    return records


def alpha_argmin(records, solver=None):
    """Per run, the alpha with the fewest iterations among converged records.

    Ties in the iteration count are broken by the smaller final residual,
    i.e. by which run got further below the threshold.

    Returns
    -------
    dict
        ``run -> alpha``.
    """
    best = {}
    for rec in records:
        if not rec.converged or (solver is not None and rec.solver != solver):
            continue
        key = (rec.iterations, rec.final_residual)
        if rec.run not in best or key < best[rec.run][0]:
            best[rec.run] = (key, rec.alpha)
    return {run: a for run, (_, a) in sorted(best.items())}


SUMMARY_FIELDS = ("experiment", "solver", "n", "p", "alpha", "dist", "steps", "runs",
                  "converged", "diverged", "mean_iterations", "median_iterations",
                  "mean_error_inf", "max_error_inf", "mean_wall_time", "median_wall_time")


def summarize(records):
    """Group by configuration; averages use converged runs only.

    Returns
    -------
    list of dict
        One dict per group with keys :data:`SUMMARY_FIELDS`; groups keep
        first-seen order.
    """
    groups = {}
    for rec in records:
        key = (rec.experiment, rec.solver, rec.n, rec.p, rec.alpha, rec.dist, rec.steps)
        groups.setdefault(key, []).append(rec)
    out = []
    for key, recs in groups.items():
        ok = [r for r in recs if r.converged]

        def stat(fn, attr):
            return float(fn([getattr(r, attr) for r in ok])) if ok else math.nan

        out.append(dict(
            zip(SUMMARY_FIELDS[:7], key),
            runs=len(recs), converged=len(ok), diverged=len(recs) - len(ok),
            mean_iterations=stat(np.mean, "iterations"),
            median_iterations=stat(np.median, "iterations"),
            mean_error_inf=stat(np.mean, "error_inf"),
            max_error_inf=stat(np.max, "error_inf"),
            mean_wall_time=stat(np.mean, "wall_time"),
            median_wall_time=stat(np.median, "wall_time"),
        ))
    return out


def write_records(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.row())


def read_records(path):
    """Inverse of :func:`write_records` (residual histories are not stored)."""
    types = {f.name: f.type for f in fields(TrialRecord)}
    casts = {int: int, float: float, str: str, bool: lambda s: s == "True"}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            out.append(TrialRecord(**{k: casts[types[k]](v) for k, v in row.items()}))
    return out


def emit_convergence_plotdata(records, path):
    """Write one CSV per solver with columns ``run, iteration, residual``.

    Files are named ``<path>_<solver>.csv``; returns the list of paths.
    """
    path = Path(path)
    by_solver = {}
    for rec in records:
        by_solver.setdefault(rec.solver, []).append(rec)
    written = []
    for solver, recs in by_solver.items():
        target = path.with_name(f"{path.name}_{solver}.csv")
        with open(target, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("run", "iteration", "residual"))
            for rec in recs:
                for k, r in enumerate(rec.residual_history):
                    writer.writerow((rec.run, k, repr(float(r))))
        written.append(target)
    return written
