import csv
import math

import numpy as np
import pytest

from stiefelcoords import bench
from stiefelcoords.bench import ExperimentSpec


def small_spec(**kw):
    base = dict(n=20, p=4, alpha=-0.5, dist=0.3,
                solvers=("shoot-full", "pshoot", "pshoot-4", "geonewton", "eucnewton"), runs=3)
    base.update(kw)
    return ExperimentSpec(**base)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(n=2, p=3)
    with pytest.raises(ValueError):
        ExperimentSpec(runs=0)
    with pytest.raises(ValueError):
        ExperimentSpec(dist=math.inf)
    with pytest.raises(ValueError):
        ExperimentSpec(solvers=("nope",))
    with pytest.raises(ValueError):
        ExperimentSpec(alpha=-2.0)


def test_roundtrip_all_solvers_agree():
    recs = bench.run_roundtrip(small_spec())
    assert len(recs) == 15
    assert [r.run for r in recs] == [0] * 5 + [1] * 5 + [2] * 5
    for r in recs:
        assert r.converged and r.status == "ok"
        assert r.error_inf <= 1e-9
        assert 0 <= r.iterations <= 1000
    assert {r.steps for r in recs if r.solver == "pshoot-4"} == {4}
    assert {r.steps for r in recs if r.solver == "geonewton"} == {0}


def test_zero_distance():
    recs = bench.run_roundtrip(small_spec(dist=0.0, runs=1))
    for r in recs:
        assert r.error_inf == 0.0 and r.iterations == 0 and r.converged


def test_determinism_and_parallel_equivalence():
    spec = small_spec(solvers=("pshoot", "alg4-sylv"), alpha=0.0, runs=4)
    a = bench.run_roundtrip(spec, jobs=1)
    b = bench.run_roundtrip(spec, jobs=1)
    c = bench.run_roundtrip(spec, jobs=2)
    key = [(r.run, r.solver, r.iterations, r.error_inf) for r in a]
    assert key == [(r.run, r.solver, r.iterations, r.error_inf) for r in b]
    assert key == [(r.run, r.solver, r.iterations, r.error_inf) for r in c]


def test_divergence_is_recorded_and_excluded():
    spec = ExperimentSpec(12, 3, 0.0, 0.95, ("pshoot-2", "alg4-sylv"), runs=4, max_iter=200)
    recs = bench.run_roundtrip(spec)
    rows = {r["solver"]: r for r in bench.summarize(recs)}
    ps = rows["pshoot-2"]
    assert ps["diverged"] == 4 and ps["converged"] == 0
    assert math.isnan(ps["mean_iterations"])
    assert rows["alg4-sylv"]["diverged"] == 0
    assert all(r.status == "not-converged" for r in recs if r.solver == "pshoot-2")


def test_solver_exception_recorded():
    spec = ExperimentSpec(2, 1, 0.0, 1.0, ("alg4",), runs=1)
    recs = bench.run_roundtrip(spec)
    assert recs[0].status == "AnglePiError" and not recs[0].converged


def test_csv_round_trip(tmp_path):
    recs = bench.run_roundtrip(small_spec(runs=1))
    path = tmp_path / "r.csv"
    bench.write_records(recs, path)
    with open(path) as fh:
        assert next(csv.reader(fh)) == list(bench.CSV_FIELDS)
    back = bench.read_records(path)
    assert [r.row() for r in back] == [r.row() for r in recs]
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        bench.read_records(path)


def test_grids():
    g = bench.alpha_grid()
    assert len(g) == 119 and g[0] == -0.9 and g[-1] == 5.0 and -0.5 in g and 0.0 in g
    assert bench.distance_grid() == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5]


def test_alpha_sweep_rescales_one_direction():
    spec = ExperimentSpec(10, 3, 0.0, 0.3, ("pshoot",), runs=1)
    recs = bench.run_alpha_sweep(spec, [-0.5, 0.0, 1.0])
    assert [r.alpha for r in recs] == [-0.5, 0.0, 1.0]
    assert all(r.converged and r.error_inf <= 1e-10 for r in recs)
    arg = bench.alpha_argmin(recs)
    assert set(arg) == {0}


def test_alpha_argmin_tie_break():
    def rec(a, it, res):
        return bench.TrialRecord("sweep-alpha", 0, "pshoot", 5, 2, a, 0.5, 2, True, it, res,
                                 0.0, 0.0, 0.0)
    recs = [rec(-0.55, 7, 5e-12), rec(-0.5, 7, 4e-13), rec(-0.45, 7, 3e-12), rec(0.0, 9, 1e-14)]
    assert bench.alpha_argmin(recs) == {0: -0.5}


def test_distance_sweep_monotone_sylvester():
    spec = ExperimentSpec(30, 5, 0.0, 0.0, ("alg4-sylv",), runs=5)
    recs = bench.run_distance_sweep(spec, [0.5, 1.0, 1.5])
    rows = bench.summarize(recs)
    means = [r["mean_iterations"] for r in rows]
    assert [r["dist"] for r in rows] == [0.5, 1.0, 1.5]
    assert means == sorted(means)


def test_dimension_sweep_caps_and_schema():
    spec = ExperimentSpec(40, 4, 0.0, 0.5, ("alg4-sylv", "pshoot"), runs=1)
    recs = bench.run_dimension_sweep(spec, "n", [20, 40])
    assert {r.n for r in recs} == {20, 40}
    assert all(r.experiment == "sweep-n" for r in recs)
    with pytest.raises(ValueError):
        bench.run_dimension_sweep(spec, "p", [1000])
    with pytest.raises(ValueError):
        bench.run_dimension_sweep(spec, "q")


def test_convergence_plotdata(tmp_path):
    recs = bench.run_roundtrip(ExperimentSpec(20, 4, 0.0, 1.0, ("alg4", "pshoot"), runs=2))
    paths = bench.emit_convergence_plotdata(recs, tmp_path / "conv")
    assert sorted(p.name for p in paths) == ["conv_alg4.csv", "conv_pshoot.csv"]
    with open(tmp_path / "conv_alg4.csv") as fh:
        rows = list(csv.DictReader(fh))
    res = [float(r["residual"]) for r in rows if r["run"] == "0"]
    assert res[-1] <= 1e-11
    assert all(v > 0 for v in res[:-1])
    last = np.log10(res[-6:])
    assert np.polyfit(np.arange(len(last)), last, 1)[0] <= 0


def test_presets_are_valid():
    for name, spec in {**bench.PRESETS, **bench.LARGE_PRESETS}.items():
        assert isinstance(spec, ExperimentSpec), name
    assert bench.PRESETS["table1-tiny"].runs == 100
