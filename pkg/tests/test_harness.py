"""Sweep harness: grids, distributions, record rows, CSV shape."""

import math

import pytest

from pflow.harness import (CSV_HEADER, KNOWN_ALGS, RunRecord, SweepSpec,
                           compare_runs, half_subset, objective_ratio,
                           ratio_series, write_csv)
from pflow.model import Demand, FlowNetwork, StructuralError


def test_grid_endpoints():
    assert SweepSpec(lo=0.0, hi=2.0, step=0.5).grid() == \
        [0.0, 0.5, 1.0, 1.5, 2.0]
    assert SweepSpec(lo=1.0, hi=1.0, step=0.3).grid() == [1.0]


def test_grid_float_accumulation_hits_top():
    g = SweepSpec(lo=0.0, hi=1.0, step=0.1).grid()
    assert len(g) == 11
    assert g[-1] == 1.0


@pytest.mark.parametrize("kwargs", [
    dict(lo=2.0, hi=1.0, step=0.5),
    dict(lo=0.0, hi=1.0, step=0.0),
    dict(lo=0.0, hi=1.0, step=-1.0),
    dict(lo=0.0, hi=1.0, step=0.5, dist="most"),
    dict(lo=0.0, hi=1.0, step=0.5, repetitions=0),
    dict(lo=math.nan, hi=1.0, step=0.5),
])
def test_spec_validation(kwargs):
    with pytest.raises(StructuralError):
        SweepSpec(**kwargs)


def test_half_subset_deterministic(naive_gap):
    net, _ = naive_gap
    sub = half_subset(net, seed=7)
    assert sub == half_subset(net, seed=7)
    assert len(sub) == 2
    assert set(sub) <= set(net.nodes)


def test_compare_runs_gap_family(naive_gap):
    net, demands = naive_gap
    sweep = SweepSpec(lo=0.0, hi=2.0, step=1.0, dist="all", seed=3)
    recs = compare_runs(net, demands, sweep, algorithms=("lp", "naive"))
    assert len(recs) == 6
    assert all(isinstance(r, RunRecord) for r in recs)
    by_key = {(r.instance, r.algorithm): r for r in recs}
    for c in (0.0, 1.0, 2.0):
        lp = by_key[(f"cap={c:g}/all", "lp")]
        nv = by_key[(f"cap={c:g}/all", "naive")]
        assert lp.feasible and nv.feasible
        assert nv.objective <= lp.objective + 1e-9
        assert lp.wall_time >= 0.0 and lp.iterations >= 0
    assert abs(by_key[("cap=0/all", "lp")].objective) < 1e-9

    ratios = ratio_series(recs, num_alg="naive", den_alg="lp")
    assert ratios["cap=0/all"] == 1.0          # 0/0 counts as parity
    assert all(v <= 1.0 + 1e-9 for v in ratios.values())


def test_half_distribution(naive_gap):
    net, demands = naive_gap
    recs = compare_runs(net, demands,
                        SweepSpec(lo=2.0, hi=2.0, step=1.0, dist="half",
                                  seed=3),
                        algorithms=("lp",))
    assert recs[0].instance == "cap=2/half"
    assert recs[0].feasible


def test_repetition_tags(naive_gap):
    net, demands = naive_gap
    recs = compare_runs(net, demands,
                        SweepSpec(lo=2.0, hi=2.0, step=1.0, repetitions=2),
                        algorithms=("mwu",), epsilon=0.3)
    assert [r.instance for r in recs] == ["cap=2/all/r1", "cap=2/all/r2"]
    assert all(r.feasible and r.iterations > 0 for r in recs)


def test_unknown_algorithm_rejected(naive_gap):
    net, demands = naive_gap
    sweep = SweepSpec(lo=0.0, hi=1.0, step=1.0)
    with pytest.raises(StructuralError):
        compare_runs(net, demands, sweep, algorithms=("lp", "simplex2000"))


def test_solver_failure_becomes_row(naive_gap):
    net, _ = naive_gap
    recs = compare_runs(net, [Demand("s", "zz", math.inf)],
                        SweepSpec(lo=1.0, hi=1.0, step=1.0),
                        algorithms=("mwu",))
    assert len(recs) == 1
    r = recs[0]
    assert not r.feasible
    assert r.error is not None
    assert math.isnan(r.objective)


def test_objective_ratio_conventions():
    assert objective_ratio(0.0, 0.0) == 1.0
    assert objective_ratio(3.0, 0.0) == math.inf
    assert objective_ratio(1.0, 2.0) == 0.5


def test_csv_shape(tmp_path, naive_gap):
    net, demands = naive_gap
    sweep = SweepSpec(lo=0.0, hi=2.0, step=1.0, dist="all", seed=3)
    recs = compare_runs(net, demands, sweep, algorithms=("lp", "naive"))
    recs += compare_runs(net, [Demand("s", "zz", math.inf)],
                         SweepSpec(lo=1.0, hi=1.0, step=1.0),
                         algorithms=("mwu",))
    out = tmp_path / "sweep.csv"
    write_csv(recs, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[0] == "instance,algorithm,objective,wall_time,iterations,feasible,error"
    assert len(lines) == 1 + len(recs)
    assert lines[1].startswith("cap=0/all,lp,")
    last = lines[-1].split(",")
    assert last[2] == ""        # nan objective -> empty field
    assert last[5] == "0"
    assert last[6] != ""


def test_known_algs():
    assert KNOWN_ALGS == ("lp", "mwu", "naive")
