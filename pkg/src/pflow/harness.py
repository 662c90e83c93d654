"""Experiment runner: sweep node processing capacity, race the solvers.

The sweep re-capacitates a fixed topology at each grid point, either giving
every node the same processing capacity ("all") or concentrating it on a
fixed, seed-chosen half of the nodes ("half"), and records per-algorithm
objectives and solve times. The half-subset is drawn once per sweep, not per
grid point, so a ratio curve over the grid describes one network family.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .lp import Objective, solve_edge_lp
from .model import Demand, FlowNetwork, StructuralError
from .mwu import MWUConfig, mwu_solve
from .naive import naive_solve

KNOWN_ALGS = ("lp", "mwu", "naive")


@dataclass
class SweepSpec:
    """Capacity grid [lo, hi] in `step` increments plus the distribution."""

    lo: float
    hi: float
    step: float
    dist: str = "all"   # all | half
    seed: int = 0
    repetitions: int = 1  # >1 repeats each run (e.g. to average wall times)

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise StructuralError(f"bad capacity range [{self.lo}, {self.hi}]")
        if not self.step > 0:
            raise StructuralError(f"step must be positive, got {self.step}")
        if self.dist not in ("all", "half"):
            raise StructuralError(f"distribution must be all or half, got {self.dist!r}")
        if self.repetitions < 1:
            raise StructuralError("repetitions must be >= 1")

    def grid(self) -> list[float]:
        out = []
        c = self.lo
        # tolerance so hi lands on the grid despite float stepping
        while c <= self.hi + 1e-9 * max(1.0, abs(self.hi)):
            out.append(round(c, 12))
            c += self.step
        return out


@dataclass
class RunRecord:
    instance: str        # grid-point id, e.g. "cap=2.5/half"
    algorithm: str
    objective: float     # nan when the solver errored
    wall_time: float     # seconds around the solver call only
    iterations: int
    feasible: bool
    error: str | None = None


def half_subset(net: FlowNetwork, seed: int) -> list[str]:
    """The fixed half of the nodes that receives capacity in `half` mode."""
    import random
    rng = random.Random(seed)
    nodes = list(net.nodes)
    return sorted(rng.sample(nodes, len(nodes) // 2))


def _capacitate(net: FlowNetwork, c: float, dist: str,
                half: list[str]) -> FlowNetwork:
    if dist == "all":
        caps = {v: c for v in net.nodes}
    else:
        chosen = set(half)
        caps = {v: (c if v in chosen else 0.0) for v in net.nodes}
    return net.with_node_capacity(caps)


def _run_one(alg: str, net: FlowNetwork, demands: list[Demand],
             epsilon: float) -> tuple[float, float, int]:
    t0 = time.perf_counter()
    if alg == "lp":
        sol, res = solve_edge_lp(net, demands, Objective())
        dt = time.perf_counter() - t0
        return sol.objective, dt, res.iterations
    if alg == "mwu":
        sol = mwu_solve(net, demands, MWUConfig(epsilon=epsilon))
        dt = time.perf_counter() - t0
        return sol.objective, dt, int(sol.meta.get("iterations", 0))
    if alg == "naive":
        sol = naive_solve(net, demands)
        dt = time.perf_counter() - t0
        return sol.objective, dt, int(sol.meta.get("lp_iterations", 0))
    raise StructuralError(f"unknown algorithm {alg!r}")


def compare_runs(net: FlowNetwork, demands: list[Demand], sweep: SweepSpec,
                 algorithms=KNOWN_ALGS, epsilon: float = 0.1) -> list[RunRecord]:
    """Grid x algorithm run matrix.

    Solver failures do not abort the sweep; the failing row records the error
    and a nan objective. Wall time covers the solver call only.
    """
    algs = list(algorithms)
    for a in algs:
        if a not in KNOWN_ALGS:
            raise StructuralError(f"unknown algorithm {a!r}; "
                                  f"choose from {', '.join(KNOWN_ALGS)}")
    half = half_subset(net, sweep.seed) if sweep.dist == "half" else []
    records: list[RunRecord] = []
    for c in sweep.grid():
        capped = _capacitate(net, c, sweep.dist, half)
        for rep in range(1, sweep.repetitions + 1):
            rep_tag = f"/r{rep}" if sweep.repetitions > 1 else ""
            inst_id = f"cap={c:g}/{sweep.dist}{rep_tag}"
            for alg in algs:
                try:
                    obj, dt, iters = _run_one(alg, capped, demands, epsilon)
                    records.append(RunRecord(inst_id, alg, obj, dt, iters, True))
                except Exception as exc:  # record and continue, per contract
                    records.append(RunRecord(inst_id, alg, math.nan, 0.0, 0,
                                             False, f"{type(exc).__name__}: {exc}"))
    return records


def objective_ratio(num: float, den: float) -> float:
    """num/den with the 0/0 grid-point convention pinned to 1."""
    if abs(den) < 1e-12:
        return 1.0 if abs(num) < 1e-12 else math.inf
    return num / den


def ratio_series(records: list[RunRecord], num_alg: str = "naive",
                 den_alg: str = "lp") -> dict[str, float]:
    """Per grid point, the num/den objective ratio (plot-ready)."""
    by_inst: dict[str, dict[str, float]] = {}
    for r in records:
        if r.feasible:
            by_inst.setdefault(r.instance, {})[r.algorithm] = r.objective
    out = {}
    for inst, vals in by_inst.items():
        if num_alg in vals and den_alg in vals:
            out[inst] = objective_ratio(vals[num_alg], vals[den_alg])
    return out


CSV_HEADER = "instance,algorithm,objective,wall_time,iterations,feasible,error"


def write_csv(records: list[RunRecord], path: str) -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER.split(","))
        for r in records:
            w.writerow([r.instance, r.algorithm,
                        "" if math.isnan(r.objective) else repr(r.objective),
                        repr(r.wall_time), r.iterations,
                        int(r.feasible), r.error or ""])
