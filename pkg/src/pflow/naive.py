"""Route-then-process baseline.

Phase 1 solves plain max multi-commodity flow, blind to processing capacity,
and splits it into simple paths. Phase 2 walks each path in order and assigns
processing greedily at the first interior vertices that still have capacity
left. Flow that finds no processing on its own path is discarded; nothing is
ever re-routed. The gap to the LP optimum is the whole point of this
algorithm, so its weaknesses are deliberate and must stay.
"""

from __future__ import annotations

import math

from .decompose import SNAP, DecompositionError, _find_cycle
from .lp import DEFAULT_MAXITER, LPModel, solve_lp
from .model import (
    Demand,
    FlowNetwork,
    InfeasibleError,
    ResourceLimitError,
    WalkEntry,
    WalkFlowSolution,
)


def _routing_lp(net: FlowNetwork, demands: list[Demand]) -> tuple[LPModel, list[list[int]]]:
    m = LPModel("route-only", sense="max")
    fvar: list[list[int]] = []
    for i, _ in enumerate(demands):
        fvar.append([m.add_var(f"f_{i}_{a}") for a in range(net.n_arcs)])

    obj: dict[int, float] = {}
    for i, d in enumerate(demands):
        for v in net.nodes:
            if v == d.source or v == d.sink:
                continue
            coeffs = [(fvar[i][a], 1.0) for a in net.in_arcs[v]]
            coeffs += [(fvar[i][a], -1.0) for a in net.out_arcs[v]]
            m.add_constraint(coeffs, "==", 0.0, name=f"cons_{i}_{v}")
        # objective and demand cap are both the net outflow of the source
        net_out = {fvar[i][a]: 1.0 for a in net.out_arcs[d.source]}
        for a in net.in_arcs[d.source]:
            net_out[fvar[i][a]] = net_out.get(fvar[i][a], 0.0) - 1.0
        if d.amount is not None and math.isfinite(d.amount):
            m.add_constraint(list(net_out.items()), "<=", d.amount, name=f"cap_{i}")
        for var, coef in net_out.items():
            obj[var] = obj.get(var, 0.0) + coef

    for g, arcs in enumerate(net.groups):
        coeffs = [(fvar[i][a], 1.0) for i in range(len(demands)) for a in arcs]
        m.add_constraint(coeffs, "<=", net.group_capacity[g], name=f"bw_{g}")

    m.set_objective(obj)
    return m, fvar


def _paths(net: FlowNetwork, flow: list[float], d: Demand) -> list[tuple[list[str], float]]:
    """Split one commodity's cycle-free flow into lowest-arc-index paths."""
    out = []
    guard = 0
    while True:
        u = d.source
        path = [u]
        arcs: list[int] = []
        while u != d.sink:
            a = next((a for a in net.out_arcs[u] if flow[a] > SNAP), None)
            if a is None:
                if u == d.source:
                    break  # residual source outflow exhausted
                raise DecompositionError(f"routing flow dead-ends at {u!r}")
            arcs.append(a)
            u = net.arcs[a].head
            path.append(u)
            if len(arcs) > net.n_arcs:
                raise DecompositionError("routing flow still contains a cycle")
        if not arcs:
            break
        delta = min(flow[a] for a in arcs)
        for a in arcs:
            flow[a] -= delta
            if flow[a] < SNAP:
                flow[a] = 0.0
        out.append((path, delta))
        guard += 1
        if guard > net.n_arcs + net.n_nodes:
            raise DecompositionError("path extraction did not converge")
    return out


def naive_solve(net: FlowNetwork, demands: list[Demand]) -> WalkFlowSolution:
    """Max-flow first, then process greedily along each chosen path."""
    model, fvar = _routing_lp(net, demands)
    res = solve_lp(model, maxiter=DEFAULT_MAXITER)
    if res.status == "infeasible":
        raise InfeasibleError("routing LP infeasible")
    if res.status != "optimal":
        raise ResourceLimitError(f"routing LP ended {res.status}")

    residual = {v: net.capacity(v) for v in net.nodes}
    entries: list[WalkEntry] = []
    routed = 0.0
    for i, d in enumerate(demands):
        flow = [max(0.0, res.assignment.get(f"f_{i}_{a}", 0.0)) for a in range(net.n_arcs)]
        for a in range(net.n_arcs):
            if flow[a] < SNAP:
                flow[a] = 0.0
        while True:
            cycle = _find_cycle(net, lambda a: flow[a])
            if cycle is None:
                break
            delta = min(flow[a] for a in cycle)
            for a in cycle:
                flow[a] -= delta
                if flow[a] < SNAP:
                    flow[a] = 0.0
        for path, amount in _paths(net, flow, d):
            routed += amount
            remaining = amount
            processing: dict[str, float] = {}
            for v in path[1:-1]:
                if remaining <= SNAP:
                    break
                take = min(remaining, residual[v])
                if take > SNAP:
                    processing[v] = processing.get(v, 0.0) + take
                    residual[v] -= take
                    remaining -= take
            processed = amount - remaining
            if processed > SNAP:
                entries.append(WalkEntry(i, tuple(path), processed, processing))

    return WalkFlowSolution(entries, meta={
        "algorithm": "naive",
        "routed": routed,
        "lp_iterations": res.iterations,
    })
