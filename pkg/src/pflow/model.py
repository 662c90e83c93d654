"""Core data model: capacitated networks, demands, flow solutions, verifiers.

Flow here is always "processed flow": every unit routed from a demand's source
to its sink must also be processed, exactly once, at some node it visits
strictly between leaving the source and reaching the sink. Bandwidth lives on
edges, processing capacity on nodes. Routes are 2-walks: they may visit a
vertex (and hence an edge) at most twice, which is what makes detours through
off-path processing nodes expressible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

REL_TOL = 1e-6
ABS_TOL = 1e-9


def feas_slack(capacity: float) -> float:
    """Allowed overshoot when comparing a load against a capacity."""
    if not math.isfinite(capacity):
        return ABS_TOL
    return max(ABS_TOL, REL_TOL * abs(capacity))


class StructuralError(ValueError):
    """Data references nodes, arcs, or demands that do not exist."""


class InfeasibleError(RuntimeError):
    """The model has no feasible solution."""


class ResourceLimitError(RuntimeError):
    """A solver gave up on an explicit size or iteration budget."""


@dataclass(frozen=True)
class Arc:
    tail: str
    head: str
    capacity: float
    group: int  # arcs sharing a group share one bandwidth budget


@dataclass(frozen=True)
class Demand:
    source: str
    sink: str
    amount: float = math.inf  # inf = uncapped


class FlowNetwork:
    """A capacitated network with per-node processing capacity.

    Undirected networks are materialized as antiparallel arc pairs; the two
    directions of one edge share a single bandwidth budget (their "group").
    Directed arcs each form a singleton group, so capacity accounting is
    uniformly per group. Node ids are opaque strings; dense indices follow
    first appearance in `nodes`.
    """

    def __init__(self, nodes, edges, node_capacity=None, directed=True):
        self.nodes = tuple(nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise StructuralError("duplicate node id")
        self.directed = bool(directed)
        self._index = {v: i for i, v in enumerate(self.nodes)}

        caps = dict(node_capacity or {})
        for v in caps:
            if v not in self._index:
                raise StructuralError(f"node capacity for unknown node {v!r}")
        self.node_capacity = {v: float(caps.get(v, 0.0)) for v in self.nodes}

        arcs: list[Arc] = []
        group_cap: list[float] = []
        seen: set[tuple[str, str]] = set()
        for u, v, cap in edges:
            if u not in self._index or v not in self._index:
                raise StructuralError(f"edge {u!r}->{v!r} references unknown node")
            pairs = [(u, v)] if self.directed else [(u, v), (v, u)]
            g = len(group_cap)
            for a, b in pairs:
                if (a, b) in seen:
                    raise StructuralError(f"duplicate arc {a!r}->{b!r}")
                seen.add((a, b))
                arcs.append(Arc(a, b, float(cap), g))
            group_cap.append(float(cap))
        self.arcs = tuple(arcs)
        self.group_capacity = tuple(group_cap)

        self.arc_index = {(a.tail, a.head): i for i, a in enumerate(self.arcs)}
        out: dict[str, list[int]] = {v: [] for v in self.nodes}
        inc: dict[str, list[int]] = {v: [] for v in self.nodes}
        for i, a in enumerate(self.arcs):
            out[a.tail].append(i)
            inc[a.head].append(i)
        self.out_arcs = {v: tuple(ix) for v, ix in out.items()}
        self.in_arcs = {v: tuple(ix) for v, ix in inc.items()}
        groups: list[list[int]] = [[] for _ in group_cap]
        for i, a in enumerate(self.arcs):
            groups[a.group].append(i)
        self.groups = tuple(tuple(g) for g in groups)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def edge_count(self) -> int:
        """Number of independent bandwidth budgets (undirected edges count once)."""
        return len(self.group_capacity)

    def node_index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise StructuralError(f"unknown node {v!r}") from None

    def capacity(self, v: str) -> float:
        return self.node_capacity[v]

    def with_node_capacity(self, caps: dict[str, float]) -> "FlowNetwork":
        """Copy of this network with node processing capacities replaced."""
        edges = []
        done = set()
        for a in self.arcs:
            if a.group in done:
                continue
            done.add(a.group)
            edges.append((a.tail, a.head, a.capacity))
        return FlowNetwork(self.nodes, edges, caps, directed=self.directed)


@dataclass
class ValidationReport:
    ok: bool
    problems: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _bad_number(x: float) -> bool:
    return math.isnan(x) or x == -math.inf


def validate_instance(net: FlowNetwork, demands: list[Demand]) -> ValidationReport:
    """Check well-formedness; reports problems instead of raising."""
    problems = []
    for a in net.arcs:
        if _bad_number(a.capacity) or a.capacity < 0:
            problems.append(f"edge {a.tail}->{a.head}: negative or invalid capacity {a.capacity}")
        if a.tail == a.head:
            problems.append(f"edge {a.tail}->{a.head}: self-loop")
    for v, c in net.node_capacity.items():
        if _bad_number(c) or c < 0:
            problems.append(f"node {v}: negative or invalid processing capacity {c}")
    for i, d in enumerate(demands):
        if d.source not in net.node_capacity:
            problems.append(f"demand {i}: unknown source {d.source!r}")
        if d.sink not in net.node_capacity:
            problems.append(f"demand {i}: unknown sink {d.sink!r}")
        if d.source == d.sink:
            problems.append(f"demand {i}: degenerate demand {d.source}->{d.sink}")
        if math.isnan(d.amount) or d.amount <= 0:
            problems.append(f"demand {i}: amount must be positive, got {d.amount}")
    return ValidationReport(not problems, problems)


@dataclass
class WalkEntry:
    """One routed walk: `flow` units over `nodes`, processed per `processing`."""

    demand: int
    nodes: tuple[str, ...]
    flow: float
    processing: dict[str, float]


@dataclass
class WalkFlowSolution:
    entries: list[WalkEntry]
    meta: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return sum(e.flow for e in self.entries)

    def edge_loads(self, net: FlowNetwork) -> dict[int, float]:
        """Per-arc load, counting walk traversal multiplicity."""
        loads: dict[int, float] = {}
        for e in self.entries:
            for u, v in zip(e.nodes, e.nodes[1:]):
                idx = net.arc_index.get((u, v))
                if idx is None:
                    raise StructuralError(f"walk uses missing arc {u!r}->{v!r}")
                loads[idx] = loads.get(idx, 0.0) + e.flow
        return loads

    def group_loads(self, net: FlowNetwork) -> dict[int, float]:
        loads: dict[int, float] = {}
        for idx, load in self.edge_loads(net).items():
            g = net.arcs[idx].group
            loads[g] = loads.get(g, 0.0) + load
        return loads

    def node_loads(self) -> dict[str, float]:
        loads: dict[str, float] = {}
        for e in self.entries:
            for v, p in e.processing.items():
                loads[v] = loads.get(v, 0.0) + p
        return loads

    def delivered(self, demand: int) -> float:
        return sum(e.flow for e in self.entries if e.demand == demand)


def verify_walk_solution(net: FlowNetwork, demands: list[Demand],
                         sol: WalkFlowSolution) -> ValidationReport:
    """Feasibility check for a walk solution against network and demands.

    Structural nonsense (unknown demand, node, or arc) raises StructuralError;
    quantitative violations come back in the report with their magnitude.
    """
    problems = []
    for k, e in enumerate(sol.entries):
        if not 0 <= e.demand < len(demands):
            raise StructuralError(f"entry {k}: unknown demand {e.demand}")
        d = demands[e.demand]
        for v in e.nodes:
            net.node_index(v)
        for u, v in zip(e.nodes, e.nodes[1:]):
            if (u, v) not in net.arc_index:
                raise StructuralError(f"entry {k}: missing arc {u!r}->{v!r}")
        if len(e.nodes) < 2 or e.nodes[0] != d.source or e.nodes[-1] != d.sink:
            problems.append(f"entry {k}: not a {d.source}->{d.sink} route")
        visits: dict[str, int] = {}
        for v in e.nodes:
            visits[v] = visits.get(v, 0) + 1
        for v, n in visits.items():
            if n > 2:
                problems.append(f"entry {k}: node {v} visited {n} times")
        if e.flow < -ABS_TOL:
            problems.append(f"entry {k}: negative flow {e.flow}")
        total_p = 0.0
        for v, p in e.processing.items():
            if v not in visits:
                problems.append(f"entry {k}: processing at {v} which is not on the walk")
            if v == d.source or v == d.sink:
                problems.append(f"entry {k}: processing at demand endpoint {v}")
            if p < -ABS_TOL:
                problems.append(f"entry {k}: negative processing {p} at {v}")
            total_p += p
        if abs(total_p - e.flow) > max(ABS_TOL, REL_TOL * abs(e.flow)):
            problems.append(
                f"entry {k}: processing sums to {total_p}, flow is {e.flow}")

    for g, load in sol.group_loads(net).items():
        cap = net.group_capacity[g]
        if load > cap + feas_slack(cap):
            a = net.arcs[net.groups[g][0]]
            problems.append(
                f"edge {a.tail}-{a.head}: load {load} exceeds capacity {cap} by {load - cap}")
    for v, load in sol.node_loads().items():
        cap = net.node_capacity[v]
        if load > cap + feas_slack(cap):
            problems.append(
                f"node {v}: processing {load} exceeds capacity {cap} by {load - cap}")
    for i, d in enumerate(demands):
        got = sol.delivered(i)
        if got > d.amount + feas_slack(d.amount):
            problems.append(
                f"demand {i}: delivered {got} exceeds requested {d.amount}")
    return ValidationReport(not problems, problems)


@dataclass
class EdgeFlowSolution:
    """Per-demand arc flows: total, still-unprocessed part, and node processing.

    Maps are sparse (arc index -> value, node id -> value); missing means zero.
    `objective` is the total delivered processed flow, i.e. the sum over demands
    of net flow out of the source.
    """

    flow: list[dict[int, float]]
    unprocessed: list[dict[int, float]]
    processing: list[dict[str, float]]
    objective: float
    meta: dict = field(default_factory=dict)

    def delivered(self, net: FlowNetwork, demands: list[Demand], i: int) -> float:
        d = demands[i]
        f = self.flow[i]
        out = sum(f.get(a, 0.0) for a in net.out_arcs[d.source])
        inc = sum(f.get(a, 0.0) for a in net.in_arcs[d.source])
        return out - inc

    def group_loads(self, net: FlowNetwork) -> dict[int, float]:
        loads: dict[int, float] = {}
        for f in self.flow:
            for idx, val in f.items():
                g = net.arcs[idx].group
                loads[g] = loads.get(g, 0.0) + val
        return loads

    def node_loads(self) -> dict[str, float]:
        loads: dict[str, float] = {}
        for p in self.processing:
            for v, val in p.items():
                loads[v] = loads.get(v, 0.0) + val
        return loads


def verify_edge_solution(net: FlowNetwork, demands: list[Demand],
                         sol: EdgeFlowSolution) -> ValidationReport:
    """Feasibility check for an arc-level solution.

    Verifies, per demand: flow conservation away from the endpoints, the
    processing balance (processed volume at v equals unprocessed inflow minus
    unprocessed outflow), unprocessed <= total on every arc, everything leaving
    the source unprocessed, everything entering the sink processed. Then joint
    bandwidth and processing budgets.
    """
    problems = []
    if not (len(sol.flow) == len(sol.unprocessed) == len(sol.processing) == len(demands)):
        raise StructuralError("solution demand count does not match demands")

    for i, d in enumerate(demands):
        f, w, p = sol.flow[i], sol.unprocessed[i], sol.processing[i]
        for m in (f, w):
            for idx in m:
                if not 0 <= idx < net.n_arcs:
                    raise StructuralError(f"demand {i}: unknown arc index {idx}")
        for v in p:
            net.node_index(v)
        scale = max([1.0] + [abs(x) for x in f.values()])
        tol = max(ABS_TOL, REL_TOL * scale)
        for idx in set(f) | set(w):
            fv, wv = f.get(idx, 0.0), w.get(idx, 0.0)
            a = net.arcs[idx]
            if fv < -tol or wv < -tol:
                problems.append(f"demand {i} arc {a.tail}->{a.head}: negative flow")
            if wv > fv + tol:
                problems.append(
                    f"demand {i} arc {a.tail}->{a.head}: unprocessed {wv} > total {fv}")
        for v in net.nodes:
            fin = sum(f.get(a, 0.0) for a in net.in_arcs[v])
            fout = sum(f.get(a, 0.0) for a in net.out_arcs[v])
            win = sum(w.get(a, 0.0) for a in net.in_arcs[v])
            wout = sum(w.get(a, 0.0) for a in net.out_arcs[v])
            if v not in (d.source, d.sink) and abs(fin - fout) > tol:
                problems.append(
                    f"demand {i} node {v}: conservation off by {fin - fout}")
            if v != d.source:
                pv = p.get(v, 0.0)
                if abs(pv - (win - wout)) > tol:
                    problems.append(
                        f"demand {i} node {v}: processing {pv} != unprocessed balance {win - wout}")
                if pv < -tol:
                    problems.append(f"demand {i} node {v}: negative processing {pv}")
        if p.get(d.source, 0.0) > tol:
            problems.append(f"demand {i}: processing at source {d.source}")
        for a in net.out_arcs[d.source]:
            if abs(f.get(a, 0.0) - w.get(a, 0.0)) > tol:
                problems.append(
                    f"demand {i}: flow leaving source on arc {net.arcs[a].tail}->{net.arcs[a].head} not fully unprocessed")
        for a in net.in_arcs[d.sink]:
            if w.get(a, 0.0) > tol:
                problems.append(
                    f"demand {i}: unprocessed flow enters sink on {net.arcs[a].tail}->{net.arcs[a].head}")
        got = sol.delivered(net, demands, i)
        if got > d.amount + feas_slack(d.amount):
            problems.append(f"demand {i}: delivered {got} exceeds requested {d.amount}")

    for g, load in sol.group_loads(net).items():
        cap = net.group_capacity[g]
        if load > cap + feas_slack(cap):
            a = net.arcs[net.groups[g][0]]
            problems.append(
                f"edge {a.tail}-{a.head}: load {load} exceeds capacity {cap} by {load - cap}")
    for v, load in sol.node_loads().items():
        cap = net.node_capacity[v]
        if load > cap + feas_slack(cap):
            problems.append(
                f"node {v}: processing {load} exceeds capacity {cap} by {load - cap}")
    return ValidationReport(not problems, problems)
