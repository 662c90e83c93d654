"""Node purchase optimization: decide which processing nodes to buy.

Two variants over a network whose node capacity C(v) is only *potential*
until the node is purchased at cost q(v): minimize purchase cost subject to
serving every demand in full, or maximize served flow under a budget. Both
are solved as LP relaxations over fractional purchase levels x(v) in [0,1]
and rounded randomly; an exact greedy with a max-flow oracle covers the
undirected single-source budgeted case.

Flow bookkeeping differs from the fixed-capacity world: each unit is routed
as a two-leg itinerary through its chosen processing vertex v, an unprocessed
leg source->v and a processed leg v->sink. Processing at the source or sink
itself is legitimate here (the itinerary then has a single leg).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .decompose import SNAP
from .lp import LPModel, LPResult, solve_lp
from .model import (Demand, EdgeFlowSolution, FlowNetwork, InfeasibleError,
                    StructuralError, ValidationReport, feas_slack,
                    validate_instance)


@dataclass
class PurchaseInstance:
    """A network whose processing capacity must be bought before use.

    `potential` maps node -> capacity available if purchased; absent or zero
    means the node is not for sale. `cost` maps node -> purchase price
    (defaults to 0 for nodes with potential, which makes them free).
    `budget` is only meaningful for the budgeted variant.
    """

    net: FlowNetwork
    demands: list[Demand]
    potential: dict[str, float] = field(default_factory=dict)
    cost: dict[str, float] = field(default_factory=dict)
    budget: float | None = None

    def candidates(self) -> list[str]:
        """Purchasable nodes, in network node order."""
        return [v for v in self.net.nodes if self.potential.get(v, 0.0) > 0.0]

    def price(self, v: str) -> float:
        return float(self.cost.get(v, 0.0))


def validate_purchase_instance(inst: PurchaseInstance,
                               mode: str = "min") -> ValidationReport:
    problems = list(validate_instance(inst.net, inst.demands).problems)
    for v, c in inst.potential.items():
        if v not in inst.net.node_capacity:
            problems.append(f"potential at unknown node {v!r}")
        elif math.isnan(c) or c < 0:
            problems.append(f"node {v}: negative or invalid potential {c}")
    for v, q in inst.cost.items():
        if v not in inst.net.node_capacity:
            problems.append(f"cost at unknown node {v!r}")
        elif math.isnan(q) or q < 0 or q == math.inf:
            problems.append(f"node {v}: negative or invalid cost {q}")
    for i, d in enumerate(inst.demands):
        if not math.isfinite(d.amount):
            problems.append(f"demand {i}: purchase variants need a finite amount")
    if mode == "budgeted":
        if inst.budget is None:
            problems.append("budgeted mode needs a budget")
        elif math.isnan(inst.budget) or inst.budget < 0:
            problems.append(f"invalid budget {inst.budget}")
    elif mode != "min":
        problems.append(f"unknown purchase mode {mode!r}")
    return ValidationReport(not problems, problems)


@dataclass
class PurchaseLPSolution:
    """Fractional relaxation output.

    `pre_leg[(i, v)]` and `post_leg[(i, v)]` are sparse arc->flow maps for
    demand i's unprocessed (source->v) and processed (v->sink) legs through
    processing vertex v. When v is the demand's own source only a post leg
    exists (flow departs processed); when v is its sink only a pre leg does
    (flow converts on arrival). `served[(i, v)]` is what that leg pair
    delivers, `processed[(i, v)]` the processing volume it uses at v.
    """

    x: dict[str, float]
    pre_leg: dict[tuple[int, str], dict[int, float]]
    post_leg: dict[tuple[int, str], dict[int, float]]
    served: dict[tuple[int, str], float]
    processed: dict[tuple[int, str], float]
    objective: float
    meta: dict = field(default_factory=dict)

    def served_total(self, i: int) -> float:
        return sum(val for (j, _), val in self.served.items() if j == i)


@dataclass
class PurchaseSolution:
    purchased: set[str]
    cost: float
    flows: EdgeFlowSolution
    served: dict[int, float]  # demand -> delivered fraction of its amount
    meta: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.flows.objective


def _empty_purchase(inst: PurchaseInstance, reason: str, **meta) -> PurchaseSolution:
    n = len(inst.demands)
    flows = EdgeFlowSolution([{} for _ in range(n)], [{} for _ in range(n)],
                             [{} for _ in range(n)], 0.0)
    return PurchaseSolution(set(), 0.0, flows, {i: 0.0 for i in range(n)},
                            {"reason": reason, **meta})


def build_purchase_lp(inst: PurchaseInstance, mode: str = "min",
                      budget_cap: float | None = None,
                      fix: dict[str, float] | None = None) -> LPModel:
    """Edge-based LP over fractional purchases.

    Variables: x(v) in [0,1] per candidate, plus the two leg flows per
    (demand, candidate, arc). A leg pair routes unprocessed flow source->v
    (forbidden to leave v or to enter the source, so it terminates where it
    is processed) and processed flow v->sink (forbidden to enter v or leave
    the sink). A candidate coinciding with the demand's own source or sink
    collapses to a single leg: processed at departure (all flow leaves the
    source already processed) or on arrival (the whole route is unprocessed
    and conversion happens at the sink). Cover-style reductions lean on
    these degenerate legs, so they are first-class here.

    Coupling: processing at v <= C(v)x(v); per candidate, the flow its legs
    put on an edge <= B(e)x(v); per demand, what its v-legs deliver <=
    R_i x(v). On top of these, each edge carries the summed load of ALL legs
    of ALL demands, so the aggregate must fit the actual capacity B(e); any
    integral purchase satisfies that bound, hence adding it keeps the LP a
    relaxation while making rounded superpositions fit in expectation.

    `mode` "min": minimize total purchase cost, serve every demand in full.
    "budgeted": maximize served flow, demands become upper bounds, and the
    purchase cost is capped by `budget_cap` (pass None to drop the cap, e.g.
    when `fix` pins the purchase vector to an integral point and the cost is
    known anyway).
    """
    net = inst.net
    cands = inst.candidates()
    m = LPModel(f"purchase-{mode}", sense="min" if mode == "min" else "max")

    xvar: dict[str, int] = {}
    for v in cands:
        lo, hi = 0.0, 1.0
        if fix is not None:
            lo = hi = float(fix.get(v, 0.0))
        xvar[v] = m.add_var(f"x.{v}", lo, hi)

    pre: dict[tuple[int, str], dict[int, int]] = {}
    post: dict[tuple[int, str], dict[int, int]] = {}
    served_terms: dict[tuple[int, str], list[tuple[int, float]]] = {}
    proc_terms: dict[tuple[int, str], list[tuple[int, float]]] = {}

    for i, d in enumerate(inst.demands):
        for v in cands:
            if v == d.source or v == d.sink:
                # degenerate leg: one end of the itinerary IS the processing
                # point, so a single source->sink flow carries everything
                blocked = set(net.in_arcs[d.source]) | set(net.out_arcs[d.sink])
                tag = "p" if v == d.source else "u"
                fv = {a: m.add_var(f"{tag}{i}.{v}.{a}", 0.0,
                                   0.0 if a in blocked else math.inf)
                      for a in range(net.n_arcs)}
                if v == d.source:
                    post[(i, v)] = fv
                else:
                    pre[(i, v)] = fv
                for u in net.nodes:
                    if u == d.source or u == d.sink:
                        continue
                    coeffs = [(fv[a], 1.0) for a in net.in_arcs[u]]
                    coeffs += [(fv[a], -1.0) for a in net.out_arcs[u]]
                    if coeffs:
                        m.add_constraint(coeffs, "==", 0.0, f"{tag}{i}.{v}@{u}")
                served_terms[(i, v)] = [(fv[a], 1.0)
                                        for a in net.out_arcs[d.source]]
                if v == d.source:
                    proc_terms[(i, v)] = list(served_terms[(i, v)])
                else:
                    proc_terms[(i, v)] = [(fv[a], 1.0)
                                          for a in net.in_arcs[d.sink]]
                continue
            # unprocessed leg: may not leave v, may not re-enter the source
            blocked = set(net.out_arcs[v]) | set(net.in_arcs[d.source])
            pv = {a: m.add_var(f"u{i}.{v}.{a}", 0.0,
                               0.0 if a in blocked else math.inf)
                  for a in range(net.n_arcs)}
            # processed leg: may not enter v, may not leave the sink
            blocked = set(net.in_arcs[v]) | set(net.out_arcs[d.sink])
            qv = {a: m.add_var(f"p{i}.{v}.{a}", 0.0,
                               0.0 if a in blocked else math.inf)
                  for a in range(net.n_arcs)}
            pre[(i, v)] = pv
            post[(i, v)] = qv

            for u in net.nodes:
                if u != d.source and u != v:
                    coeffs = [(pv[a], 1.0) for a in net.in_arcs[u]]
                    coeffs += [(pv[a], -1.0) for a in net.out_arcs[u]]
                    if coeffs:
                        m.add_constraint(coeffs, "==", 0.0, f"u{i}.{v}@{u}")
                if u != v and u != d.sink:
                    coeffs = [(qv[a], 1.0) for a in net.in_arcs[u]]
                    coeffs += [(qv[a], -1.0) for a in net.out_arcs[u]]
                    if coeffs:
                        m.add_constraint(coeffs, "==", 0.0, f"p{i}.{v}@{u}")
            # everything delivered to v unprocessed leaves it processed
            coeffs = [(pv[a], 1.0) for a in net.in_arcs[v]]
            coeffs += [(qv[a], -1.0) for a in net.out_arcs[v]]
            m.add_constraint(coeffs, "==", 0.0, f"conv{i}.{v}")

            served_terms[(i, v)] = [(pv[a], 1.0) for a in net.out_arcs[d.source]]
            proc_terms[(i, v)] = [(pv[a], 1.0) for a in net.in_arcs[v]]

    for i, d in enumerate(inst.demands):
        terms = []
        for v in cands:
            terms += served_terms.get((i, v), [])
        sense = ">=" if mode == "min" else "<="
        if terms or mode == "min":
            m.add_constraint(terms, sense, d.amount, f"demand{i}")
        for v in cands:
            if (i, v) not in served_terms:
                continue
            coeffs = list(served_terms[(i, v)]) + [(xvar[v], -d.amount)]
            m.add_constraint(coeffs, "<=", 0.0, f"cap{i}.{v}")

    for v in cands:
        coeffs = []
        for i in range(len(inst.demands)):
            coeffs += proc_terms.get((i, v), [])
        coeffs.append((xvar[v], -inst.potential[v]))
        m.add_constraint(coeffs, "<=", 0.0, f"proc.{v}")

    for g, arcs in enumerate(net.groups):
        if not math.isfinite(net.group_capacity[g]):
            continue
        total = []
        for v in cands:
            coeffs = []
            for i in range(len(inst.demands)):
                for leg in (pre.get((i, v)), post.get((i, v))):
                    if leg is None:
                        continue
                    for a in arcs:
                        if a in leg:
                            coeffs.append((leg[a], 1.0))
            total += coeffs
            coeffs.append((xvar[v], -net.group_capacity[g]))
            m.add_constraint(coeffs, "<=", 0.0, f"bw.{g}.{v}")
        if total:
            m.add_constraint(total, "<=", net.group_capacity[g], f"bw.{g}")

    if mode == "min":
        m.set_objective({xvar[v]: inst.price(v) for v in cands})
    else:
        obj: dict[int, float] = {}
        for terms in served_terms.values():
            for var, coef in terms:
                obj[var] = obj.get(var, 0.0) + coef
        m.set_objective(obj)
        if budget_cap is not None:
            coeffs = [(xvar[v], inst.price(v)) for v in cands]
            m.add_constraint(coeffs, "<=", budget_cap, "budget")

    m.info = {"x": xvar, "pre": pre, "post": post,
              "served": served_terms, "processed": proc_terms, "mode": mode}
    return m


def _leg_values(var_map: dict[int, int], get) -> dict[int, float]:
    out = {}
    for a, j in var_map.items():
        val = get(j)
        if val > SNAP:
            out[a] = val
    return out


def solve_purchase_lp(inst: PurchaseInstance, mode: str = "min",
                      budget_cap: float | None = None,
                      fix: dict[str, float] | None = None
                      ) -> tuple[PurchaseLPSolution, LPResult]:
    """Build, solve, and unpack the purchase relaxation.

    Min mode raises InfeasibleError when the demands cannot be met even with
    every candidate bought outright.
    """
    rep = validate_purchase_instance(inst, mode)
    if not rep:
        raise StructuralError("; ".join(rep.problems))
    if mode == "budgeted" and budget_cap is None and fix is None:
        budget_cap = inst.budget / 2.0

    model = build_purchase_lp(inst, mode, budget_cap=budget_cap, fix=fix)
    res = solve_lp(model)
    if res.status == "infeasible":
        if mode == "min":
            raise InfeasibleError("demands unsatisfiable even buying everything")
        raise InfeasibleError("budgeted relaxation infeasible")
    if res.status != "optimal":
        raise InfeasibleError(f"purchase LP ended {res.status}")

    names = {j: var.name for j, var in enumerate(model.variables)}

    def get(j: int) -> float:
        return res.assignment.get(names[j], 0.0)

    info = model.info
    x = {v: min(1.0, max(0.0, get(j))) for v, j in info["x"].items()}
    pre_leg = {key: _leg_values(vm, get) for key, vm in info["pre"].items()}
    post_leg = {key: _leg_values(vm, get) for key, vm in info["post"].items()}
    served = {key: max(0.0, sum(get(j) * c for j, c in terms))
              for key, terms in info["served"].items()}
    processed = {key: max(0.0, sum(get(j) * c for j, c in terms))
                 for key, terms in info["processed"].items()}
    sol = PurchaseLPSolution(x, pre_leg, post_leg, served, processed,
                             res.objective,
                             {"mode": mode, "lp_iterations": res.iterations,
                              "budget_cap": budget_cap})
    return sol, res


def _superpose(inst: PurchaseInstance, lp_sol: PurchaseLPSolution,
               weight: dict[str, float]) -> tuple[list, list, list, list]:
    """Combine leg flows over processing vertices with per-vertex weights.

    weight[v] multiplies every (i, v) leg pair; vertices absent from the map
    contribute nothing. Returns per-demand flow / unprocessed / processing
    sparse maps plus delivered totals.
    """
    n = len(inst.demands)
    flow: list[dict[int, float]] = [{} for _ in range(n)]
    unproc: list[dict[int, float]] = [{} for _ in range(n)]
    proc: list[dict[str, float]] = [{} for _ in range(n)]
    delivered = [0.0] * n
    for (i, v), wmap in lp_sol.pre_leg.items():
        w = weight.get(v, 0.0)
        if w <= 0.0:
            continue
        for a, val in wmap.items():
            flow[i][a] = flow[i].get(a, 0.0) + w * val
            unproc[i][a] = unproc[i].get(a, 0.0) + w * val
    for (i, v), wmap in lp_sol.post_leg.items():
        w = weight.get(v, 0.0)
        if w <= 0.0:
            continue
        for a, val in wmap.items():
            flow[i][a] = flow[i].get(a, 0.0) + w * val
    for (i, v), val in lp_sol.processed.items():
        w = weight.get(v, 0.0)
        if w > 0.0 and val > 0.0:
            proc[i][v] = proc[i].get(v, 0.0) + w * val
    for (i, v), val in lp_sol.served.items():
        delivered[i] += weight.get(v, 0.0) * val
    return flow, unproc, proc, delivered


def _clamp_to_caps(inst: PurchaseInstance, purchased: set[str],
                   flow, unproc, proc, delivered) -> float:
    """Scale everything down to hard feasibility; returns the factor used.

    Two stages, both no-ops when nothing overshoots: one global factor for
    the worst edge/node overload, then per-demand factors so nobody is
    credited more than they asked for.
    """
    net = inst.net
    peak = 1.0
    group_load: dict[int, float] = {}
    for fm in flow:
        for a, val in fm.items():
            g = net.arcs[a].group
            group_load[g] = group_load.get(g, 0.0) + val
    for g, load in group_load.items():
        cap = net.group_capacity[g]
        if load > cap:
            peak = max(peak, math.inf if cap <= 0.0 else load / cap)
    node_load: dict[str, float] = {}
    for pm in proc:
        for v, val in pm.items():
            node_load[v] = node_load.get(v, 0.0) + val
    for v, load in node_load.items():
        cap = inst.potential.get(v, 0.0) if v in purchased else 0.0
        if load > cap:
            peak = max(peak, math.inf if cap <= 0.0 else load / cap)
    if not math.isfinite(peak):
        raise StructuralError("flow on a zero-capacity resource")

    gamma = peak * (1.0 + 1e-12) if peak > 1.0 else 1.0
    if gamma > 1.0:
        for maps in (flow, unproc, proc):
            for m_ in maps:
                for key in m_:
                    m_[key] /= gamma
        for i in range(len(delivered)):
            delivered[i] /= gamma

    for i, d in enumerate(inst.demands):
        if delivered[i] > d.amount:
            s = d.amount / (delivered[i] * (1.0 + 1e-12))
            for m_ in (flow[i], unproc[i], proc[i]):
                for key in m_:
                    m_[key] *= s
            delivered[i] = d.amount
    return gamma


def _package(inst: PurchaseInstance, purchased: set[str], flow, unproc, proc,
             delivered, meta: dict) -> PurchaseSolution:
    cost = sum(inst.price(v) for v in purchased)
    flows = EdgeFlowSolution(flow, unproc, proc, sum(delivered), meta=dict(meta))
    served = {}
    for i, d in enumerate(inst.demands):
        served[i] = delivered[i] / d.amount if d.amount > 0 else 1.0
    return PurchaseSolution(set(purchased), cost, flows, served, dict(meta))


def rounding_rounds(n_nodes: int, delta: float) -> int:
    """Sampling repetitions that push the failure probability to 1/poly(n)."""
    eps = delta / 2.0
    return math.ceil(9.0 * math.log(max(n_nodes, 2)) / (eps * eps))


def round_min_purchase(inst: PurchaseInstance, lp_sol: PurchaseLPSolution,
                       delta: float, rng_seed: int,
                       rounds: int | None = None) -> PurchaseSolution:
    """Randomized rounding of the min-cost relaxation.

    Runs t independent rounds, each buying candidate v with probability x(v)
    and routing its leg flows scaled up by 1/x(v); the union is purchased and
    the superposed flow is averaged over rounds. The average respects node
    budgets outright and edge budgets in expectation (the aggregate edge
    constraint makes the expectation exactly the LP load), so the final clamp
    is almost always the identity; it exists because the service guarantee is
    probabilistic but the feasibility contract here is not. Delivered amounts
    land at (1-delta)R_i or better with high probability.

    An integral LP solution passes through exactly: every round buys the
    support, the average equals the LP flow, and the clamps change nothing.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0,1), got {delta}")
    eps = delta / 2.0
    t = rounds if rounds is not None else rounding_rounds(inst.net.n_nodes, delta)
    if t < 1:
        raise ValueError(f"need at least one round, got {t}")
    rng = random.Random(rng_seed)

    support = [v for v in inst.candidates() if lp_sol.x.get(v, 0.0) > SNAP]
    counts = {v: 0 for v in support}
    for _ in range(t):
        for v in support:
            if rng.random() < lp_sol.x[v]:
                counts[v] += 1

    purchased = {v for v, c in counts.items() if c > 0}
    weight = {v: counts[v] / (lp_sol.x[v] * t) for v in purchased}
    flow, unproc, proc, delivered = _superpose(inst, lp_sol, weight)
    gamma = _clamp_to_caps(inst, purchased, flow, unproc, proc, delivered)
    meta = {"algorithm": "purchase-min-rounding", "delta": delta,
            "epsilon": eps, "rounds": t, "seed": rng_seed, "gamma": gamma,
            "lp_cost": lp_sol.objective}
    return _package(inst, purchased, flow, unproc, proc, delivered, meta)


def _prune_potential(inst: PurchaseInstance, keep) -> PurchaseInstance:
    pot = {v: c for v, c in inst.potential.items() if keep(v)}
    return PurchaseInstance(inst.net, inst.demands, pot, inst.cost, inst.budget)


def round_budgeted_purchase(inst: PurchaseInstance, rng_seed: int,
                            repetitions: int | None = None) -> PurchaseSolution:
    """Budget-constrained purchase by LP rounding, best of several attempts.

    Solves the relaxation at half budget. If some single affordable vertex
    already supports a 1/(2 ln n) fraction of the relaxation value (checked
    by re-solving with the purchase vector pinned to that vertex), the
    randomized stage is skipped. Otherwise vertices costing k/ln n or more
    are pruned, the relaxation is re-solved, and each repetition samples a
    purchase set (v with probability x(v)) whose flows are scaled by
    1/(4 x(v) ln n); repetitions that bust the budget are discarded outright,
    so the returned cost is <= k always, not merely in expectation.

    The answer is the best of a candidate pool that always contains the best
    single vertex and, when the budget covers every candidate at once, the
    full candidate set (both evaluated by the same pinned-purchase LP); a
    generous budget therefore degrades to the exact relaxation optimum
    instead of stopping at one vertex.
    """
    rep_check = validate_purchase_instance(inst, "budgeted")
    if not rep_check:
        raise StructuralError("; ".join(rep_check.problems))
    k = float(inst.budget)
    if k <= 0.0:
        return _empty_purchase(inst, "zero budget")
    n = max(inst.net.n_nodes, 2)
    ln_n = math.log(n)
    rng = random.Random(rng_seed)

    affordable = _prune_potential(inst, lambda v: inst.price(v) <= k)
    cands = affordable.candidates()
    if not cands:
        return _empty_purchase(inst, "no affordable candidates")
    lp_sol, _ = solve_purchase_lp(affordable, "budgeted")
    if lp_sol.objective <= SNAP:
        return _empty_purchase(inst, "relaxation value zero",
                               lp_value=lp_sol.objective)

    def restricted(subset: set[str], branch: str) -> PurchaseSolution:
        fix = {u: (1.0 if u in subset else 0.0) for u in cands}
        sol_f, _ = solve_purchase_lp(affordable, "budgeted", budget_cap=None,
                                     fix=fix)
        weight = {u: 1.0 for u in subset}
        flow, unproc, proc, delivered = _superpose(affordable, sol_f, weight)
        gamma = _clamp_to_caps(affordable, set(subset), flow, unproc, proc,
                               delivered)
        return _package(inst, set(subset), flow, unproc, proc, delivered,
                        {"algorithm": "purchase-budgeted", "branch": branch,
                         "gamma": gamma, "seed": rng_seed,
                         "lp_value": lp_sol.objective})

    pool: list[PurchaseSolution] = []
    best_single = None
    for v in cands:
        cand = restricted({v}, "single")
        if best_single is None or cand.value > best_single.value:
            best_single = cand
    if best_single is not None and best_single.value > SNAP:
        pool.append(best_single)
    if len(cands) > 1 and sum(inst.price(v) for v in cands) <= k:
        pool.append(restricted(set(cands), "full-set"))

    shortcut = best_single is not None and \
        best_single.value >= lp_sol.objective / (2.0 * ln_n)
    if not shortcut:
        pruned = _prune_potential(affordable, lambda v: inst.price(v) < k / ln_n)
        sample_sol = None
        if pruned.candidates():
            sample_sol, _ = solve_purchase_lp(pruned, "budgeted")
        reps = repetitions if repetitions is not None \
            else math.ceil(math.log2(n)) + 3
        if sample_sol is not None and sample_sol.objective > SNAP:
            scale = 1.0 / (4.0 * ln_n)
            for r in range(reps):
                picked = [v for v in pruned.candidates()
                          if sample_sol.x.get(v, 0.0) > SNAP
                          and rng.random() < sample_sol.x[v]]
                if not picked:
                    continue
                if sum(inst.price(v) for v in picked) > k:
                    continue  # busting the budget disqualifies the attempt
                weight = {v: scale / sample_sol.x[v] for v in picked}
                flow, unproc, proc, delivered = _superpose(pruned, sample_sol,
                                                           weight)
                gamma = _clamp_to_caps(pruned, set(picked), flow, unproc,
                                       proc, delivered)
                pool.append(_package(inst, set(picked), flow, unproc, proc,
                                     delivered,
                                     {"algorithm": "purchase-budgeted",
                                      "branch": "sampled", "repetition": r,
                                      "gamma": gamma, "seed": rng_seed,
                                      "lp_value": lp_sol.objective}))

    if not pool:
        return _empty_purchase(inst, "no attempt survived the budget",
                               lp_value=lp_sol.objective)
    best = max(pool, key=lambda s: s.value)
    best.meta["pool_size"] = len(pool)
    best.meta["shortcut"] = shortcut
    best.flows.meta.update(pool_size=len(pool), shortcut=shortcut)
    return best


# --- undirected single-source greedy ---------------------------------------

def _max_flow(nodes, arcs, group_cap, source, sink) -> tuple[float, dict[int, float]]:
    """Max source->sink flow; arcs as (tail, head, group), caps per group.

    Returns value and per-arc flows. Group capacity is shared across every
    arc in the group (an undirected edge is two arcs in one group).
    """
    m = LPModel("maxflow", sense="max")
    var = [m.add_var(f"a{j}") for j in range(len(arcs))]
    by_tail: dict[str, list[int]] = {v: [] for v in nodes}
    by_head: dict[str, list[int]] = {v: [] for v in nodes}
    for j, (tail, head, _) in enumerate(arcs):
        by_tail[tail].append(j)
        by_head[head].append(j)
    for u in nodes:
        if u in (source, sink):
            continue
        coeffs = [(var[j], 1.0) for j in by_head[u]]
        coeffs += [(var[j], -1.0) for j in by_tail[u]]
        if coeffs:
            m.add_constraint(coeffs, "==", 0.0, f"bal@{u}")
    groups: dict[int, list[int]] = {}
    for j, (_, _, g) in enumerate(arcs):
        groups.setdefault(g, []).append(j)
    for g, members in groups.items():
        cap = group_cap[g]
        if math.isfinite(cap):
            m.add_constraint([(var[j], 1.0) for j in members], "<=", cap, f"cap{g}")
    obj = {var[j]: 1.0 for j in by_tail[source]}
    for j in by_head[source]:
        obj[var[j]] = obj.get(var[j], 0.0) - 1.0
    m.set_objective(obj)
    res = solve_lp(m)
    if res.status != "optimal":
        raise InfeasibleError(f"max-flow LP ended {res.status}")
    flows = {j: res.assignment.get(f"a{j}", 0.0) for j in range(len(arcs))}
    return res.objective, flows


class _ProcessingFlowOracle:
    """f(P) = max flow a purchased set P can push to the source through the
    quarter-capacity copy of the network, each p in P throttled at its
    potential. Memoized: the greedy re-evaluates overlapping sets heavily.
    """

    def __init__(self, inst: PurchaseInstance, source: str):
        net = inst.net
        self.inst = inst
        self.source = source
        self.nodes = list(net.nodes) + ["+pool"]
        self.base_arcs = [(a.tail, a.head, a.group) for a in net.arcs]
        self.base_caps = [c / 4.0 for c in net.group_capacity]
        self.cache: dict[frozenset, tuple[float, dict]] = {}

    def __call__(self, subset) -> float:
        return self.evaluate(subset)[0]

    def evaluate(self, subset) -> tuple[float, dict[str, float]]:
        """Flow value plus the processing load each member carries."""
        key = frozenset(subset)
        if key in self.cache:
            return self.cache[key]
        arcs = list(self.base_arcs)
        caps = list(self.base_caps)
        feeders = {}
        for p in sorted(key):
            g = len(caps)
            feeders[p] = len(arcs)
            arcs.append(("+pool", p, g))
            caps.append(self.inst.potential.get(p, 0.0))
        value, flows = _max_flow(self.nodes, arcs, caps, "+pool", self.source)
        load = {p: flows[j] for p, j in feeders.items() if flows[j] > SNAP}
        out = (value, load)
        self.cache[key] = out
        return out


def _knapsack_greedy(oracle, items: list[str], price, budget: float,
                     depth: int) -> tuple[set[str], float]:
    """Partial-enumeration greedy for monotone submodular max under knapsack.

    Every seed set of size <= depth that fits the budget is extended
    greedily by the best marginal gain per unit cost; depth 3 carries the
    classic (1-1/e) factor, depth 1 only max(greedy, best singleton).
    """
    from itertools import combinations

    best: tuple[set[str], float] = (set(), oracle(frozenset()))
    seeds = [()]
    for size in range(1, min(depth, len(items)) + 1):
        seeds += list(combinations(items, size))
    for seed in seeds:
        S = set(seed)
        spent = sum(price(v) for v in S)
        if spent > budget:
            continue
        val = oracle(S)
        while True:
            pick, pick_ratio, pick_val = None, 0.0, val
            for v in items:
                if v in S or spent + price(v) > budget:
                    continue
                cand = oracle(S | {v})
                gain = cand - val
                if gain <= SNAP:
                    continue
                ratio = gain / max(price(v), 1e-30)
                if ratio > pick_ratio:
                    pick, pick_ratio, pick_val = v, ratio, cand
            if pick is None:
                break
            S.add(pick)
            spent += price(pick)
            val = pick_val
        if val > best[1] or (val == best[1] and not best[0] and S):
            best = (S, val)
    return best


def greedy_budgeted_single_source(inst: PurchaseInstance,
                                  depth: int = 3) -> PurchaseSolution:
    """Greedy purchase for undirected networks where all demands share one
    source.

    Edge capacity is split: half reserved for final routing toward the
    sinks, the other half for the processing detour, which itself is split
    into a quarter out to the purchased nodes and a quarter back (the return
    trip mirrors the outbound flow on the same undirected edges, so its
    feasibility is free). Purchases maximize the quarter-capacity flow the
    bought nodes can process and return, a monotone submodular objective
    handled by the knapsack greedy; the delivered value is that flow pushed
    through the routing half toward the sinks, demand-capped.

    `depth` is the partial-enumeration depth (3 for the guarantee, 1 as a
    faster weaker mode).
    """
    rep = validate_purchase_instance(inst, "budgeted")
    if not rep:
        raise StructuralError("; ".join(rep.problems))
    if inst.net.directed:
        raise StructuralError("greedy purchase handles undirected networks only")
    sources = {d.source for d in inst.demands}
    if len(sources) != 1:
        raise StructuralError(
            "greedy purchase needs a single shared source; "
            "use round_budgeted_purchase for general instances")
    source = sources.pop()
    k = float(inst.budget)
    if k <= 0.0:
        return _empty_purchase(inst, "zero budget")

    oracle = _ProcessingFlowOracle(inst, source)
    # the source itself is a fine place to process (its feeder reaches the
    # oracle sink without touching any edge budget)
    items = [v for v in inst.candidates() if inst.price(v) <= k]
    chosen, proc_value = _knapsack_greedy(oracle, items, inst.price, k, depth)
    if proc_value <= SNAP:
        return _empty_purchase(inst, "no processable flow",
                               candidates=len(items))
    _, proc_load = oracle.evaluate(chosen)

    # routing half: one commodity per demand over B/2, total throttled by
    # what the detour can process
    net = inst.net
    m = LPModel("route", sense="max")
    fvar: list[dict[int, int]] = []
    for i in range(len(inst.demands)):
        fvar.append({a: m.add_var(f"f{i}.{a}") for a in range(net.n_arcs)})
    deliver_terms = []
    for i, d in enumerate(inst.demands):
        for u in net.nodes:
            if u in (d.source, d.sink):
                continue
            coeffs = [(fvar[i][a], 1.0) for a in net.in_arcs[u]]
            coeffs += [(fvar[i][a], -1.0) for a in net.out_arcs[u]]
            m.add_constraint(coeffs, "==", 0.0, f"bal{i}@{u}")
        terms = [(fvar[i][a], 1.0) for a in net.out_arcs[d.source]]
        terms += [(fvar[i][a], -1.0) for a in net.in_arcs[d.source]]
        m.add_constraint(terms, "<=", d.amount, f"demand{i}")
        deliver_terms.append(terms)
    for g, arcs in enumerate(net.groups):
        coeffs = []
        for i in range(len(inst.demands)):
            coeffs += [(fvar[i][a], 1.0) for a in arcs]
        m.add_constraint(coeffs, "<=", net.group_capacity[g] / 2.0, f"bw{g}")
    total = []
    for terms in deliver_terms:
        total += terms
    m.add_constraint(total, "<=", proc_value, "processed")
    obj: dict[int, float] = {}
    for terms in deliver_terms:
        for j, c in terms:
            obj[j] = obj.get(j, 0.0) + c
    m.set_objective(obj)
    res = solve_lp(m)
    if res.status != "optimal":
        raise InfeasibleError(f"routing LP ended {res.status}")

    n = len(inst.demands)
    flow = [{} for _ in range(n)]
    delivered = [0.0] * n
    for i, d in enumerate(inst.demands):
        for a in range(net.n_arcs):
            val = res.assignment.get(f"f{i}.{a}", 0.0)
            if val > SNAP:
                flow[i][a] = val
        out = sum(res.assignment.get(f"f{i}.{a}", 0.0) for a in net.out_arcs[d.source])
        inc = sum(res.assignment.get(f"f{i}.{a}", 0.0) for a in net.in_arcs[d.source])
        delivered[i] = max(0.0, out - inc)
    served_total = sum(delivered)

    # attribute processing to demands pro rata; the detour legs live on the
    # other half of the capacity and are reported aggregate in meta
    proc = [{} for _ in range(n)]
    if served_total > SNAP and proc_value > SNAP:
        use = served_total / proc_value
        for i in range(n):
            share = delivered[i] / served_total
            for v, amount in proc_load.items():
                val = amount * use * share
                if val > SNAP:
                    proc[i][v] = val
    unproc = [{} for _ in range(n)]
    meta = {"algorithm": "purchase-greedy", "processable": proc_value,
            "route_value": served_total, "depth": depth,
            "halving": {"route": 0.5, "detour_each_way": 0.25},
            "processing_load": proc_load}
    return _package(inst, set(chosen), flow, unproc, proc, delivered, meta)
