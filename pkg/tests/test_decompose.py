import random

import pytest

from pflow.decompose import decompose, extraction_bound
from pflow.lp import solve_edge_lp
from pflow.model import Demand, FlowNetwork, verify_walk_solution

from oracles import walk_lp_optimum


def _solve_and_decompose(net, demands, selection="heap"):
    sol, _ = solve_edge_lp(net, demands)
    walks = decompose(sol, net, demands, selection=selection)
    return sol, walks


def test_single_relay_line(inst_line):
    net, demands = inst_line
    sol, walks = _solve_and_decompose(net, demands)
    assert verify_walk_solution(net, demands, walks).ok
    assert walks.objective == pytest.approx(sol.objective, abs=1e-9)
    assert [e.nodes for e in walks.entries] == [("s", "a", "t")]


def test_detour_produces_a_double_visit(inst_loop):
    net, demands = inst_loop
    _, walks = _solve_and_decompose(net, demands)
    assert verify_walk_solution(net, demands, walks).ok
    assert walks.objective == pytest.approx(2.0, abs=1e-9)
    revisiting = [e for e in walks.entries
                  if max(e.nodes.count(v) for v in e.nodes) == 2]
    assert revisiting, "expected a walk that revisits a vertex"


def test_recirculation_arc_does_not_confuse_extraction():
    # a cycle back through the source invites phantom circulation; the
    # decomposition must still account exactly for the delivered value
    net = FlowNetwork(
        "sat", [("s", "a", 10.0), ("a", "t", 10.0), ("a", "s", 10.0)],
        {"a": 3.0})
    demands = [Demand("s", "t")]
    sol, walks = _solve_and_decompose(net, demands)
    assert verify_walk_solution(net, demands, walks).ok
    assert walks.objective == pytest.approx(sol.objective, abs=1e-6)


def test_extraction_bound_formula():
    net = FlowNetwork("sat", [("s", "a", 1.0), ("a", "t", 1.0)])
    assert extraction_bound(net) == 3 + 2 * 2
    undirected = FlowNetwork("ab", [("a", "b", 1.0)], directed=False)
    # antiparallel pair is one edge budget but two arcs
    assert extraction_bound(undirected) == 2 + 2 * 2


def test_selection_strategies_agree(inst_loop):
    net, demands = inst_loop
    sol, _ = solve_edge_lp(net, demands)
    heap = decompose(sol, net, demands, selection="heap")
    scan = decompose(sol, net, demands, selection="scan")
    assert [(e.nodes, round(e.flow, 9)) for e in heap.entries] == \
           [(e.nodes, round(e.flow, 9)) for e in scan.entries]


def test_unknown_selection_rejected(inst_line):
    net, demands = inst_line
    sol, _ = solve_edge_lp(net, demands)
    with pytest.raises(ValueError):
        decompose(sol, net, demands, selection="magic")


def test_random_instances_round_trip():
    """Reduced copy of the acceptance corpus: every decomposition must
    verify, preserve the objective, and respect the extraction bound."""
    rng = random.Random(818)
    for trial in range(40):
        n = rng.randint(3, 6)
        names = [f"v{i}" for i in range(n)]
        directed = rng.random() < 0.6
        pairs = [(a, b) for a in names for b in names if a != b]
        if not directed:
            pairs = [(a, b) for a, b in pairs if a < b]
        rng.shuffle(pairs)
        m = rng.randint(n - 1, min(len(pairs), 2 * n))
        edges = [(a, b, float(rng.randint(1, 5))) for a, b in pairs[:m]]
        caps = {v: float(rng.randint(0, 4)) for v in names}
        net = FlowNetwork(names, edges, caps, directed=directed)
        demands = [Demand(*rng.sample(names, 2))
                   for _ in range(rng.randint(1, 2))]
        sol, walks = _solve_and_decompose(net, demands)
        rep = verify_walk_solution(net, demands, walks)
        assert rep.ok, (trial, rep.problems[:3])
        assert walks.objective == pytest.approx(sol.objective, abs=1e-6)
        bound = extraction_bound(net)
        assert all(x <= bound for x in walks.meta["extractions"])
        assert all(max(e.nodes.count(v) for v in e.nodes) <= 2
                   for e in walks.entries)
        # and the edge optimum itself equals the walk-level optimum
        opt = walk_lp_optimum(net, demands)
        assert abs(opt - sol.objective) <= 1e-6 * max(1.0, abs(opt))
