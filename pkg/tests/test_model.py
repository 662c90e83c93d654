import math

import pytest

from pflow.model import (Demand, FlowNetwork, StructuralError, WalkEntry,
                         WalkFlowSolution, feas_slack, validate_instance,
                         verify_walk_solution)


def test_directed_network_indexing():
    net = FlowNetwork("sat", [("s", "a", 2.0), ("a", "t", 3.0)], {"a": 1.0})
    assert net.nodes == ("s", "a", "t")
    assert net.n_arcs == 2 and net.edge_count == 2
    assert net.arc_index[("s", "a")] == 0
    assert net.out_arcs["s"] == (0,) and net.in_arcs["t"] == (1,)
    assert net.group_capacity == (2.0, 3.0)
    assert net.node_capacity == {"s": 0.0, "a": 1.0, "t": 0.0}


def test_undirected_network_shares_group_budget():
    net = FlowNetwork("ab", [("a", "b", 5.0)], directed=False)
    assert net.n_arcs == 2
    assert net.edge_count == 1
    fwd, bwd = net.arcs
    assert (fwd.tail, fwd.head) == ("a", "b")
    assert (bwd.tail, bwd.head) == ("b", "a")
    assert fwd.group == bwd.group
    assert net.groups[0] == (0, 1)


@pytest.mark.parametrize("nodes,edges", [
    ("aab", []),                            # duplicate node id
    ("ab", [("a", "z", 1.0)]),              # edge to unknown node
    ("ab", [("a", "b", 1.0), ("a", "b", 2.0)]),  # duplicate arc
])
def test_bad_construction_rejected(nodes, edges):
    with pytest.raises(StructuralError):
        FlowNetwork(nodes, edges)


def test_undirected_duplicate_via_reversal():
    with pytest.raises(StructuralError):
        FlowNetwork("ab", [("a", "b", 1.0), ("b", "a", 1.0)], directed=False)


def test_node_capacity_for_unknown_node_rejected():
    with pytest.raises(StructuralError):
        FlowNetwork("ab", [("a", "b", 1.0)], {"q": 3.0})


def test_with_node_capacity_is_a_fresh_copy():
    net = FlowNetwork("ab", [("a", "b", 4.0)], {"a": 1.0}, directed=False)
    re = net.with_node_capacity({"b": 2.0})
    assert re.node_capacity["b"] == 2.0 and re.node_capacity["a"] == 0.0
    assert net.node_capacity["a"] == 1.0
    assert re.edge_count == 1 and re.n_arcs == 2
    assert re.directed == net.directed


def test_demand_defaults_to_uncapped():
    assert Demand("s", "t").amount == math.inf


def test_validate_instance_reports_each_problem():
    net = FlowNetwork("st", [("s", "t", 1.0)])
    rep = validate_instance(net, [Demand("s", "t")])
    assert rep.ok and bool(rep)
    rep = validate_instance(net, [Demand("s", "s"), Demand("q", "t"),
                                  Demand("s", "t", -2.0)])
    assert not rep.ok
    joined = " ".join(rep.problems)
    assert "degenerate" in joined
    assert "unknown source" in joined
    assert "amount must be positive" in joined


def test_feas_slack_scales_with_capacity():
    assert feas_slack(1.0) == 1e-6
    assert feas_slack(1e9) == 1e3
    assert feas_slack(math.inf) == 1e-9


def _line():
    net = FlowNetwork("sat", [("s", "a", 10.0), ("a", "t", 10.0)], {"a": 3.0})
    return net, [Demand("s", "t", math.inf)]


def test_walk_solution_load_accounting():
    net, demands = _line()
    sol = WalkFlowSolution([
        WalkEntry(0, ("s", "a", "t"), 2.0, {"a": 2.0}),
        WalkEntry(0, ("s", "a", "t"), 1.0, {"a": 1.0}),
    ])
    assert sol.objective == 3.0
    assert sol.delivered(0) == 3.0
    assert sol.edge_loads(net) == {0: 3.0, 1: 3.0}
    assert sol.node_loads() == {"a": 3.0}
    assert verify_walk_solution(net, demands, sol).ok


def test_verify_rejects_quantitative_violations():
    net, demands = _line()

    def report(entry):
        return verify_walk_solution(net, demands, WalkFlowSolution([entry]))

    # processing exceeds the node budget
    rep = report(WalkEntry(0, ("s", "a", "t"), 4.0, {"a": 4.0}))
    assert not rep.ok and any("node a" in p for p in rep.problems)
    # processing does not cover the flow
    rep = report(WalkEntry(0, ("s", "a", "t"), 2.0, {"a": 1.0}))
    assert any("sums to" in p for p in rep.problems)
    # processing at an endpoint is not allowed in the throughput world
    rep = report(WalkEntry(0, ("s", "a", "t"), 1.0, {"s": 1.0}))
    assert any("endpoint" in p for p in rep.problems)
    # wrong route
    rep = report(WalkEntry(0, ("a", "t"), 1.0, {"a": 1.0}))
    assert any("route" in p for p in rep.problems)


def test_verify_rejects_triple_visit():
    net = FlowNetwork(
        "sapt",
        [("s", "a", 9.0), ("a", "p", 9.0), ("p", "a", 9.0), ("a", "t", 9.0)],
        {"p": 9.0})
    walk = ("s", "a", "p", "a", "p", "a", "t")
    rep = verify_walk_solution(
        net, [Demand("s", "t")],
        WalkFlowSolution([WalkEntry(0, walk, 1.0, {"p": 1.0})]))
    assert not rep.ok
    assert any("visited 3" in p for p in rep.problems)


def test_verify_raises_on_structural_nonsense():
    net, demands = _line()
    with pytest.raises(StructuralError):
        verify_walk_solution(net, demands, WalkFlowSolution(
            [WalkEntry(5, ("s", "a", "t"), 1.0, {"a": 1.0})]))
    with pytest.raises(StructuralError):
        verify_walk_solution(net, demands, WalkFlowSolution(
            [WalkEntry(0, ("s", "t"), 1.0, {})]))  # no s->t arc


def test_verify_enforces_demand_cap():
    net = FlowNetwork("sat", [("s", "a", 10.0), ("a", "t", 10.0)], {"a": 9.0})
    sol = WalkFlowSolution([WalkEntry(0, ("s", "a", "t"), 5.0, {"a": 5.0})])
    rep = verify_walk_solution(net, [Demand("s", "t", 4.0)], sol)
    assert any("exceeds requested" in p for p in rep.problems)
