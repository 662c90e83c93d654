import math

import pytest

from pflow.model import Demand, FlowNetwork

# Reference instances used across modules. Expected values sitting next to
# them in tests were produced by the enumeration oracles in oracles.py.


@pytest.fixture
def inst_line():
    net = FlowNetwork("sat", [("s", "a", 10.0), ("a", "t", 10.0)], {"a": 3.0})
    return net, [Demand("s", "t", math.inf)]


@pytest.fixture
def inst_loop():
    net = FlowNetwork(
        "sapt",
        [("s", "a", 2.0), ("a", "p", 2.0), ("p", "a", 2.0), ("a", "t", 2.0)],
        {"p": 5.0},
    )
    return net, [Demand("s", "t", math.inf)]


@pytest.fixture
def naive_gap():
    net = FlowNetwork(
        "sutw",
        [("s", "u", 2.0), ("u", "t", 2.0), ("u", "w", 2.0), ("w", "u", 2.0)],
        {"w": 2.0},
    )
    return net, [Demand("s", "t", math.inf)]


@pytest.fixture
def pur1():
    net = FlowNetwork("sat", [("s", "a", 10.0), ("a", "t", 10.0)])
    return net, [Demand("s", "t", 4.0)], {"a": 10.0}, {"a": 5.0}


@pytest.fixture
def bud1():
    net = FlowNetwork(
        "sabt",
        [("s", "a", 4.0), ("a", "t", 4.0), ("s", "b", 2.0), ("b", "t", 2.0)],
        directed=False,
    )
    potential = {"a": 3.0, "b": 2.0}
    cost = {"a": 1.0, "b": 1.0}
    return net, [Demand("s", "t", 10.0)], potential, cost, 1.0
