# pylint: disable=missing-module-docstring
# pylint: disable=missing-class-docstring
# pylint: disable=missing-function-docstring

import itertools
import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from loopcutter.exceptions import LCInfeasibleError, LCInvalidArgumentError, LCValidationError
from loopcutter.greenfield import (
    PlanMethod,
    PlanRequest,
    TerminalSet,
    gap_summary,
    heuristic_gap,
    metric_closure_steiner,
    mst_prune,
    plan_greenfield,
    trench_cost,
)
from loopcutter.model import (
    AccessGraph,
    CostParams,
    Edge,
    EdgeCosts,
    Node,
    NodeKind,
    PowerModel,
    Scenario,
)


def random_graph(seed: int, n: int, extra: int, customers: int) -> AccessGraph:
    rng = np.random.default_rng(seed)
    nodes = [Node("n0", NodeKind.OFFICE)]
    order = rng.permutation(np.arange(1, n))
    chosen = {int(k) for k in order[:customers]}
    for k in range(1, n):
        kind = NodeKind.CUSTOMER if k in chosen else NodeKind.CANDIDATE
        nodes.append(Node(f"n{k}", kind))
    pairs = {(int(rng.integers(k)), k) for k in range(1, n)}
    for _ in range(extra):
        a, b = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        pairs.add((a, b))
    edges = []
    for a, b in sorted(pairs):
        length = float(rng.uniform(20.0, 300.0))
        dig = float(rng.uniform(5.0, 50.0)) * length / 100.0
        edges.append(Edge(f"n{a}", f"n{b}", EdgeCosts(length, dig, 0.5 * length, 0.2 * length)))
    return AccessGraph(nodes, edges)


def exact_steiner_cost(g: AccessGraph, terminals: TerminalSet) -> float:
    best = float("inf")
    edges = list(g.edges)
    for size in range(len(edges) + 1):
        for combo in itertools.combinations(edges, size):
            cost = sum(e.costs.dig for e in combo)
            if cost >= best:
                continue
            sub = nx.Graph([(e.u, e.v) for e in combo])
            sub.add_nodes_from(terminals.nodes)
            if set(terminals.nodes) <= nx.node_connected_component(sub, terminals.office):
                best = cost
    return best


class TestTreeBuilders:
    def test_steiner_on_triangle(self, triangle: AccessGraph):
        tree = metric_closure_steiner(triangle)
        assert sorted(e.key for e in tree.edges()) == [("S", "a"), ("a", "u")]
        assert trench_cost(tree) == 20.0
        assert tree.root == "S"

    def test_mst_on_triangle(self, triangle: AccessGraph):
        tree = mst_prune(triangle)
        assert sorted(e.key for e in tree.edges()) == [("S", "a"), ("a", "u")]

    def test_custom_weight(self, triangle: AccessGraph):
        tree = metric_closure_steiner(triangle, weight=lambda c: c.length_m**0.5)
        assert [e.key for e in tree.edges()] == [("S", "u")]

    def test_prunes_branches_without_terminals(self):
        g = AccessGraph(
            [
                Node("S", NodeKind.OFFICE),
                Node("j", NodeKind.CANDIDATE),
                Node("u", NodeKind.CUSTOMER),
            ],
            [Edge("S", "u", EdgeCosts(10.0, 1.0)), Edge("S", "j", EdgeCosts(1.0, 0.1))],
        )
        for builder in (metric_closure_steiner, mst_prune):
            assert set(builder(g).nodes) == {"S", "u"}

    def test_unreachable_customer(self):
        g = AccessGraph(
            [Node("S", NodeKind.OFFICE), Node("u", NodeKind.CUSTOMER)], []
        )
        with pytest.raises(LCInfeasibleError) as info:
            metric_closure_steiner(g)
        assert info.value.customers == ("u",)
        with pytest.raises(LCInfeasibleError):
            mst_prune(g)

    def test_unknown_terminal(self, triangle: AccessGraph):
        with pytest.raises(LCInvalidArgumentError):
            metric_closure_steiner(triangle, TerminalSet("S", ("ghost",)))

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(3, 8),
        extra=st.integers(0, 5),
        customers=st.integers(1, 3),
    )
    def test_steiner_within_twice_optimal(self, seed, n, extra, customers):
        g = random_graph(seed, n, extra, min(customers, n - 1))
        terminals = TerminalSet.from_graph(g)
        tree = metric_closure_steiner(g, terminals)
        assert set(terminals.nodes) <= set(tree.nodes)
        optimum = exact_steiner_cost(g, terminals)
        assert trench_cost(tree) <= 2 * optimum + 1e-9
        assert trench_cost(tree) >= optimum - 1e-9


class TestPlanGreenfield:
    def test_triangle_additive(self, triangle: AccessGraph, pm):
        s = plan_greenfield(PlanRequest(triangle, params=CostParams().for_ilp(), pm=pm))
        assert s.total == pytest.approx(2035.02628)
        assert s.scenario is Scenario.GREENFIELD
        assert dict(s.placements) == {"a": 1}
        assert s.trench_edges == (("S", "a"), ("a", "u"))
        # Both trees are equal here; the Steiner design is kept.
        assert s.method == "steiner"

    def test_triangle_desk_power(self, triangle: AccessGraph):
        s = plan_greenfield(PlanRequest(triangle, "best-of-both"))
        assert s.total == pytest.approx(2035.55188)
        assert s.breakdown.dig == 20.0
        assert s.breakdown.copper_install == 10.0

    def test_both_is_the_cheaper_method(self, pm):
        g = random_graph(42, 9, 6, 3)
        p = CostParams(rem_cost=200.0)
        steiner = plan_greenfield(PlanRequest(g, PlanMethod.STEINER, pm, p))
        mst = plan_greenfield(PlanRequest(g, PlanMethod.MST, pm, p))
        both = plan_greenfield(PlanRequest(g, PlanMethod.BOTH, pm, p))
        assert both.total == pytest.approx(min(steiner.total, mst.total))
        assert both.method in ("steiner", "mst")

    def test_budgeted_plan(self, triangle: AccessGraph, pm):
        s = plan_greenfield(PlanRequest(triangle, pm=pm, max_units=0))
        assert s.remote_units("S") == 0
        assert dict(s.placements) == {"S": 1}

    def test_invalid_graph(self):
        g = AccessGraph([Node("u", NodeKind.CUSTOMER)], [])
        with pytest.raises(LCValidationError):
            plan_greenfield(PlanRequest(g))

    def test_customer_out_of_reach(self):
        g = AccessGraph(
            [Node("S", NodeKind.OFFICE), Node("u", NodeKind.CUSTOMER)],
            [Edge("S", "u", EdgeCosts(2000.0, 10.0))],
        )
        with pytest.raises(LCInfeasibleError):
            plan_greenfield(PlanRequest(g, pm=PowerModel.desk()))

    def test_bad_request(self, triangle: AccessGraph):
        with pytest.raises(ValueError):
            PlanRequest(triangle, "cheapest")  # type: ignore
        with pytest.raises(LCInvalidArgumentError):
            PlanRequest(triangle, steiner_weight="length")  # type: ignore


def test_heuristic_gap():
    assert heuristic_gap(1015.0, 1000.0) == pytest.approx(0.015)


def test_gap_summary():
    summary = gap_summary([0.0, 0.0, 0.01, 0.02, 0.1])
    assert summary["count"] == 5
    assert summary["median"] == pytest.approx(0.01)
    assert summary["max"] == pytest.approx(0.1)
    assert summary["within_published"] == pytest.approx(0.6)
    with pytest.raises(LCInvalidArgumentError):
        gap_summary([])
