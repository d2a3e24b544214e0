# pylint: disable=missing-module-docstring
# pylint: disable=missing-class-docstring
# pylint: disable=missing-function-docstring

import math
import pulp
import pytest
from hypothesis import given, settings, strategies as st
from loopcutter.datagen import CitySpec, generate_city, random_tree
from loopcutter.exceptions import (
    LCInfeasibleError,
    LCInvalidArgumentError,
    LCLimitError,
    LCValidationError,
)
from loopcutter.greenfield import PlanRequest, plan_greenfield
from loopcutter.ilp import (
    SmallLimits,
    build_ilp,
    evaluate_solution,
    exact_solve_small,
    export_lp,
    export_mps,
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
from loopcutter.redesign import DpOptions, redesign_tree


def _cbc_available() -> bool:
    try:
        return pulp.PULP_CBC_CMD(msg=False).available()
    except pulp.PulpError:
        return False


class TestBuildIlp:
    def test_triangle_sizes(self, triangle: AccessGraph, pm, params):
        m = build_ilp(triangle, pm, params)
        assert m.variable_counts() == {"copper": 6, "fiber": 6, "trench": 3, "units": 1}
        assert m.family_counts() == {
            "flowC": 0,
            "flowF": 1,
            "fiberbal": 1,
            "cap": 1,
            "office": 4,
            "demand": 1,
            "noout": 1,
            "transit": 0,
            "trench": 3,
            "looplen": 1,
        }
        assert not m.trivially_infeasible

    def test_names_and_costs(self, triangle: AccessGraph, pm, params):
        m = build_ilp(triangle, pm, params)
        assert "c_a_u_u" in m.variables
        assert m.variables["T_S_a"].binary
        assert not m.variables["n_S_a"].binary
        # 10 m of loop at the average slope, plus its copper installation
        assert m.objective["c_a_u_u"] == pytest.approx(10.02628)
        assert m.objective["d_a"] == 2000.0
        assert m.objective["T_S_u"] == 30.0
        assert m.row("looplen_u").rhs == 1500.0
        assert m.row("looplen_u").coeffs["c_S_u_u"] == 30.0
        assert m.row("officeCout").sense == "=="

    def test_office_units(self, triangle: AccessGraph, pm, params):
        m = build_ilp(triangle, pm, params, office_units=True)
        assert "d_S" in m.variables
        assert "cap_S" in {row.name for row in m.rows}
        with pytest.raises(LCInvalidArgumentError):
            m.row("officeCout")

    def test_transit_rows_for_every_customer_pair(self, pm, params):
        g = AccessGraph(
            [
                Node("S", NodeKind.OFFICE),
                Node("a", NodeKind.CANDIDATE),
                Node("u1", NodeKind.CUSTOMER),
                Node("u2", NodeKind.CUSTOMER),
                Node("j", NodeKind.JUNCTION),
            ],
            [
                Edge("S", "a", EdgeCosts(100.0)),
                Edge("a", "j", EdgeCosts(100.0)),
                Edge("j", "u1", EdgeCosts(100.0)),
                Edge("u1", "u2", EdgeCosts(100.0)),
            ],
        )
        counts = build_ilp(g, pm, params).family_counts()
        assert counts["transit"] == 2
        assert counts["flowC"] == 2
        assert counts["trench"] == 4 * 2

    @pytest.mark.parametrize("seed", range(50))
    def test_counts_follow_the_layout(self, seed, pm, params):
        spec = CitySpec(
            0.4,
            5 + seed % 6,
            1 + seed % 4,
            candidate_fraction=(1.0, 0.5, 0.0)[seed % 3],
            seed=seed,
        )
        g = generate_city(spec)
        office_units = seed % 2 == 1
        m = build_ilp(g, pm, params, office_units)
        e, k = len(g.edges), len(g.customers)
        c, j = len(g.candidates), len(g.ids_of_kind(NodeKind.JUNCTION))
        units = c + (1 if office_units else 0)
        assert m.variable_counts() == {
            family: count
            for family, count in (
                ("copper", 2 * e * k),
                ("fiber", 2 * e),
                ("trench", e),
                ("units", units),
            )
            if count
        }
        assert m.family_counts() == {
            "flowC": j * k,
            "flowF": j + k,
            "fiberbal": c,
            "cap": c,
            "office": 4,
            "demand": k,
            "noout": k,
            "transit": k * (k - 1),
            "trench": e * k,
            "looplen": k,
        }
        assert len(m.variables) == 2 * e * k + 2 * e + e + units

    def test_no_hosts_is_trivially_infeasible(self, pm, params):
        g = AccessGraph(
            [Node("S", NodeKind.OFFICE), Node("u", NodeKind.CUSTOMER)],
            [Edge("S", "u", EdgeCosts(100.0))],
        )
        assert build_ilp(g, pm, params).trivially_infeasible
        assert not build_ilp(g, pm, params, office_units=True).trivially_infeasible

    def test_colliding_ids(self, pm, params):
        g = AccessGraph(
            [
                Node("S", NodeKind.OFFICE),
                Node("a-b", NodeKind.CANDIDATE),
                Node("a_b", NodeKind.CUSTOMER),
            ],
            [Edge("S", "a-b", EdgeCosts(10.0)), Edge("a-b", "a_b", EdgeCosts(10.0))],
        )
        with pytest.raises(LCInvalidArgumentError):
            build_ilp(g, pm, params)

    def test_invalid_graph(self, pm, params):
        g = AccessGraph([Node("u", NodeKind.CUSTOMER)], [])
        with pytest.raises(LCValidationError):
            build_ilp(g, pm, params)


class TestExport:
    def test_lp_text_is_deterministic(self, triangle: AccessGraph, pm, params):
        first = export_lp(build_ilp(triangle, pm, params))
        second = export_lp(build_ilp(triangle, pm, params))
        assert first == second
        assert "Minimize" in first
        assert "demand_u:" in first
        assert "c_a_u_u" in first

    def test_lp_matches_golden_file(self, triangle: AccessGraph, pm, params, golden):
        golden("triangle.lp", export_lp(build_ilp(triangle, pm, params)))

    def test_mps_sections(self, triangle: AccessGraph, pm, params):
        text = export_mps(build_ilp(triangle, pm, params))
        for section in ("ROWS", "COLUMNS", "RHS", "ENDATA"):
            assert section in text
        assert "looplen_u" in text

    @pytest.mark.skipif(not _cbc_available(), reason="CBC is not installed")
    def test_solver_optimum_matches_enumeration(self, triangle: AccessGraph, pm, params):
        problem = build_ilp(triangle, pm, params, office_units=True).to_pulp()
        problem.solve(pulp.PULP_CBC_CMD(msg=False))
        assert pulp.LpStatus[problem.status] == "Optimal"
        assert pulp.value(problem.objective) == pytest.approx(2035.02628)


class TestEvaluateSolution:
    def test_objective_equals_breakdown(self, triangle: AccessGraph, pm, params):
        s = exact_solve_small(triangle, pm, params)
        solution, breakdown = evaluate_solution(triangle, pm, params, s)
        assert solution.feasible
        assert solution.values["d_a"] == 1.0
        assert solution.values["n_S_a"] == 1.0
        assert solution.values["T_S_u"] == 0.0
        assert solution.objective == pytest.approx(breakdown.total)
        assert breakdown.total == pytest.approx(2035.02628)

    def test_greenfield_plan_is_a_feasible_point(self, triangle: AccessGraph, pm, params):
        s = plan_greenfield(PlanRequest(triangle, pm=pm, params=params.for_ilp()))
        solution, breakdown = evaluate_solution(triangle, pm, params, s)
        assert solution.feasible
        assert solution.objective == pytest.approx(s.total)
        assert breakdown.total == pytest.approx(s.total)

    def test_overloaded_unit_is_reported(self, triangle: AccessGraph, pm):
        p = CostParams(capacity=1)
        s = exact_solve_small(triangle, pm, p)
        overloaded = s.replace(placements={"a": 0})
        solution, _ = evaluate_solution(triangle, pm, p, overloaded)
        assert not solution.feasible
        assert "cap" in {v.code for v in solution.violations}

    def test_design_from_another_layout(self, triangle: AccessGraph, chain, pm, params):
        with pytest.raises(LCInvalidArgumentError):
            evaluate_solution(triangle, pm, params, redesign_tree(chain, pm, params))


class TestExactSolveSmall:
    def test_triangle(self, triangle: AccessGraph, pm, params):
        s = exact_solve_small(triangle, pm, params)
        assert s.total == pytest.approx(2035.02628)
        assert dict(s.placements) == {"a": 1}
        assert s.trench_edges == (("S", "a"), ("a", "u"))
        assert s.scenario is Scenario.GREENFIELD
        assert s.method == "exact"

    def test_limits(self, triangle: AccessGraph, pm, params):
        with pytest.raises(LCLimitError):
            exact_solve_small(triangle, pm, params, SmallLimits(max_edges=2))
        with pytest.raises(LCLimitError):
            exact_solve_small(
                triangle, pm, CostParams(capacity=1), SmallLimits(max_units_per_node=0)
            )

    def test_out_of_reach(self, pm, params):
        g = AccessGraph(
            [Node("S", NodeKind.OFFICE), Node("u", NodeKind.CUSTOMER)],
            [Edge("S", "u", EdgeCosts(1600.0, 1.0))],
        )
        with pytest.raises(LCInfeasibleError):
            exact_solve_small(g, pm, params)

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        customers=st.integers(1, 4),
        internal=st.integers(1, 3),
        rem_cost=st.sampled_from([0.0, 50.0, 2000.0]),
        capacity=st.integers(2, 3),
    )
    def test_tree_optimum_matches_dp(self, seed, customers, internal, rem_cost, capacity):
        tree = random_tree(
            customers,
            seed=seed,
            max_depth=3,
            internal=internal,
            candidate_fraction=1.0,
            edge_m=(50.0, 500.0),
            copper_per_m=0.5,
        )
        pm = PowerModel.desk()
        p = CostParams(rem_cost=rem_cost, capacity=capacity)
        options = DpOptions(scenario=Scenario.GREENFIELD)
        try:
            expected = redesign_tree(tree, pm, p.for_ilp(), options).total
        except LCInfeasibleError:
            expected = math.inf
        try:
            found = exact_solve_small(tree.to_graph(), pm, p).total
        except LCInfeasibleError:
            found = math.inf
        if math.isinf(expected):
            assert math.isinf(found)
        else:
            assert found == pytest.approx(expected, rel=1e-9)
