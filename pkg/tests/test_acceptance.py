# pylint: disable=missing-module-docstring
# pylint: disable=missing-class-docstring
# pylint: disable=missing-function-docstring

import statistics
import time
import pytest
from loopcutter.datagen import (
    DATASET_PRESETS,
    CitySpec,
    balanced_tree,
    build_copper_tree,
    generate_city,
    scale_edges,
)
from loopcutter.greenfield import PlanRequest, gap_summary, heuristic_gap, plan_greenfield
from loopcutter.ilp import exact_solve_small
from loopcutter.metrics import check_solution, coverage, power_per_customer
from loopcutter.model import CostParams, PowerModel
from loopcutter.redesign import (
    all_copper_solution,
    redesign_tree,
    redesign_tree_budgeted,
)


class TestStretchedCity:
    @pytest.fixture(scope="class")
    def stretched(self):
        tree = build_copper_tree(generate_city(DATASET_PRESETS["B1.0"]))
        return scale_edges(tree, 2.0)

    def test_remote_units_restore_full_service(self, stretched):
        pm, p = PowerModel.desk(), CostParams()
        assert coverage(stretched, pm).fraction < 1.0
        s = redesign_tree(stretched, pm, p)
        assert not s.unserved
        assert len(s.assignments) == len(stretched.customers)
        assert check_solution(s, stretched, pm, p).ok
        assert s.remote_units(stretched.root) > 0

    def test_power_per_customer_drops(self, stretched):
        pm, p = PowerModel.desk(), CostParams()
        baseline = all_copper_solution(stretched, pm, p)
        assert baseline.unserved
        s = redesign_tree_budgeted(stretched, pm, p, 10, objective="power")
        assert power_per_customer(s, pm) < power_per_customer(baseline, pm)


def test_heuristic_bounds_the_exact_optimum(record_property):
    pm, p = PowerModel.desk(), CostParams().for_ilp()
    gaps = []
    for seed in range(50):
        g = generate_city(CitySpec(0.3, 6, 2 + seed % 2, seed=seed))
        exact = exact_solve_small(g, pm, p)
        planned = plan_greenfield(PlanRequest(g, "best-of-both", pm, p))
        assert planned.total >= exact.total - 1e-9
        gaps.append(heuristic_gap(planned.total, exact.total))
    summary = gap_summary(gaps)
    for key, value in summary.items():
        record_property(f"gap_{key}", value)
    print("heuristic gap: " + ", ".join(f"{k} {v:.4f}" for k, v in summary.items()))
    assert summary["count"] == 50
    assert summary["median"] <= 0.05


def _median_seconds(customers: int, runs: int = 3) -> float:
    tree = balanced_tree(customers, 3, seed=customers, edge_m=(30.0, 120.0))
    pm, p = PowerModel.desk(), CostParams(rem_cost=500.0)
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        redesign_tree(tree, pm, p)
        times.append(time.perf_counter() - start)
    return statistics.median(times)


@pytest.mark.slow
def test_large_tree_finishes():
    assert _median_seconds(900, runs=1) < 120.0


@pytest.mark.slow
def test_growth_is_at_most_cubic():
    seconds = [_median_seconds(n) for n in (100, 200, 400)]
    for small, large in zip(seconds, seconds[1:]):
        assert large / small <= 12.0
