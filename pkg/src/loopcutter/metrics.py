"""Coverage, power and cost reporting"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

import networkx as nx
import pandas as pd

from loopcutter.exceptions import LCInvalidArgumentError
from loopcutter.model import (
    AccessGraph,
    AccessTree,
    CostBreakdown,
    CostParams,
    DesignSolution,
    FiberMode,
    Layout,
    PowerModel,
    Scenario,
    ValidationReport,
    Violation,
    effective_power_model,
    energy_to_money,
    exceeds_reach,
    power_of_loop,
    shortest_paths,
)

logger = logging.getLogger(__name__)


class CoverageMode(Enum):
    TREE_PATH = "tree-path"
    GRAPH_SHORTEST_PATH = "graph-shortest-path"


@dataclass(frozen=True, slots=True)
class CoverageReport:
    """How many customers an all-copper layout reaches from the office

    `fraction` is None when the layout has no customers.
    """

    reachable: int
    total: int
    fraction: float | None
    distances: Mapping[str, float]


@dataclass(frozen=True, slots=True)
class DeltaReport:
    """Component-wise comparison of two designs of the same layout

    Savings are `baseline - candidate`; `units_added` is
    `candidate - baseline`.
    """

    baseline: CostBreakdown
    candidate: CostBreakdown
    cost_saving: float
    power_saving_per_customer_w: float
    watts_saving: float
    units_added: int


def coverage(
    layout: AccessTree | AccessGraph,
    pm: PowerModel,
    mode: CoverageMode | str | None = None,
) -> CoverageReport:
    """Fraction of customers within copper reach of the office

    Args:
        layout: A tree or a street graph
        pm: Its `max_loop_m` is the reach
        mode: `tree-path` measures along the tree, `graph-shortest-path` along
            shortest street paths. Defaults to the natural mode of `layout`.

    Returns:
        The coverage report
    """
    if mode is None:
        mode = (
            CoverageMode.TREE_PATH
            if isinstance(layout, AccessTree)
            else CoverageMode.GRAPH_SHORTEST_PATH
        )
    mode = CoverageMode(mode)

    if mode is CoverageMode.TREE_PATH:
        tree = layout if isinstance(layout, AccessTree) else AccessTree.from_graph(layout)
        distances = {c: tree.depth(c) for c in tree.customers}
    else:
        graph = layout.to_graph() if isinstance(layout, AccessTree) else layout
        paths = shortest_paths(graph, graph.office, "length")
        distances = {c: paths[c].distance for c in graph.customers}

    total = len(distances)
    reachable = sum(1 for d in distances.values() if not exceeds_reach(pm, d))
    fraction = reachable / total if total else None
    return CoverageReport(reachable, total, fraction, distances)


def power_per_customer(s: DesignSolution, pm: PowerModel) -> float:
    """Average line driver watts over the served customers

    Returns:
        0.0 when nobody is served
    """
    if not s.assignments:
        return 0.0
    return sum(power_of_loop(pm, a.loop_m) for a in s.assignments) / len(s.assignments)


def _path_length(layout: Layout, path: tuple[str, ...]) -> float:
    # Summed from the customer end, matching the order loops grow in the DP.
    length = 0.0
    for a, b in zip(reversed(path[:-1]), reversed(path[1:])):
        length += layout.edge_costs(a, b).length_m
    return length


def _check_refs(s: DesignSolution, layout: Layout) -> None:
    for node in s.placements:
        if not layout.has_node(node):
            raise LCInvalidArgumentError(f"placement at unknown node {node!r}")
    for a in s.assignments:
        for node in (a.customer, a.served_by, *a.path):
            if not layout.has_node(node):
                raise LCInvalidArgumentError(f"assignment refers to unknown {node!r}")
        if not a.path or a.path[0] != a.served_by or a.path[-1] != a.customer:
            raise LCInvalidArgumentError(f"path of {a.customer!r} has wrong ends")


def cost_breakdown(
    s: DesignSolution, layout: Layout, pm: PowerModel, p: CostParams
) -> CostBreakdown:
    """Recomputes every cost component of a design from the layout

    Loop lengths are re-measured along the assignment paths. Power follows
    `effective_power_model`, copper installation and digging are only charged
    in the greenfield scenario.

    Raises:
        LCInvalidArgumentError: The solution refers to nodes or edges that are
            not in `layout`
    """
    _check_refs(s, layout)
    epm = effective_power_model(pm, p)

    watts = 0.0
    copper = 0.0
    for a in s.assignments:
        watts += power_of_loop(epm, _path_length(layout, a.path))
        if s.scenario is Scenario.GREENFIELD:
            copper += sum(layout.edge_costs(u, v).copper_install for u, v in a.path_edges())

    fiber = 0.0
    for (u, v), strands in s.fiber_edges.items():
        if strands <= 0:
            continue
        cost = layout.edge_costs(u, v).fiber_install
        fiber += cost * strands if p.fiber_mode is FiberMode.PER_STRAND else cost

    dig = 0.0
    if s.scenario is Scenario.GREENFIELD:
        dig = sum(layout.edge_costs(u, v).dig for u, v in s.trench_edges)

    units = sum(s.placements.values())
    return CostBreakdown(
        dig=dig,
        fiber=fiber,
        copper_install=copper,
        remote_units=units * p.rem_cost,
        power=energy_to_money(watts, p),
        watts_total=watts,
        units_used=units,
    )


def check_solution(
    s: DesignSolution, layout: Layout, pm: PowerModel, p: CostParams
) -> ValidationReport:
    """Lists every design invariant the solution breaks

    Checked: each customer is served exactly once or listed unserved, loops fit
    the reach, units are not overloaded, and every unit-bearing node is joined
    to the office by fiber.
    """
    violations: list[Violation] = []
    served: dict[str, int] = {}
    load: dict[str, int] = {}
    for a in s.assignments:
        served[a.customer] = served.get(a.customer, 0) + 1
        load[a.served_by] = load.get(a.served_by, 0) + 1
        if exceeds_reach(pm, _path_length(layout, a.path)):
            violations.append(Violation("loop-too-long", a.customer, "loop exceeds reach"))
    for customer in layout.customers:
        count = served.get(customer, 0) + (1 if customer in s.unserved else 0)
        if count != 1:
            violations.append(
                Violation("service", customer, f"served {count} times")
            )
    for node, customers in load.items():
        if customers > s.placements.get(node, 0) * p.capacity:
            violations.append(Violation("capacity", node, f"{customers} loops"))

    fiber = nx.Graph()
    fiber.add_node(layout.office)
    fiber.add_edges_from(key for key, strands in s.fiber_edges.items() if strands > 0)
    lit = nx.node_connected_component(fiber, layout.office)
    for node, units in s.placements.items():
        if units > 0 and node not in lit:
            violations.append(Violation("fiber", node, "unit not fed by fiber"))
    return ValidationReport(tuple(violations))


def _served_customers(s: DesignSolution) -> set[str]:
    return {a.customer for a in s.assignments} | set(s.unserved)


def compare(baseline: DesignSolution, candidate: DesignSolution) -> DeltaReport:
    """Component-wise deltas between two designs of one layout

    Raises:
        LCInvalidArgumentError: The designs cover different customer sets
    """
    if _served_customers(baseline) != _served_customers(candidate):
        raise LCInvalidArgumentError("designs are for different layouts")

    def per_customer(s: DesignSolution) -> float:
        return s.breakdown.watts_total / len(s.assignments) if s.assignments else 0.0

    b, c = baseline.breakdown, candidate.breakdown
    return DeltaReport(
        baseline=b,
        candidate=c,
        cost_saving=b.total - c.total,
        power_saving_per_customer_w=per_customer(baseline) - per_customer(candidate),
        watts_saving=b.watts_total - c.watts_total,
        units_added=c.units_used - b.units_used,
    )


REPORT_COLUMNS = (
    "dataset",
    "scenario",
    "parameter",
    "value",
    "total",
    "dig",
    "fiber",
    "copper_install",
    "remote_units",
    "power",
    "watts_total",
    "units_used",
    "customers",
    "served",
    "power_per_customer_w",
    "coverage",
)


def solution_row(
    dataset: str,
    parameter: str,
    value: Any,
    s: DesignSolution,
    pm: PowerModel,
    coverage_fraction: float | None = None,
) -> dict[str, Any]:
    """One report row keyed by (dataset, scenario, parameter)"""
    row: dict[str, Any] = {
        "dataset": dataset,
        "scenario": s.scenario.value,
        "parameter": parameter,
        "value": value,
        "customers": len(s.assignments) + len(s.unserved),
        "served": len(s.assignments),
        "power_per_customer_w": power_per_customer(s, pm),
        "coverage": coverage_fraction,
    }
    row.update(s.breakdown.to_dict())
    return row


def reports_frame(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """Collects report rows into a frame with the fixed column order"""
    frame = pd.DataFrame(list(rows), columns=list(REPORT_COLUMNS))
    return frame.sort_values(["dataset", "scenario", "parameter"], kind="stable")


def write_report_csv(frame: pd.DataFrame, path: str | Path) -> None:
    frame.to_csv(path, index=False, float_format="%.6f")


def format_report_table(frame: pd.DataFrame) -> str:
    """Human-readable table with money rounded to the cent"""
    shown = frame.copy()
    for column in ("total", "dig", "fiber", "copper_install", "remote_units", "power"):
        shown[column] = shown[column].map(
            lambda x: "inf" if not math.isfinite(x) else f"{x:,.2f}"
        )
    return shown.to_string(index=False)
