"""A package for planning DSL access networks with remote units"""
from loopcutter.exceptions import (
    LCError,
    LCInvalidArgumentError,
    LCNotATreeError,
    LCValidationError,
    LCInfeasibleError,
    LCInvalidStateError,
    LCLimitError,
)
from loopcutter.model import (
    NodeKind,
    FiberMode,
    Scenario,
    Node,
    EdgeCosts,
    Edge,
    PowerModel,
    CostParams,
    CostBreakdown,
    AccessGraph,
    AccessTree,
    Assignment,
    DesignSolution,
    ValidationReport,
    power_of_loop,
    check_convexity,
    validate_graph,
    shortest_paths,
)
from loopcutter.dataset import Dataset, load_dataset, save_dataset, save_solution
from loopcutter.redesign import (
    DpOptions,
    redesign_tree,
    redesign_tree_budgeted,
    units_for_budget,
    all_copper_solution,
    oracle_redesign,
)
from loopcutter.greenfield import (
    PlanRequest,
    plan_greenfield,
    metric_closure_steiner,
    mst_prune,
)
from loopcutter.ilp import build_ilp, export_lp, export_mps, evaluate_solution, exact_solve_small
from loopcutter.metrics import coverage, power_per_customer, cost_breakdown, compare


__all__ = [
    "LCError",
    "LCInvalidArgumentError",
    "LCNotATreeError",
    "LCValidationError",
    "LCInfeasibleError",
    "LCInvalidStateError",
    "LCLimitError",
    "NodeKind",
    "FiberMode",
    "Scenario",
    "Node",
    "EdgeCosts",
    "Edge",
    "PowerModel",
    "CostParams",
    "CostBreakdown",
    "AccessGraph",
    "AccessTree",
    "Assignment",
    "DesignSolution",
    "ValidationReport",
    "power_of_loop",
    "check_convexity",
    "validate_graph",
    "shortest_paths",
    "Dataset",
    "load_dataset",
    "save_dataset",
    "save_solution",
    "DpOptions",
    "redesign_tree",
    "redesign_tree_budgeted",
    "units_for_budget",
    "all_copper_solution",
    "oracle_redesign",
    "PlanRequest",
    "plan_greenfield",
    "metric_closure_steiner",
    "mst_prune",
    "build_ilp",
    "export_lp",
    "export_mps",
    "evaluate_solution",
    "exact_solve_small",
    "coverage",
    "power_per_customer",
    "cost_breakdown",
    "compare",
]
