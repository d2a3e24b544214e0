"""Green-field planning: pick a cheap trench tree, then place units on it

The tree is either a metric-closure Steiner tree over the office and the
customers or a pruned minimum spanning tree of the whole street graph. Unit
placement then runs the tree dynamic program in the greenfield scenario, where
every tree edge is dug once and copper is paid per loop and edge.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Literal

import networkx as nx
import pandas as pd

from loopcutter.exceptions import LCInfeasibleError, LCInvalidArgumentError
from loopcutter.model import (
    AccessGraph,
    AccessTree,
    CostParams,
    DesignSolution,
    Edge,
    PowerModel,
    Scenario,
    WeightSpec,
    validate_graph,
    weight_function,
)
from loopcutter.redesign import DpOptions, redesign_tree, redesign_tree_budgeted
from loopcutter.util import edge_key, relative_gap

logger = logging.getLogger(__name__)


class PlanMethod(Enum):
    STEINER = "steiner"
    MST = "mst"
    BOTH = "both"


@dataclass(frozen=True, slots=True)
class TerminalSet:
    """The nodes a trench tree must connect: the office and every customer"""

    office: str
    customers: tuple[str, ...]

    @classmethod
    def from_graph(cls, g: AccessGraph) -> TerminalSet:
        return cls(g.office, g.customers)

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.office, *self.customers)

    def check(self, g: AccessGraph) -> None:
        """Raises:
        LCInvalidArgumentError: A terminal is not a node of `g`
        """
        for node in self.nodes:
            if not g.has_node(node):
                raise LCInvalidArgumentError(f"terminal {node!r} is not in the graph")


@dataclass(frozen=True, slots=True)
class PlanRequest:
    """Everything `plan_greenfield` needs

    Attributes:
        graph: The street graph
        method: Tree builder, or `both` to keep the cheaper final design
        pm: The power model
        params: Cost parameters; `ilp_additive_power` selects additive power
        steiner_weight: `dig` or `dig+fiber`
        options: DP options; the scenario is forced to greenfield
        max_units: Optional unit budget
        objective: Objective of a budgeted run, see `redesign_tree_budgeted`
    """

    graph: AccessGraph
    method: PlanMethod = PlanMethod.BOTH
    pm: PowerModel = dataclasses.field(default_factory=PowerModel.desk)
    params: CostParams = dataclasses.field(default_factory=CostParams)
    steiner_weight: Literal["dig", "dig+fiber"] = "dig"
    options: DpOptions = DpOptions()
    max_units: int | None = None
    objective: Literal["total", "power"] = "total"

    def __post_init__(self) -> None:
        if isinstance(self.method, str):
            name = "both" if self.method == "best-of-both" else self.method
            object.__setattr__(self, "method", PlanMethod(name))
        if self.steiner_weight not in ("dig", "dig+fiber"):
            raise LCInvalidArgumentError(f"unknown weight {self.steiner_weight!r}")


def _kruskal(
    nodes: Iterable[str], edges: Iterable[tuple[float, str, str]]
) -> list[tuple[str, str]]:
    # Ties are broken by endpoint ids so the tree never depends on input order.
    forest = nx.utils.UnionFind(nodes)
    chosen = []
    for _, u, v in sorted((w, *edge_key(u, v)) for w, u, v in edges):
        if forest[u] != forest[v]:
            forest.union(u, v)
            chosen.append((u, v))
    return chosen


def _prune_leaves(
    edges: Iterable[tuple[str, str]], terminals: Iterable[str]
) -> list[tuple[str, str]]:
    tree = nx.Graph(list(edges))
    keep = set(terminals)
    leaves = [n for n in tree if tree.degree(n) == 1 and n not in keep]
    while leaves:
        leaf = leaves.pop()
        neighbors = list(tree.neighbors(leaf))
        tree.remove_node(leaf)
        for n in neighbors:
            if tree.degree(n) == 1 and n not in keep:
                leaves.append(n)
    return sorted(edge_key(u, v) for u, v in tree.edges)


def _to_tree(g: AccessGraph, office: str, edges: list[tuple[str, str]]) -> AccessTree:
    used = {office} | {n for e in edges for n in e}
    return AccessTree(
        (n for n in g.nodes.values() if n.id in used),
        (Edge(u, v, g.edge_costs(u, v)) for u, v in edges),
    )


def _edge_weight(weight: WeightSpec) -> Callable[[str, str, dict], float]:
    func = weight_function(weight)
    return lambda u, v, data: func(data["costs"])


def _check_weights(g: AccessGraph, weight: WeightSpec) -> None:
    func = weight_function(weight)
    for edge in g.edges:
        if func(edge.costs) < 0:
            raise LCInvalidArgumentError(f"negative weight on {edge.u}-{edge.v}")


def trench_cost(tree: AccessTree) -> float:
    """Total dig cost of the tree edges"""
    return sum(e.costs.dig for e in tree.edges())


def metric_closure_steiner(
    g: AccessGraph, terminals: TerminalSet | None = None, weight: WeightSpec = "dig"
) -> AccessTree:
    """Steiner tree over the terminals, within twice the optimal weight

    Builds the complete graph of terminals weighted by shortest-path distance,
    takes its minimum spanning tree, expands each closure edge into its path,
    spans that union again and prunes leaves that are not terminals.

    Args:
        g: The street graph
        terminals: Defaults to the office plus every customer of `g`
        weight: Edge weight: `dig`, `dig+fiber` or a function of `EdgeCosts`

    Raises:
        LCInfeasibleError: Some terminals are not connected to the office
    """
    terms = terminals or TerminalSet.from_graph(g)
    terms.check(g)
    _check_weights(g, weight)
    edge_weight = _edge_weight(weight)

    distances: dict[str, dict[str, float]] = {}
    paths: dict[str, dict[str, list[str]]] = {}
    for t in terms.nodes:
        distances[t], paths[t] = nx.single_source_dijkstra(g.graph, t, weight=edge_weight)
    unreachable = tuple(c for c in terms.customers if c not in distances[terms.office])
    if unreachable:
        raise LCInfeasibleError(unreachable, "terminals not connected to the office")

    nodes = list(dict.fromkeys(terms.nodes))
    closure = [
        (distances[a][b], a, b) for i, a in enumerate(nodes) for b in nodes[i + 1 :]
    ]
    union: set[tuple[str, str]] = set()
    for a, b in _kruskal(nodes, closure):
        path = paths[a][b]
        union.update(edge_key(u, v) for u, v in zip(path, path[1:]))

    func = weight_function(weight)
    spanning = _kruskal(
        {n for e in union for n in e},
        ((func(g.edge_costs(u, v)), u, v) for u, v in union),
    )
    edges = _prune_leaves(spanning, terms.nodes)
    logger.debug(
        "steiner: %d terminals, %d closure paths, %d tree edges",
        len(nodes),
        len(union),
        len(edges),
    )
    return _to_tree(g, terms.office, edges)


def mst_prune(
    g: AccessGraph, terminals: TerminalSet | None = None, weight: WeightSpec = "dig"
) -> AccessTree:
    """Minimum spanning tree of the whole graph with customer-free branches
    removed

    Raises:
        LCInfeasibleError: Some customers are not connected to the office
    """
    terms = terminals or TerminalSet.from_graph(g)
    terms.check(g)
    _check_weights(g, weight)
    func = weight_function(weight)
    spanning = _kruskal(g.nodes, ((func(e.costs), e.u, e.v) for e in g.edges))
    forest = nx.Graph(spanning)
    forest.add_node(terms.office)
    reach = nx.node_connected_component(forest, terms.office)
    unreachable = tuple(c for c in terms.customers if c not in reach)
    if unreachable:
        raise LCInfeasibleError(unreachable, "terminals not connected to the office")
    component = [(u, v) for u, v in spanning if u in reach]
    return _to_tree(g, terms.office, _prune_leaves(component, terms.nodes))


_BUILDERS = {PlanMethod.STEINER: metric_closure_steiner, PlanMethod.MST: mst_prune}


def _plan_on(req: PlanRequest, method: PlanMethod) -> DesignSolution:
    tree = _BUILDERS[method](req.graph, TerminalSet.from_graph(req.graph), req.steiner_weight)
    options = dataclasses.replace(req.options, scenario=Scenario.GREENFIELD)
    if req.max_units is None:
        solution = redesign_tree(tree, req.pm, req.params, options)
    else:
        solution = redesign_tree_budgeted(
            tree, req.pm, req.params, req.max_units, options, req.objective
        )
    return solution.replace(method=method.value)


def plan_greenfield(req: PlanRequest) -> DesignSolution:
    """Plans a network on a street graph

    Raises:
        LCValidationError: The graph breaks a layout invariant
        LCInfeasibleError: No tree builder gives a feasible design
    """
    validate_graph(req.graph).raise_if_invalid()
    methods = (
        [PlanMethod.STEINER, PlanMethod.MST]
        if req.method is PlanMethod.BOTH
        else [req.method]
    )
    best: DesignSolution | None = None
    failure: LCInfeasibleError | None = None
    for method in methods:
        try:
            solution = _plan_on(req, method)
        except LCInfeasibleError as err:
            logger.debug("%s tree is infeasible: %s", method.value, err)
            failure = failure or err
            continue
        # Strict comparison keeps the Steiner design on ties.
        if best is None or solution.total < best.total:
            best = solution
    if best is None:
        assert failure is not None
        raise failure
    logger.info("greenfield: %s design, total %.2f", best.method, best.total)
    return best


def heuristic_gap(heuristic_total: float, exact_total: float) -> float:
    """`heuristic_total / exact_total - 1`"""
    return relative_gap(heuristic_total, exact_total)


PUBLISHED_GAP = 0.015


def gap_summary(gaps: Iterable[float]) -> dict[str, float]:
    """Distribution of heuristic gaps over a batch of instances

    Returns:
        count, mean, median, p90 and max of the gaps, and `within_published`,
        the share of instances within `PUBLISHED_GAP` (1.5%)
    """
    series = pd.Series(list(gaps), dtype=float)
    if series.empty:
        raise LCInvalidArgumentError("no gaps to summarize")
    return {
        "count": float(series.size),
        "mean": float(series.mean()),
        "median": float(series.median()),
        "p90": float(series.quantile(0.9)),
        "max": float(series.max()),
        "within_published": float((series <= PUBLISHED_GAP + 1e-12).mean()),
    }
