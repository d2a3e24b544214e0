"""Domain types shared by every module: street graphs, copper trees, the loop
power model, cost parameters and design solutions

All types are immutable after construction and every function here is pure, so
instances can be shared freely between threads and worker processes.
"""

from __future__ import annotations

import bisect
import dataclasses
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Protocol

import networkx as nx

from loopcutter.exceptions import (
    LCInvalidArgumentError,
    LCNotATreeError,
    LCValidationError,
)
from loopcutter.util import edge_key, validate_amount, validate_count

logger = logging.getLogger(__name__)

# Loop lengths are sums of float edge lengths; this absorbs their rounding when
# comparing against the reach limit.
REACH_TOLERANCE = 1e-9


class NodeKind(Enum):
    """The role of a node in an access layout"""

    OFFICE = "office"
    CUSTOMER = "customer"
    CANDIDATE = "candidate"
    JUNCTION = "junction"


class FiberMode(Enum):
    """How fiber installation cost is charged on an edge

    SHARED_CABLE charges an edge once if any remote unit lies below it.
    PER_STRAND charges it once per remote unit below it.
    """

    SHARED_CABLE = "shared-cable"
    PER_STRAND = "per-strand"


class Scenario(Enum):
    """Which costs a design pays for

    REDESIGN reuses an existing copper tree: no digging, no new copper.
    GREENFIELD digs every tree edge once and installs copper per loop.
    """

    REDESIGN = "redesign"
    GREENFIELD = "greenfield"


@dataclass(frozen=True, slots=True)
class Node:
    """A street-graph or tree node with planar coordinates in meters"""

    id: str
    kind: NodeKind
    x_m: float = 0.0
    y_m: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise LCInvalidArgumentError("node ids must be non-empty strings")
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", NodeKind(self.kind))

    @property
    def hosts_units(self) -> bool:
        """True if remote units may be placed here"""
        return self.kind in (NodeKind.OFFICE, NodeKind.CANDIDATE)


@dataclass(frozen=True, slots=True)
class EdgeCosts:
    """Length and money costs of one street segment

    `dig` is paid once per trench, `copper_install` once per loop laid over the
    segment and `fiber_install` per cable or per strand depending on the
    `FiberMode`. Values are not checked here; `validate_graph` reports bad ones.
    """

    length_m: float
    dig: float = 0.0
    copper_install: float = 0.0
    fiber_install: float = 0.0

    def scaled(self, factor: float) -> EdgeCosts:
        """Returns the costs of the segment stretched by `factor`"""
        return EdgeCosts(
            self.length_m * factor,
            self.dig * factor,
            self.copper_install * factor,
            self.fiber_install * factor,
        )

    def values(self) -> tuple[float, float, float, float]:
        return (self.length_m, self.dig, self.copper_install, self.fiber_install)


@dataclass(frozen=True, slots=True)
class Edge:
    """An undirected street segment"""

    u: str
    v: str
    costs: EdgeCosts

    @property
    def key(self) -> tuple[str, str]:
        return edge_key(self.u, self.v)


class Layout(Protocol):
    """What cost accounting needs to know about a graph or a tree"""

    @property
    def office(self) -> str: ...

    @property
    def customers(self) -> tuple[str, ...]: ...

    def has_node(self, node_id: str) -> bool: ...

    def edge_costs(self, u: str, v: str) -> EdgeCosts: ...


@dataclass(frozen=True, slots=True)
class PowerModel:
    """Line driver power as a piecewise-linear function of loop length

    Lengths beyond the last breakpoint follow the last segment, and loops longer
    than `max_loop_m` cannot be driven at all.
    """

    breakpoints: tuple[tuple[float, float], ...]
    max_loop_m: float = 1500.0

    def __post_init__(self) -> None:
        points = tuple((float(m), float(w)) for m, w in self.breakpoints)
        if not points:
            raise LCInvalidArgumentError("a power model needs breakpoints")
        object.__setattr__(self, "breakpoints", points)
        object.__setattr__(
            self, "max_loop_m", validate_amount(self.max_loop_m, "max_loop_m", True)
        )

    @classmethod
    def desk(cls) -> PowerModel:
        """The default affine model: 0.10 W plus 0.0005 W per meter, L = 1500 m"""
        return cls(((0.0, 0.10), (1500.0, 0.85)), 1500.0)

    @classmethod
    def constant(cls, watts: float, max_loop_m: float = 1500.0) -> PowerModel:
        return cls(((0.0, watts), (max_loop_m, watts)), max_loop_m)

    def interpolate(self, length: float) -> float:
        """Evaluates the piecewise-linear curve without the reach check"""
        points = self.breakpoints
        if len(points) == 1:
            return points[0][1]
        lengths = [m for m, _ in points]
        i = bisect.bisect_right(lengths, length) - 1
        i = min(max(i, 0), len(points) - 2)
        (x0, w0), (x1, w1) = points[i], points[i + 1]
        watts = w0 + (w1 - w0) * (length - x0) / (x1 - x0)
        return max(watts, 0.0)

    @property
    def average_slope(self) -> float:
        """Watts per meter over [0, L]"""
        return (self.interpolate(self.max_loop_m) - self.interpolate(0.0)) / (
            self.max_loop_m
        )

    def additive(self) -> PowerModel:
        """Returns the segment-additive model: average slope times length

        Summing this over the segments of a loop gives the same value as
        evaluating it on the whole loop, which the ILP needs.
        """
        slope = self.average_slope
        return PowerModel(
            ((0.0, 0.0), (self.max_loop_m, slope * self.max_loop_m)), self.max_loop_m
        )

    def to_dict(self) -> dict:
        return {
            "breakpoints": [[m, w] for m, w in self.breakpoints],
            "max_loop_m": self.max_loop_m,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> PowerModel:
        return cls(
            tuple(tuple(point) for point in data["breakpoints"]),
            data.get("max_loop_m", 1500.0),
        )


@dataclass(frozen=True, slots=True)
class CostParams:
    """Money parameters of a design

    Defaults are the tree-redesign experiment values: $2000 per remote unit,
    50 ports, $0.20 per kWh over 3 years.
    """

    rem_cost: float = 2000.0
    capacity: int = 50
    energy_price: float = 0.20
    horizon_hours: float = 3 * 8760.0
    fiber_mode: FiberMode = FiberMode.SHARED_CABLE
    ilp_additive_power: bool = False

    def __post_init__(self) -> None:
        validate_amount(self.rem_cost, "rem_cost")
        validate_count(self.capacity, 1)
        validate_amount(self.energy_price, "energy_price")
        validate_amount(self.horizon_hours, "horizon_hours", positive=True)
        if isinstance(self.fiber_mode, str):
            object.__setattr__(self, "fiber_mode", FiberMode(self.fiber_mode))

    def replace(self, **changes) -> CostParams:
        return dataclasses.replace(self, **changes)

    def for_ilp(self) -> CostParams:
        """The parameters every ILP comparison is made under"""
        return self.replace(fiber_mode=FiberMode.PER_STRAND, ilp_additive_power=True)

    def to_dict(self) -> dict:
        return {
            "rem_cost": self.rem_cost,
            "capacity": self.capacity,
            "energy_price_kwh": self.energy_price,
            "horizon_hours": self.horizon_hours,
            "fiber_mode": self.fiber_mode.value,
            "ilp_additive_power": self.ilp_additive_power,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> CostParams:
        defaults = cls()
        return cls(
            rem_cost=data.get("rem_cost", defaults.rem_cost),
            capacity=data.get("capacity", defaults.capacity),
            energy_price=data.get("energy_price_kwh", defaults.energy_price),
            horizon_hours=data.get("horizon_hours", defaults.horizon_hours),
            fiber_mode=FiberMode(data.get("fiber_mode", defaults.fiber_mode.value)),
            ilp_additive_power=bool(data.get("ilp_additive_power", False)),
        )


@dataclass(frozen=True, slots=True)
class CostBreakdown:
    """The five money components of a design plus its power and unit totals"""

    dig: float = 0.0
    fiber: float = 0.0
    copper_install: float = 0.0
    remote_units: float = 0.0
    power: float = 0.0
    watts_total: float = 0.0
    units_used: int = 0

    @property
    def total(self) -> float:
        return self.dig + self.fiber + self.copper_install + self.remote_units + (
            self.power
        )

    @property
    def capex(self) -> float:
        """Remote units plus fiber"""
        return self.remote_units + self.fiber

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "dig": self.dig,
            "fiber": self.fiber,
            "copper_install": self.copper_install,
            "remote_units": self.remote_units,
            "power": self.power,
            "watts_total": self.watts_total,
            "units_used": self.units_used,
        }


@dataclass(frozen=True, slots=True)
class Violation:
    """One broken invariant: a short code, what it concerns, and a message"""

    code: str
    subject: str
    message: str


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """The list of invariant violations found in a dataset"""

    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def raise_if_invalid(self) -> None:
        """Raises:
        LCValidationError: There is at least one violation
        """
        if self.violations:
            raise LCValidationError(self)


@dataclass(frozen=True, slots=True)
class ConvexityReport:
    """Result of `check_convexity`"""

    convex: bool
    monotone: bool
    slopes: tuple[float, ...]

    @property
    def ok(self) -> bool:
        return self.convex and self.monotone


@dataclass(frozen=True, slots=True)
class PathInfo:
    """Single-source shortest path result for one node"""

    distance: float
    predecessor: str | None

    @property
    def reachable(self) -> bool:
        return math.isfinite(self.distance)


class AccessGraph:
    """A street or duct graph: nodes with kinds and coordinates, and undirected
    edges with `EdgeCosts`

    Structural problems that prevent building the graph at all (duplicate node
    ids, edges to unknown nodes) raise immediately. Every other invariant is
    reported by `validate_graph`.
    """

    __slots__ = ("_nodes", "_edges", "_graph")
    _nodes: Mapping[str, Node]
    _edges: tuple[Edge, ...]
    _graph: nx.Graph

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]) -> None:
        """
        Args:
            nodes: The nodes, in a stable order
            edges: The undirected edges, in a stable order

        Raises:
            LCInvalidArgumentError: A node id repeats or an edge endpoint is
                unknown
        """
        node_map: dict[str, Node] = {}
        for node in nodes:
            if node.id in node_map:
                raise LCInvalidArgumentError(f"duplicate node id {node.id!r}")
            node_map[node.id] = node
        self._nodes = MappingProxyType(node_map)
        self._edges = tuple(edges)

        graph = nx.Graph()
        for node in node_map.values():
            graph.add_node(node.id, kind=node.kind)
        for edge in self._edges:
            for end in (edge.u, edge.v):
                if end not in node_map:
                    raise LCInvalidArgumentError(f"edge endpoint {end!r} is not a node")
            graph.add_edge(
                edge.u,
                edge.v,
                costs=edge.costs,
                length=edge.costs.length_m,
                dig=edge.costs.dig,
            )
        self._graph = nx.freeze(graph)

    def __reduce__(self):
        return (AccessGraph, (tuple(self._nodes.values()), self._edges))

    @property
    def nodes(self) -> Mapping[str, Node]:
        return self._nodes

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def graph(self) -> nx.Graph:
        """A frozen networkx view; edge attribute `costs` holds `EdgeCosts`"""
        return self._graph

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise LCInvalidArgumentError(f"unknown node {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def ids_of_kind(self, kind: NodeKind) -> tuple[str, ...]:
        return tuple(n.id for n in self._nodes.values() if n.kind is kind)

    @property
    def office(self) -> str:
        """The id of the single office node

        Raises:
            LCInvalidArgumentError: There is not exactly one office
        """
        offices = self.ids_of_kind(NodeKind.OFFICE)
        if len(offices) != 1:
            raise LCInvalidArgumentError(f"expected one office, found {len(offices)}")
        return offices[0]

    @property
    def customers(self) -> tuple[str, ...]:
        return self.ids_of_kind(NodeKind.CUSTOMER)

    @property
    def candidates(self) -> tuple[str, ...]:
        return self.ids_of_kind(NodeKind.CANDIDATE)

    def edge_costs(self, u: str, v: str) -> EdgeCosts:
        data = self._graph.get_edge_data(u, v)
        if data is None:
            raise LCInvalidArgumentError(f"no edge between {u!r} and {v!r}")
        return data["costs"]

    def is_tree(self) -> bool:
        return (
            len(self._edges) == len(self._nodes) - 1
            and len(self._nodes) > 0
            and nx.is_connected(self._graph)
        )

    def map_edges(self, func: Callable[[EdgeCosts], EdgeCosts]) -> AccessGraph:
        """Returns a copy with every edge's costs replaced by `func(costs)`"""
        return AccessGraph(
            self._nodes.values(), (Edge(e.u, e.v, func(e.costs)) for e in self._edges)
        )


def power_of_loop(pm: PowerModel, length: float) -> float:
    """Line driver watts needed for a copper loop

    Args:
        pm: The power model
        length: Loop length in meters

    Returns:
        Watts, or `math.inf` when the loop is longer than `pm.max_loop_m`

    Raises:
        LCInvalidArgumentError: `length` is negative
    """
    if length < 0:
        raise LCInvalidArgumentError(f"negative loop length {length}")
    if exceeds_reach(pm, length):
        return math.inf
    return pm.interpolate(length)


def exceeds_reach(pm: PowerModel, length: float) -> bool:
    """True if a loop of `length` meters cannot be driven under `pm`"""
    return length > pm.max_loop_m + REACH_TOLERANCE


def energy_to_money(watts: float, p: CostParams) -> float:
    """Converts a constant draw into its upfront money cost over the horizon

    Args:
        watts: Continuous power draw
        p: Provides the energy price and the horizon

    Returns:
        watts / 1000 * horizon_hours * energy_price
    """
    return watts / 1000.0 * p.horizon_hours * p.energy_price


def effective_power_model(pm: PowerModel, p: CostParams) -> PowerModel:
    """The model costs are computed with: additive when the ILP mode is set"""
    return pm.additive() if p.ilp_additive_power else pm


def check_convexity(pm: PowerModel) -> ConvexityReport:
    """Checks that the curve is non-decreasing and convex

    Raises:
        LCInvalidArgumentError: Fewer than two breakpoints, or breakpoint lengths
            not strictly increasing
    """
    points = pm.breakpoints
    if len(points) < 2:
        raise LCInvalidArgumentError("convexity needs at least two breakpoints")
    slopes = []
    for (x0, w0), (x1, w1) in zip(points, points[1:]):
        if x1 <= x0:
            raise LCInvalidArgumentError("breakpoints must be sorted by length")
        slopes.append((w1 - w0) / (x1 - x0))
    convex = all(b >= a - 1e-12 for a, b in zip(slopes, slopes[1:]))
    monotone = all(s >= -1e-12 for s in slopes)
    return ConvexityReport(convex, monotone, tuple(slopes))


def validate_power_model(pm: PowerModel) -> ValidationReport:
    """Reports why a power model cannot be used by the optimizers"""
    if len(pm.breakpoints) == 1:
        if pm.breakpoints[0][1] < 0:
            return ValidationReport((Violation("negative-power", "power_model", ""),))
        return ValidationReport()
    try:
        report = check_convexity(pm)
    except LCInvalidArgumentError as err:
        return ValidationReport((Violation("unsorted-breakpoints", "power_model", str(err)),))
    violations = []
    if not report.monotone:
        violations.append(
            Violation("decreasing-power", "power_model", "watts must not decrease")
        )
    if not report.convex:
        violations.append(
            Violation("non-convex-power", "power_model", "slopes must not decrease")
        )
    if any(w < 0 for _, w in pm.breakpoints):
        violations.append(Violation("negative-power", "power_model", ""))
    return ValidationReport(tuple(violations))


def validate_graph(g: AccessGraph) -> ValidationReport:
    """Lists every AccessGraph invariant that does not hold

    Returns:
        An empty report iff there is exactly one office, no self-loops, no
        parallel edges, all costs are finite and non-negative, and every node is
        connected to the office.
    """
    violations: list[Violation] = []
    offices = g.ids_of_kind(NodeKind.OFFICE)
    if not offices:
        violations.append(Violation("no-office", "", "the layout has no office"))
    elif len(offices) > 1:
        violations.append(
            Violation("multiple-offices", ",".join(offices), "multiple offices")
        )

    seen: Counter[tuple[str, str]] = Counter(e.key for e in g.edges)
    for edge in g.edges:
        subject = f"{edge.u}-{edge.v}"
        if edge.u == edge.v:
            violations.append(Violation("self-loop", subject, "self-loop edge"))
        if any(not math.isfinite(x) or x < 0 for x in edge.costs.values()):
            violations.append(
                Violation("negative-cost", subject, "costs must be finite and >= 0")
            )
    for key, count in seen.items():
        if count > 1:
            violations.append(
                Violation("parallel-edge", f"{key[0]}-{key[1]}", "parallel edges")
            )

    if offices:
        reachable = nx.node_connected_component(g.graph, offices[0])
        for node in g.nodes.values():
            if node.id in reachable:
                continue
            if node.kind is NodeKind.CUSTOMER:
                violations.append(
                    Violation("unreachable-customer", node.id, "unreachable customer")
                )
            else:
                violations.append(
                    Violation("disconnected-node", node.id, "node not connected")
                )
    return ValidationReport(tuple(violations))


type WeightSpec = str | Callable[[EdgeCosts], float]

_WEIGHTS: dict[str, Callable[[EdgeCosts], float]] = {
    "length": lambda c: c.length_m,
    "dig": lambda c: c.dig,
    "dig+fiber": lambda c: c.dig + c.fiber_install,
}


def weight_function(weight: WeightSpec) -> Callable[[EdgeCosts], float]:
    """Resolves a weight name (`length`, `dig`, `dig+fiber`) or passes a
    callable through"""
    if callable(weight):
        return weight
    try:
        return _WEIGHTS[weight]
    except KeyError:
        raise LCInvalidArgumentError(f"unknown weight {weight!r}") from None


def shortest_paths(
    g: AccessGraph, source: str, weight: WeightSpec = "length"
) -> dict[str, PathInfo]:
    """Single-source shortest paths over the graph

    Args:
        g: The graph
        source: Start node id
        weight: `length`, `dig`, `dig+fiber` or a function of `EdgeCosts`

    Returns:
        A `PathInfo` for every node; unreachable nodes have infinite distance

    Raises:
        LCInvalidArgumentError: Unknown source, or a negative edge weight
    """
    if not g.has_node(source):
        raise LCInvalidArgumentError(f"unknown source {source!r}")
    func = weight_function(weight)
    for edge in g.edges:
        if func(edge.costs) < 0:
            raise LCInvalidArgumentError(f"negative weight on {edge.u}-{edge.v}")
    dist, paths = nx.single_source_dijkstra(
        g.graph, source, weight=lambda u, v, d: func(d["costs"])
    )
    result = {}
    for node_id in g.nodes:
        if node_id in dist:
            path = paths[node_id]
            result[node_id] = PathInfo(dist[node_id], path[-2] if len(path) > 1 else None)
        else:
            result[node_id] = PathInfo(math.inf, None)
    return result


class AccessTree:
    """A copper tree rooted at the office

    Customers are always leaves: a customer that has children in the input is
    split into a junction that takes its place and a zero-length pendant edge
    to the customer. The junction id is recorded in `aliases`, and every public
    edge or path view reports original node ids.
    """

    __slots__ = (
        "_nodes",
        "_parent",
        "_children",
        "_edge",
        "_root",
        "_aliases",
        "_postorder",
        "_depth",
        "_below",
        "_edge_index",
    )

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]) -> None:
        """
        Args:
            nodes: The tree nodes; exactly one must be the office
            edges: Exactly `len(nodes) - 1` edges connecting them

        Raises:
            LCInvalidArgumentError: Not exactly one office, or unknown endpoint
            LCNotATreeError: The edges do not form a spanning tree
        """
        node_map: dict[str, Node] = {}
        for node in nodes:
            if node.id in node_map:
                raise LCInvalidArgumentError(f"duplicate node id {node.id!r}")
            node_map[node.id] = node
        edge_list = tuple(edges)
        offices = [n.id for n in node_map.values() if n.kind is NodeKind.OFFICE]
        if len(offices) != 1:
            raise LCInvalidArgumentError(f"expected one office, found {len(offices)}")
        if len(edge_list) != len(node_map) - 1:
            raise LCNotATreeError(
                f"{len(node_map)} nodes need {len(node_map) - 1} tree edges, "
                f"got {len(edge_list)}"
            )

        adjacency: dict[str, list[tuple[str, EdgeCosts]]] = {n: [] for n in node_map}
        for edge in edge_list:
            for end in (edge.u, edge.v):
                if end not in node_map:
                    raise LCInvalidArgumentError(f"edge endpoint {end!r} is not a node")
            adjacency[edge.u].append((edge.v, edge.costs))
            adjacency[edge.v].append((edge.u, edge.costs))

        root = offices[0]
        parent: dict[str, str | None] = {root: None}
        edge_to_parent: dict[str, EdgeCosts] = {}
        children: dict[str, list[str]] = {n: [] for n in node_map}
        queue = deque([root])
        while queue:
            current = queue.popleft()
            for neighbor, costs in sorted(adjacency[current], key=lambda x: x[0]):
                if neighbor == parent[current]:
                    continue
                if neighbor in parent:
                    raise LCNotATreeError("the edges contain a cycle")
                parent[neighbor] = current
                edge_to_parent[neighbor] = costs
                children[current].append(neighbor)
                queue.append(neighbor)
        if len(parent) != len(node_map):
            raise LCNotATreeError("the edges do not connect every node")

        aliases: dict[str, str] = {}
        for node in list(node_map.values()):
            if node.kind is not NodeKind.CUSTOMER or not children[node.id]:
                continue
            junction_id = f"{node.id}~junction"
            while junction_id in node_map:
                junction_id += "~"
            node_map[junction_id] = Node(junction_id, NodeKind.JUNCTION, node.x_m, node.y_m)
            up = parent[node.id]
            assert up is not None
            children[up] = [junction_id if c == node.id else c for c in children[up]]
            parent[junction_id] = up
            edge_to_parent[junction_id] = edge_to_parent[node.id]
            children[junction_id] = children[node.id] + [node.id]
            for child in children[node.id]:
                parent[child] = junction_id
            children[node.id] = []
            parent[node.id] = junction_id
            edge_to_parent[node.id] = EdgeCosts(0.0)
            aliases[junction_id] = node.id
        if aliases:
            logger.debug("split %d internal customers into junctions", len(aliases))

        self._nodes = MappingProxyType(node_map)
        self._parent = parent
        self._children = {k: tuple(v) for k, v in children.items()}
        self._edge = edge_to_parent
        self._root = root
        self._aliases = MappingProxyType(aliases)

        order: list[str] = []
        stack = [(root, False)]
        while stack:
            current, expanded = stack.pop()
            if expanded:
                order.append(current)
                continue
            stack.append((current, True))
            for child in reversed(self._children[current]):
                stack.append((child, False))
        self._postorder = tuple(order)

        depth = {root: 0.0}
        for node_id in reversed(order):
            if node_id != root:
                up = parent[node_id]
                assert up is not None
                depth[node_id] = depth[up] + edge_to_parent[node_id].length_m
        self._depth = depth

        below: dict[str, int] = {}
        for node_id in order:
            own = 1 if node_map[node_id].kind is NodeKind.CUSTOMER else 0
            below[node_id] = own + sum(below[c] for c in self._children[node_id])
        self._below = below

        index = {}
        for child, costs in edge_to_parent.items():
            up = parent[child]
            assert up is not None
            a, b = self.original_id(child), self.original_id(up)
            if a != b:
                index[edge_key(a, b)] = costs
        self._edge_index = index

    @classmethod
    def from_graph(cls, g: AccessGraph) -> AccessTree:
        """Builds a tree from a tree-shaped graph

        Raises:
            LCNotATreeError: `g` is not a tree
        """
        return cls(g.nodes.values(), g.edges)

    def __reduce__(self):
        # Junctions are rebuilt from the original layout.
        return (AccessTree, (self.original_nodes(), self.edges()))

    @property
    def root(self) -> str:
        return self._root

    @property
    def office(self) -> str:
        return self._root

    @property
    def nodes(self) -> Mapping[str, Node]:
        """All nodes, including junctions created for internal customers"""
        return self._nodes

    @property
    def aliases(self) -> Mapping[str, str]:
        """Junction id -> the customer it was split from"""
        return self._aliases

    def original_id(self, node_id: str) -> str:
        return self._aliases.get(node_id, node_id)

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise LCInvalidArgumentError(f"unknown node {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes and node_id not in self._aliases

    def parent(self, node_id: str) -> str | None:
        return self._parent[node_id]

    def children(self, node_id: str) -> tuple[str, ...]:
        return self._children[node_id]

    def parent_edge(self, node_id: str) -> EdgeCosts:
        """The costs of the edge from `node_id` up to its parent"""
        try:
            return self._edge[node_id]
        except KeyError:
            raise LCInvalidArgumentError(f"{node_id!r} has no parent edge") from None

    def postorder(self) -> tuple[str, ...]:
        return self._postorder

    def depth(self, node_id: str) -> float:
        """Distance in meters from the root along the tree"""
        return self._depth[node_id]

    def customers_below(self, node_id: str) -> int:
        return self._below[node_id]

    @property
    def customers(self) -> tuple[str, ...]:
        """Customer ids in preorder, siblings in child order"""
        order = []
        stack = [self._root]
        while stack:
            current = stack.pop()
            if self._nodes[current].kind is NodeKind.CUSTOMER:
                order.append(current)
            stack.extend(reversed(self._children[current]))
        return tuple(order)

    def is_customer(self, node_id: str) -> bool:
        return self._nodes[node_id].kind is NodeKind.CUSTOMER

    def root_path(self, node_id: str) -> tuple[str, ...]:
        """Node ids from `node_id` up to and including the root"""
        path = [node_id]
        while (up := self._parent[path[-1]]) is not None:
            path.append(up)
        return tuple(path)

    def edge_costs(self, u: str, v: str) -> EdgeCosts:
        """Edge costs looked up by original node ids"""
        try:
            return self._edge_index[edge_key(u, v)]
        except KeyError:
            raise LCInvalidArgumentError(f"no tree edge between {u!r} and {v!r}") from None

    def edges(self) -> tuple[Edge, ...]:
        """Tree edges as (child, parent) in original ids, without split edges"""
        result = []
        for child in self._postorder:
            up = self._parent[child]
            if up is None:
                continue
            a, b = self.original_id(child), self.original_id(up)
            if a != b:
                result.append(Edge(a, b, self._edge[child]))
        return tuple(result)

    def original_nodes(self) -> tuple[Node, ...]:
        return tuple(n for n in self._nodes.values() if n.id not in self._aliases)

    def to_graph(self) -> AccessGraph:
        return AccessGraph(self.original_nodes(), self.edges())

    def map_edges(self, func: Callable[[EdgeCosts], EdgeCosts]) -> AccessTree:
        """Returns a copy with every edge's costs replaced by `func(costs)`"""
        return AccessTree(
            self.original_nodes(),
            (Edge(e.u, e.v, func(e.costs)) for e in self.edges()),
        )


@dataclass(frozen=True, slots=True)
class Assignment:
    """How one customer is served: by which unit-bearing node, over which path

    `path` lists node ids from the serving node down to the customer.
    """

    customer: str
    served_by: str
    loop_m: float
    path: tuple[str, ...]

    def path_edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(self.path, self.path[1:]))


@dataclass(frozen=True, slots=True)
class DesignSolution:
    """A complete design: unit placements, loop assignments, fiber and trench
    edges, and the cost breakdown

    `fiber_edges` maps canonical edge keys to the number of units fed over the
    edge. `trench_edges` are the edges the design is laid along. `exact` is
    False when the optimizer could not certify optimality.
    """

    placements: Mapping[str, int]
    assignments: tuple[Assignment, ...]
    fiber_edges: Mapping[tuple[str, str], int]
    breakdown: CostBreakdown
    scenario: Scenario = Scenario.REDESIGN
    trench_edges: tuple[tuple[str, str], ...] = ()
    unserved: tuple[str, ...] = ()
    method: str | None = None
    exact: bool = True
    extras: Mapping[str, object] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.breakdown.total

    @property
    def units_used(self) -> int:
        return sum(self.placements.values())

    def remote_units(self, office: str) -> int:
        """Units placed away from `office`; these are what a budget caps"""
        return sum(n for node, n in self.placements.items() if node != office)

    def assignment(self, customer: str) -> Assignment:
        for item in self.assignments:
            if item.customer == customer:
                return item
        raise LCInvalidArgumentError(f"customer {customer!r} is not served")

    def replace(self, **changes) -> DesignSolution:
        return dataclasses.replace(self, **changes)
