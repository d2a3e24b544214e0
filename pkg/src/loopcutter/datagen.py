"""Synthetic street graphs, copper trees, and the transforms used in sweeps

Every generator takes a seed and draws from its own
`numpy.random.Generator`, so outputs depend on nothing but their arguments.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from loopcutter.exceptions import LCInvalidArgumentError
from loopcutter.model import (
    AccessGraph,
    AccessTree,
    Edge,
    EdgeCosts,
    Node,
    NodeKind,
    validate_graph,
)
from loopcutter.util import validate_amount, validate_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class CitySpec:
    """Size and cost targets of a generated city

    Per-meter costs are assumptions: the fiber default is the cheaper of the two
    published options ($0.50/m; $6/m is the other).
    """

    dimension_km: float
    target_nodes: int
    customer_count: int
    candidate_fraction: float = 1.0
    seed: int = 0
    target_edges: int | None = None
    dig_per_m: float = 20.0
    copper_per_m: float = 1.0
    fiber_per_m: float = 0.5

    def __post_init__(self) -> None:
        validate_amount(self.dimension_km, "dimension_km", positive=True)
        validate_count(self.target_nodes, 2)
        validate_count(self.customer_count)
        if self.customer_count >= self.target_nodes:
            raise LCInvalidArgumentError("a city needs more nodes than customers")
        if not 0.0 <= self.candidate_fraction <= 1.0:
            raise LCInvalidArgumentError("candidate_fraction must be in [0, 1]")
        for rate in ("dig_per_m", "copper_per_m", "fiber_per_m"):
            validate_amount(getattr(self, rate), rate)

    def replace(self, **changes) -> CitySpec:
        return dataclasses.replace(self, **changes)


DATASET_PRESETS: dict[str, CitySpec] = {
    name: CitySpec(km, nodes, customers, target_edges=edges)
    for name, km, nodes, edges, customers in (
        ("B0.5", 0.5, 20, 38, 15),
        ("B0.8", 0.8, 53, 108, 30),
        ("B1.0", 1.0, 91, 188, 50),
        ("B2.0", 2.0, 583, 1266, 300),
        ("B3.0", 3.0, 1026, 2242, 600),
        ("B4.0", 4.0, 1677, 3692, 800),
        ("K0.5", 0.5, 20, 38, 12),
        ("K0.8", 0.8, 46, 92, 32),
        ("K1.0", 1.0, 92, 184, 50),
        ("K2.0", 2.0, 667, 1462, 300),
        ("K3.0", 3.0, 1522, 3398, 600),
        ("K4.0", 4.0, 2317, 5190, 800),
    )
}


def _costs(length: float, dig: float, copper: float, fiber: float) -> EdgeCosts:
    return EdgeCosts(length, dig * length, copper * length, fiber * length)


def generate_city(spec: CitySpec) -> AccessGraph:
    """A perturbed-grid street graph sized after `spec`

    Nodes sit on a jittered grid covering the square, joined to their grid
    neighbours and then by random cell diagonals until the edge target is met
    (twice the node count by default). The office is an interior node;
    customers are drawn from the other nodes, and the rest become candidates
    with probability `candidate_fraction`.

    Raises:
        LCInvalidArgumentError: The city spec is inconsistent
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.target_nodes
    rows = max(1, math.isqrt(n))
    cols = math.ceil(n / rows)
    spacing = spec.dimension_km * 1000.0 / max(rows - 1, cols - 1, 1)

    cells = [(k // cols, k % cols) for k in range(n)]
    jitter = rng.uniform(-0.25, 0.25, size=(n, 2)) * spacing
    coords = [
        (c * spacing + jitter[k, 0], r * spacing + jitter[k, 1])
        for k, (r, c) in enumerate(cells)
    ]
    index = {cell: k for k, cell in enumerate(cells)}

    pairs: list[tuple[int, int]] = []
    for k, (r, c) in enumerate(cells):
        for neighbor in ((r, c + 1), (r + 1, c)):
            if neighbor in index:
                pairs.append((k, index[neighbor]))
    diagonals = []
    for r in range(rows - 1):
        for c in range(cols - 1):
            corners = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
            if all(x in index for x in corners):
                flip = rng.random() < 0.5
                a, b = (corners[1], corners[2]) if flip else (corners[0], corners[3])
                diagonals.append((index[a], index[b]))
    order = rng.permutation(len(diagonals))
    target = spec.target_edges if spec.target_edges is not None else 2 * n
    for k in order:
        if len(pairs) >= target:
            break
        pairs.append(diagonals[k])

    interior = [k for k, (r, c) in enumerate(cells) if 0 < r < rows - 1 and 0 < c < cols - 1]
    office = int(rng.choice(interior if interior else list(range(n))))
    others = [k for k in range(n) if k != office]
    picked = rng.choice(len(others), size=spec.customer_count, replace=False)
    customers = {others[k] for k in picked}
    draws = rng.random(n)

    nodes = []
    for k in range(n):
        if k == office:
            kind = NodeKind.OFFICE
        elif k in customers:
            kind = NodeKind.CUSTOMER
        elif draws[k] < spec.candidate_fraction:
            kind = NodeKind.CANDIDATE
        else:
            kind = NodeKind.JUNCTION
        nodes.append(Node(f"n{k}", kind, float(coords[k][0]), float(coords[k][1])))
    edges = [
        Edge(
            f"n{a}",
            f"n{b}",
            _costs(
                math.dist(coords[a], coords[b]),
                spec.dig_per_m,
                spec.copper_per_m,
                spec.fiber_per_m,
            ),
        )
        for a, b in pairs
    ]
    logger.debug("city: %d nodes, %d edges, %d customers", n, len(edges), len(customers))
    return AccessGraph(nodes, edges)


def build_copper_tree(g: AccessGraph, seed: int = 0) -> AccessTree:
    """An all-copper layout: the shortest-path tree from the office, cut back
    to the branches that lead to customers

    Equal-length shortest paths are resolved by a seeded draw.

    Raises:
        LCValidationError: `g` is not a valid layout
    """
    validate_graph(g).raise_if_invalid()
    rng = np.random.default_rng(seed)
    office = g.office
    preds, _ = nx.dijkstra_predecessor_and_distance(g.graph, office, weight="length")
    parent: dict[str, str] = {}
    for node in g.nodes:
        options = sorted(preds.get(node, []))
        if len(options) == 1:
            parent[node] = options[0]
        elif options:
            parent[node] = options[int(rng.integers(len(options)))]

    keep = {office}
    for customer in g.customers:
        node = customer
        while node not in keep:
            keep.add(node)
            node = parent[node]
    return AccessTree(
        (n for n in g.nodes.values() if n.id in keep),
        (
            Edge(node, parent[node], g.edge_costs(node, parent[node]))
            for node in g.nodes
            if node in keep and node != office
        ),
    )


def scale_edges[L: (AccessGraph, AccessTree)](layout: L, factor: float) -> L:
    """Stretches every edge, and every cost derived from its length, by
    `factor`

    Raises:
        LCInvalidArgumentError: `factor` is not positive
    """
    validate_amount(factor, "factor", positive=True)
    return layout.map_edges(lambda costs: costs.scaled(factor))


def _rates(costs: EdgeCosts) -> tuple[float, float, float]:
    if costs.length_m <= 0:
        return (0.0, 0.0, 0.0)
    return (
        costs.dig / costs.length_m,
        costs.copper_install / costs.length_m,
        costs.fiber_install / costs.length_m,
    )


def scale_customers(tree: AccessTree, count: int, seed: int = 0) -> AccessTree:
    """Adds customers until the tree has `count` of them

    Each new customer hangs off the distribution point of a uniformly chosen
    existing customer on a pendant edge of 10 to 100 m, priced at the per-meter
    rates of that customer's own edge.

    Raises:
        LCInvalidArgumentError: `count` is below the current customer count, or
            the tree has no customers to copy from
    """
    validate_count(count)
    existing = tree.customers
    if count < len(existing):
        raise LCInvalidArgumentError(f"tree already has {len(existing)} customers")
    if count == len(existing):
        return tree
    if not existing:
        raise LCInvalidArgumentError("cannot place customers next to none")

    rng = np.random.default_rng(seed)
    nodes = list(tree.original_nodes())
    edges = list(tree.edges())
    taken = {n.id for n in nodes}
    serial = 0
    for _ in range(count - len(existing)):
        leaf = existing[int(rng.integers(len(existing)))]
        anchor = tree.parent(leaf)
        while anchor is not None and (tree.is_customer(anchor) or anchor in tree.aliases):
            anchor = tree.parent(anchor)
        assert anchor is not None
        rates = _rates(tree.parent_edge(leaf))
        length = float(rng.uniform(10.0, 100.0))
        angle = float(rng.uniform(0.0, 2.0 * math.pi))
        while f"{leaf}+{serial}" in taken:
            serial += 1
        new_id = f"{leaf}+{serial}"
        taken.add(new_id)
        base = tree.node(anchor)
        nodes.append(
            Node(
                new_id,
                NodeKind.CUSTOMER,
                base.x_m + length * math.cos(angle),
                base.y_m + length * math.sin(angle),
            )
        )
        edges.append(Edge(new_id, anchor, _costs(length, *rates)))
    return AccessTree(nodes, edges)


def balanced_tree(
    customers: int,
    branching: int = 3,
    seed: int = 0,
    edge_m: tuple[float, float] = (50.0, 200.0),
    candidate_fraction: float = 1.0,
    fiber_per_m: float = 0.5,
) -> AccessTree:
    """A random copper tree with customers split evenly over the branches

    Args:
        customers: Number of customer leaves
        branching: Children per internal node
        seed: Random seed
        edge_m: Range of edge lengths in meters
        candidate_fraction: Probability that an internal node may host units
        fiber_per_m: Fiber cost per meter
    """
    validate_count(customers)
    validate_count(branching, 2)
    rng = np.random.default_rng(seed)
    nodes = [Node("root", NodeKind.OFFICE)]
    edges: list[Edge] = []
    stack = [("root", customers)]
    serial = 0
    while stack:
        parent, load = stack.pop()
        parts = [load // branching + (1 if k < load % branching else 0) for k in range(branching)]
        for part in parts:
            if part == 0:
                continue
            serial += 1
            length = float(rng.uniform(*edge_m))
            if part == 1:
                node_id, kind = f"u{serial}", NodeKind.CUSTOMER
            else:
                node_id = f"v{serial}"
                kind = (
                    NodeKind.CANDIDATE
                    if rng.random() < candidate_fraction
                    else NodeKind.JUNCTION
                )
                stack.append((node_id, part))
            nodes.append(Node(node_id, kind))
            edges.append(Edge(node_id, parent, _costs(length, 0.0, 0.0, fiber_per_m)))
    return AccessTree(nodes, edges)


def random_tree(
    customers: int,
    seed: int = 0,
    max_depth: int = 5,
    internal: int | None = None,
    candidate_fraction: float = 0.7,
    edge_m: tuple[float, float] = (50.0, 600.0),
    fiber_per_m: tuple[float, float] = (0.0, 2.0),
    copper_per_m: float = 0.0,
) -> AccessTree:
    """An irregular random copper tree with customers as leaves

    Internal nodes attach to a uniformly drawn earlier internal node above
    `max_depth - 1`; customers attach to any internal node or the office. Every
    edge gets its own fiber price drawn from `fiber_per_m`.

    Args:
        customers: Number of customers
        seed: Random seed
        max_depth: Most edges between the office and any customer
        internal: Number of non-customer nodes besides the office; defaults to
            the number of customers
        candidate_fraction: Probability that an internal node may host units
        edge_m: Range of edge lengths in meters
        fiber_per_m: Range of fiber prices per meter
        copper_per_m: Copper installation price per meter
    """
    validate_count(customers)
    validate_count(max_depth, 1)
    rng = np.random.default_rng(seed)
    count = customers if internal is None else internal
    validate_count(count)

    nodes = [Node("root", NodeKind.OFFICE)]
    edges: list[Edge] = []
    level = {"root": 0}
    hubs = ["root"]

    def attach(node_id: str, kind: NodeKind, parents: list[str]) -> None:
        up = parents[int(rng.integers(len(parents)))]
        length = float(rng.uniform(*edge_m))
        fiber = float(rng.uniform(*fiber_per_m))
        nodes.append(Node(node_id, kind))
        edges.append(Edge(node_id, up, _costs(length, 0.0, copper_per_m, fiber)))
        level[node_id] = level[up] + 1

    for k in range(count):
        open_hubs = [h for h in hubs if level[h] < max_depth - 1]
        if not open_hubs:
            break
        kind = NodeKind.CANDIDATE if rng.random() < candidate_fraction else NodeKind.JUNCTION
        attach(f"v{k}", kind, open_hubs)
        hubs.append(f"v{k}")
    for k in range(customers):
        attach(f"u{k}", NodeKind.CUSTOMER, hubs)
    return AccessTree(nodes, edges)
