"""Reading and writing dataset and solution JSON files"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from loopcutter.exceptions import LCInvalidArgumentError
from loopcutter.model import (
    AccessGraph,
    AccessTree,
    CostParams,
    DesignSolution,
    Edge,
    EdgeCosts,
    Node,
    NodeKind,
    PowerModel,
    validate_graph,
    validate_power_model,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Dataset:
    """A layout together with the power model and cost parameters it was
    published with"""

    graph: AccessGraph
    power_model: PowerModel = field(default_factory=PowerModel.desk)
    params: CostParams = field(default_factory=CostParams)

    def tree(self) -> AccessTree:
        """The layout as a copper tree

        Raises:
            LCNotATreeError: The layout is not a tree
        """
        return AccessTree.from_graph(self.graph)


def parse_dataset(data: Mapping[str, Any], validate: bool = True) -> Dataset:
    """Builds a `Dataset` from decoded JSON

    Args:
        data: The decoded document
        validate: Enforce the graph and power-model invariants

    Raises:
        LCInvalidArgumentError: A required key is missing or malformed
        LCValidationError: An invariant does not hold
    """
    try:
        nodes = [
            Node(str(n["id"]), NodeKind(n["kind"]), n.get("x_m", 0.0), n.get("y_m", 0.0))
            for n in data["nodes"]
        ]
        edges = [
            Edge(
                str(e["u"]),
                str(e["v"]),
                EdgeCosts(
                    float(e["length_m"]),
                    float(e.get("dig", 0.0)),
                    float(e.get("copper", 0.0)),
                    float(e.get("fiber", 0.0)),
                ),
            )
            for e in data["edges"]
        ]
        pm = (
            PowerModel.from_dict(data["power_model"])
            if "power_model" in data
            else PowerModel.desk()
        )
        params = CostParams.from_dict(data.get("params", {}))
    except (AttributeError, KeyError, TypeError, ValueError) as err:
        raise LCInvalidArgumentError(f"malformed dataset: {err!r}") from err

    graph = AccessGraph(nodes, edges)
    if validate:
        validate_graph(graph).raise_if_invalid()
        validate_power_model(pm).raise_if_invalid()
    return Dataset(graph, pm, params)


def dataset_to_dict(ds: Dataset) -> dict[str, Any]:
    return {
        "nodes": [
            {"id": n.id, "kind": n.kind.value, "x_m": n.x_m, "y_m": n.y_m}
            for n in ds.graph.nodes.values()
        ],
        "edges": [
            {
                "u": e.u,
                "v": e.v,
                "length_m": e.costs.length_m,
                "dig": e.costs.dig,
                "copper": e.costs.copper_install,
                "fiber": e.costs.fiber_install,
            }
            for e in ds.graph.edges
        ],
        "power_model": ds.power_model.to_dict(),
        "params": ds.params.to_dict(),
    }


def load_dataset(path: str | Path, validate: bool = True) -> Dataset:
    """Reads a UTF-8 dataset file"""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise LCInvalidArgumentError(f"{path}: not JSON: {err}") from err
    ds = parse_dataset(data, validate)
    logger.debug(
        "loaded %s: %d nodes, %d edges", path, len(ds.graph.nodes), len(ds.graph.edges)
    )
    return ds


def save_dataset(ds: Dataset, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(dataset_to_dict(ds), indent=2) + "\n", encoding="utf-8"
    )


def solution_to_dict(s: DesignSolution) -> dict[str, Any]:
    """The solution file document; keys are emitted in a fixed order"""
    doc: dict[str, Any] = {
        "total": s.breakdown.total,
        "scenario": s.scenario.value,
        "breakdown": s.breakdown.to_dict(),
        "placements": [
            {"node": node, "units": units} for node, units in sorted(s.placements.items())
        ],
        "assignments": [
            {
                "customer": a.customer,
                "served_by": a.served_by,
                "loop_m": a.loop_m,
                "path": list(a.path),
            }
            for a in s.assignments
        ],
        "fiber_edges": [
            {"u": u, "v": v, "strands": strands}
            for (u, v), strands in sorted(s.fiber_edges.items())
        ],
        "unserved": list(s.unserved),
        "exact": s.exact,
    }
    if s.trench_edges:
        doc["tree_edges"] = [list(key) for key in s.trench_edges]
        doc["dig_total"] = s.breakdown.dig
    if s.method is not None:
        doc["method_used"] = s.method
    for key, value in s.extras.items():
        doc[key] = value
    return doc


def save_solution(s: DesignSolution, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(solution_to_dict(s), indent=2) + "\n", encoding="utf-8"
    )
