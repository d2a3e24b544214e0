# pylint: disable=missing-module-docstring
# pylint: disable=missing-class-docstring
# pylint: disable=missing-function-docstring

import json
from pathlib import Path
import pytest
from loopcutter.dataset import (
    Dataset,
    dataset_to_dict,
    load_dataset,
    parse_dataset,
    save_dataset,
    save_solution,
    solution_to_dict,
)
from loopcutter.exceptions import (
    LCInvalidArgumentError,
    LCNotATreeError,
    LCValidationError,
)
from loopcutter.model import AccessGraph, AccessTree, CostParams, FiberMode, NodeKind, PowerModel
from loopcutter.redesign import redesign_tree


@pytest.fixture
def document() -> dict:
    return {
        "nodes": [
            {"id": "R", "kind": "office"},
            {"id": "A", "kind": "candidate", "x_m": 1000.0},
            {"id": "c1", "kind": "customer"},
        ],
        "edges": [
            {"u": "A", "v": "R", "length_m": 1000, "fiber": 500},
            {"u": "c1", "v": "A", "length_m": 400},
        ],
        "params": {"fiber_mode": "per-strand", "rem_cost": 1500},
    }


class TestParseDataset:
    def test_parses_nodes_edges_and_params(self, document: dict):
        ds = parse_dataset(document)
        assert ds.graph.node("A").kind is NodeKind.CANDIDATE
        assert ds.graph.node("A").x_m == 1000.0
        assert ds.graph.edge_costs("R", "A").fiber_install == 500.0
        assert ds.graph.edge_costs("A", "c1").dig == 0.0
        assert ds.params.fiber_mode is FiberMode.PER_STRAND
        assert ds.params.rem_cost == 1500
        assert ds.power_model == PowerModel.desk()

    def test_tree_view(self, document: dict):
        tree = parse_dataset(document).tree()
        assert isinstance(tree, AccessTree)
        assert tree.depth("c1") == 1400.0

    def test_graph_with_cycle_is_not_a_tree(self, triangle: AccessGraph):
        with pytest.raises(LCNotATreeError):
            Dataset(triangle).tree()

    def test_missing_key(self, document: dict):
        del document["edges"][0]["length_m"]
        with pytest.raises(LCInvalidArgumentError):
            parse_dataset(document)

    def test_unknown_kind(self, document: dict):
        document["nodes"][2]["kind"] = "subscriber"
        with pytest.raises(LCInvalidArgumentError):
            parse_dataset(document)

    def test_invalid_graph_is_rejected_unless_asked(self, document: dict):
        document["edges"][1]["length_m"] = -5
        with pytest.raises(LCValidationError):
            parse_dataset(document)
        assert parse_dataset(document, validate=False).graph.edge_costs("A", "c1").length_m == -5

    @pytest.mark.parametrize(
        "key, block",
        [
            ("power_model", {"max_loop_m": 1500}),
            ("power_model", {"breakpoints": 7}),
            ("power_model", [[0, 0.1]]),
            ("params", {"capacity": 2.5}),
            ("params", {"fiber_mode": "daisy-chain"}),
            ("params", "cheap"),
        ],
    )
    def test_malformed_blocks(self, document: dict, key: str, block):
        document[key] = block
        with pytest.raises(LCInvalidArgumentError):
            parse_dataset(document)

    def test_non_convex_power_model_is_rejected(self, document: dict):
        document["power_model"] = {"breakpoints": [[0, 0.1], [500, 0.6], [1500, 0.7]]}
        with pytest.raises(LCValidationError):
            parse_dataset(document)


class TestFiles:
    def test_save_and_load(self, tmp_path: Path, triangle: AccessGraph):
        ds = Dataset(triangle, PowerModel.constant(0.3), CostParams(capacity=8))
        path = tmp_path / "triangle.json"
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert dataset_to_dict(loaded) == dataset_to_dict(ds)
        assert loaded.params.capacity == 8

    def test_bad_params_block_in_a_file(self, tmp_path: Path, document: dict):
        document["params"] = {"capacity": "fifty"}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(LCInvalidArgumentError, match="malformed dataset"):
            load_dataset(path)

    def test_not_json(self, tmp_path: Path):
        path = tmp_path / "broken.json"
        path.write_text("{nodes:", encoding="utf-8")
        with pytest.raises(LCInvalidArgumentError):
            load_dataset(path)


class TestSolutionDocument:
    def test_redesign_solution_keys(self, chain: AccessTree, pm, params):
        doc = solution_to_dict(redesign_tree(chain, pm, params))
        assert list(doc)[:4] == ["total", "scenario", "breakdown", "placements"]
        assert doc["scenario"] == "redesign"
        assert doc["placements"] == [{"node": "A", "units": 1}]
        assert doc["fiber_edges"] == [{"u": "A", "v": "R", "strands": 1}]
        assert doc["method_used"] == "dp"
        assert doc["exact"] is True
        assert "tree_edges" not in doc
        assert doc["total"] == pytest.approx(2503.6792)
        served = {a["customer"]: a for a in doc["assignments"]}
        assert served["c2"]["path"] == ["A", "c2"]

    def test_written_file_is_json(self, tmp_path: Path, chain: AccessTree, pm, params):
        path = tmp_path / "solution.json"
        save_solution(redesign_tree(chain, pm, params), path)
        assert json.loads(path.read_text(encoding="utf-8"))["breakdown"]["units_used"] == 1
