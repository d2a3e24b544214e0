# pylint: disable=missing-module-docstring
# pylint: disable=missing-class-docstring
# pylint: disable=missing-function-docstring

import pytest
from loopcutter.datagen import (
    DATASET_PRESETS,
    CitySpec,
    balanced_tree,
    build_copper_tree,
    generate_city,
    random_tree,
    scale_customers,
    scale_edges,
)
from loopcutter.dataset import Dataset, dataset_to_dict
from loopcutter.exceptions import LCInvalidArgumentError
from loopcutter.metrics import coverage
from loopcutter.model import (
    AccessGraph,
    Edge,
    EdgeCosts,
    Node,
    NodeKind,
    shortest_paths,
    validate_graph,
)


@pytest.fixture(scope="module")
def city() -> AccessGraph:
    return generate_city(CitySpec(1.0, 100, 30, seed=4))


class TestCitySpec:
    def test_presets(self):
        assert len(DATASET_PRESETS) == 12
        spec = DATASET_PRESETS["B1.0"]
        assert (spec.dimension_km, spec.target_nodes, spec.target_edges) == (1.0, 91, 188)
        assert spec.customer_count == 50
        assert DATASET_PRESETS["K4.0"].customer_count == 800

    @pytest.mark.parametrize(
        "changes",
        [
            {"customer_count": 100},
            {"candidate_fraction": 1.5},
            {"dig_per_m": -1.0},
            {"dimension_km": 0.0},
            {"target_nodes": 1},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises(LCInvalidArgumentError):
            CitySpec(1.0, 100, 30).replace(**changes)


class TestGenerateCity:
    def test_sizes(self, city: AccessGraph):
        assert len(city.nodes) == 100
        assert len(city.edges) == 200
        assert len(city.customers) == 30
        assert validate_graph(city).ok

    def test_preset_edge_target(self):
        g = generate_city(DATASET_PRESETS["B1.0"])
        assert len(g.edges) == 188
        assert len(g.customers) == 50

    def test_same_seed_same_city(self, city: AccessGraph):
        again = generate_city(CitySpec(1.0, 100, 30, seed=4))
        assert dataset_to_dict(Dataset(again)) == dataset_to_dict(Dataset(city))
        other = generate_city(CitySpec(1.0, 100, 30, seed=5))
        assert dataset_to_dict(Dataset(other)) != dataset_to_dict(Dataset(city))

    def test_costs_follow_length(self, city: AccessGraph):
        for edge in city.edges:
            assert edge.costs.length_m > 0
            assert edge.costs.dig == pytest.approx(20.0 * edge.costs.length_m)
            assert edge.costs.fiber_install == pytest.approx(0.5 * edge.costs.length_m)

    def test_nodes_stay_near_the_square(self, city: AccessGraph):
        # 10 x 10 grid over 1 km: spacing 111 m, jitter up to a quarter of it
        for node in city.nodes.values():
            assert -28.0 <= node.x_m <= 1028.0
            assert -28.0 <= node.y_m <= 1028.0

    @pytest.mark.parametrize("fraction, expected", [(0.0, 0), (1.0, 69)])
    def test_candidate_fraction(self, fraction, expected):
        g = generate_city(CitySpec(1.0, 100, 30, candidate_fraction=fraction))
        assert len(g.candidates) == expected


class TestCopperTree:
    def test_depths_are_shortest_distances(self, city: AccessGraph):
        tree = build_copper_tree(city)
        paths = shortest_paths(city, city.office)
        assert tree.root == city.office
        assert set(tree.customers) == set(city.customers)
        for customer in tree.customers:
            assert tree.depth(customer) == pytest.approx(paths[customer].distance)

    def test_leaves_are_customers(self, city: AccessGraph):
        tree = build_copper_tree(city)
        for node in tree.postorder():
            if not tree.children(node):
                assert tree.is_customer(tree.original_id(node))

    def test_ties_are_broken_by_seed(self):
        g = AccessGraph(
            [
                Node("S", NodeKind.OFFICE),
                Node("a", NodeKind.CANDIDATE),
                Node("b", NodeKind.CANDIDATE),
                Node("u", NodeKind.CUSTOMER),
            ],
            [
                Edge("S", "a", EdgeCosts(100.0)),
                Edge("S", "b", EdgeCosts(100.0)),
                Edge("a", "u", EdgeCosts(100.0)),
                Edge("b", "u", EdgeCosts(100.0)),
            ],
        )
        assert build_copper_tree(g, 3).parent("u") == build_copper_tree(g, 3).parent("u")
        assert {build_copper_tree(g, seed).parent("u") for seed in range(20)} == {"a", "b"}


class TestScaling:
    def test_scale_edges(self, city: AccessGraph, pm):
        tree = build_copper_tree(city)
        doubled = scale_edges(tree, 2.0)
        customer = tree.customers[0]
        assert doubled.depth(customer) == pytest.approx(2 * tree.depth(customer))
        fractions = [coverage(scale_edges(tree, f), pm).fraction for f in (1.0, 2.0, 4.0, 8.0)]
        assert all(b <= a for a, b in zip(fractions, fractions[1:]))
        assert scale_edges(city, 0.5).edges[0].costs.length_m == pytest.approx(
            city.edges[0].costs.length_m / 2
        )

    def test_scale_edges_needs_a_positive_factor(self, chain):
        with pytest.raises(LCInvalidArgumentError):
            scale_edges(chain, 0.0)

    def test_scale_customers(self, chain):
        grown = scale_customers(chain, 6, seed=2)
        assert len(grown.customers) == 6
        assert {"c1", "c2"} <= set(grown.customers)
        for customer in grown.customers:
            if "+" in customer:
                assert grown.parent(customer) == "A"
                assert 10.0 <= grown.parent_edge(customer).length_m <= 100.0
        assert scale_customers(chain, 2) is chain

    def test_scale_customers_cannot_shrink(self, chain):
        with pytest.raises(LCInvalidArgumentError):
            scale_customers(chain, 1)


class TestSyntheticTrees:
    def test_balanced_tree(self):
        tree = balanced_tree(20, 3, seed=1)
        assert len(tree.customers) == 20
        for node in tree.postorder():
            if not tree.children(node):
                assert tree.is_customer(node)
        bare = balanced_tree(20, 3, candidate_fraction=0.0)
        assert all(n.kind is not NodeKind.CANDIDATE for n in bare.nodes.values())

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_random_tree_depth(self, seed):
        tree = random_tree(8, seed=seed, max_depth=3)
        assert len(tree.customers) == 8
        for customer in tree.customers:
            assert len(tree.root_path(customer)) - 1 <= 3
