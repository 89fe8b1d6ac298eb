"""Tests for sub-tree enumeration, catalogs and q_S / q_B selection."""

import pytest
import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from subtree_bounds.bounds.catalog import (
    EnumerationMode,
    SelectionStrategy,
    best_bound_subtree,
    build_catalog,
    enumerate_subtrees,
    greedy_min_entropy,
    min_entropy_subtree,
    partition_pairs,
)
from subtree_bounds.exceptions import CapacityError, ContractError
from subtree_bounds.generators.families import InstanceGenerator
from subtree_bounds.model.junction import check_subtree
from subtree_bounds.model.models import JunctionGraph
from subtree_bounds.utils.config import GeneratorConfig


def _identifiers(subtrees):
    return [subtree.identifier for subtree in subtrees]


class TestEnumerateSubtrees:
    """Tests for enumerate_subtrees."""

    def test_triangle_spanning_family(self, triangle_graph):
        """Test that the triangle's largest sub-trees are its three two-kernel chains."""
        subtrees = enumerate_subtrees(triangle_graph)
        assert _identifiers(subtrees) == ["v[0,1]e[0]", "v[0,2]e[1]", "v[1,2]e[2]"]

    def test_triangle_exhaustive_family(self, triangle_graph):
        """Test that exhaustive mode adds the single-kernel sub-trees."""
        subtrees = enumerate_subtrees(triangle_graph, EnumerationMode.EXHAUSTIVE)
        assert _identifiers(subtrees) == [
            "v[0]e[]", "v[0,1]e[0]", "v[0,2]e[1]",
            "v[1]e[]", "v[1,2]e[2]", "v[2]e[]",
        ]

    def test_four_cycle_spanning_family(self):
        """Test that a four-cycle's largest sub-trees are its four three-kernel paths."""
        document = InstanceGenerator(GeneratorConfig()).generate("cycle(4)", 0)
        subtrees = enumerate_subtrees(document.graph)

        assert len(subtrees) == 4
        assert all(len(s.vertex_subset) == 3 and len(s.edge_subset) == 2 for s in subtrees)

    def test_tree_spanning_family_is_the_tree(self, chain_graph):
        """Test that a junction tree's spanning family is the whole tree."""
        subtrees = enumerate_subtrees(chain_graph)

        assert len(subtrees) == 1
        assert subtrees[0].vertex_subset == chain_graph.vertex_ids

    def test_every_result_is_a_subtree(self):
        """Test that enumerated restrictions pass the sub-tree check."""
        document = InstanceGenerator(GeneratorConfig()).generate("grid(2,3)", 1)
        for subtree in enumerate_subtrees(document.graph, EnumerationMode.EXHAUSTIVE):
            assert check_subtree(document.graph, subtree.vertex_subset, subtree.edge_subset) is None

    def test_min_vertices(self, triangle_graph):
        """Test that exhaustive enumeration honours the lower size limit."""
        subtrees = enumerate_subtrees(triangle_graph, EnumerationMode.EXHAUSTIVE, min_vertices=2)
        assert len(subtrees) == 3

    def test_vertex_cap(self, triangle_graph):
        """Test that exhaustive enumeration refuses graphs above max_vertices."""
        with pytest.raises(CapacityError):
            enumerate_subtrees(triangle_graph, EnumerationMode.EXHAUSTIVE, max_vertices=2)

    def test_combination_cap(self, triangle_graph):
        """Test that examining too many vertex subsets raises CapacityError."""
        with pytest.raises(CapacityError):
            enumerate_subtrees(triangle_graph, EnumerationMode.EXHAUSTIVE, max_combinations=2)

    def test_broken_graph(self, triangle_graph):
        """Test that a graph breaking the junction property is refused."""
        broken = JunctionGraph(triangle_graph.vertex_labels, triangle_graph.edges[:2])
        with pytest.raises(ContractError):
            enumerate_subtrees(broken)


class TestCatalog:
    """Tests for catalogs and the flagged entries."""

    def test_ties_go_to_first_entry(self, triangle_problem, triangle_graph):
        """Test that the symmetric triangle flags its first chain for both roles."""
        catalog = build_catalog(triangle_problem, triangle_graph)

        assert len(catalog) == 3
        assert catalog.min_entropy_index == 0
        assert catalog.best_bound_index == 0
        assert catalog.min_entropy.lower_bound == pytest.approx(3.27546, abs=1e-5)

    def test_by_bound_is_descending(self):
        """Test that by_bound orders entries by L, largest first."""
        document = InstanceGenerator(GeneratorConfig()).generate("grid(2,3)", 4)
        catalog = build_catalog(document.problem, document.graph, EnumerationMode.EXHAUSTIVE)
        bounds = [entry.lower_bound for _, entry in catalog.by_bound()]

        assert bounds == sorted(bounds, reverse=True)
        assert catalog.by_bound()[0][0] == catalog.best_bound_index

    def test_min_entropy_is_minimal(self):
        """Test that the flagged q_S has the smallest entropy in the catalog."""
        document = InstanceGenerator(GeneratorConfig()).generate("grid(2,2)", 2)
        catalog = build_catalog(document.problem, document.graph, EnumerationMode.EXHAUSTIVE)

        assert catalog.min_entropy.entropy <= min(e.entropy for e in catalog.entries) + 1e-12

    def test_partition_pairs(self, triangle_graph):
        """Test that each single kernel pairs with the chain of the other two."""
        family = enumerate_subtrees(triangle_graph, EnumerationMode.EXHAUSTIVE)
        pairs = partition_pairs(family)

        assert len(pairs) == 3
        for i, j in pairs:
            kernels = set(family[i].kernel_subset) | set(family[j].kernel_subset)
            assert kernels == {0, 1, 2}
            assert not set(family[i].kernel_subset) & set(family[j].kernel_subset)

    def test_spanning_family_has_no_partitions(self, triangle_graph):
        """Test that overlapping chains never partition the kernels."""
        assert partition_pairs(enumerate_subtrees(triangle_graph)) == []


class TestSelection:
    """Tests for q_S / q_B selection."""

    def test_greedy_on_triangle(self, triangle_problem, triangle_graph):
        """Test that the greedy search ends on one of the triangle's chains."""
        subtree, estimate = greedy_min_entropy(triangle_problem, triangle_graph)
        catalog = build_catalog(triangle_problem, triangle_graph)

        assert subtree.identifier in {"v[0,1]e[0]", "v[0,2]e[1]", "v[1,2]e[2]"}
        assert estimate == pytest.approx(catalog.min_entropy.entropy, abs=1e-9)

    def test_greedy_on_grid_returns_valid_subtree(self):
        """Test that the greedy result on a loopy grid is a sub-junction-tree."""
        document = InstanceGenerator(GeneratorConfig()).generate("grid(2,3)", 0)
        subtree, estimate = greedy_min_entropy(document.problem, document.graph)

        assert check_subtree(document.graph, subtree.vertex_subset, subtree.edge_subset) is None
        assert estimate >= 0.0

    def test_greedy_stays_in_spanning_family(self):
        """Test that a vertex floor keeps the greedy result among the largest sub-trees."""
        document = InstanceGenerator(GeneratorConfig()).generate("grid(2,3)", 0)
        catalog = build_catalog(document.problem, document.graph)
        size = len(catalog.entries[0].subtree.vertex_subset)

        subtree, estimate = greedy_min_entropy(document.problem, document.graph, min_vertices=size)

        assert subtree.key in {entry.subtree.key for entry in catalog.entries}
        assert estimate >= catalog.min_entropy.entropy - 1e-9

    @pytest.mark.parametrize("seed", range(15))
    @pytest.mark.parametrize("family", ["grid(2,3)", "cycle(5)"])
    def test_greedy_never_beats_family_minimum(self, family, seed):
        """Test H(greedy) ≥ the minimum entropy of the family it is compared with."""
        document = InstanceGenerator(GeneratorConfig()).generate(family, seed)
        problem, graph = document.problem, document.graph

        spanning = build_catalog(problem, graph, EnumerationMode.SPANNING)
        floor = len(spanning.entries[0].subtree.vertex_subset)
        _, estimate = greedy_min_entropy(problem, graph, min_vertices=floor)
        assert estimate >= spanning.min_entropy.entropy - 1e-9

        exhaustive = build_catalog(problem, graph, EnumerationMode.EXHAUSTIVE)
        _, estimate = greedy_min_entropy(problem, graph)
        assert estimate >= exhaustive.min_entropy.entropy - 1e-9

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(5))
    def test_greedy_on_large_grid(self, seed):
        """Test the spanning-family comparison on 3x3 grids."""
        document = InstanceGenerator(GeneratorConfig()).generate("grid(3,3)", seed)
        spanning = build_catalog(document.problem, document.graph)
        floor = len(spanning.entries[0].subtree.vertex_subset)

        subtree, estimate = greedy_min_entropy(document.problem, document.graph, min_vertices=floor)

        assert len(subtree.vertex_subset) == floor
        assert estimate >= spanning.min_entropy.entropy - 1e-9

    def test_greedy_vertex_floor_range(self, triangle_problem, triangle_graph):
        """Test that the vertex floor must lie between 1 and the vertex count."""
        with pytest.raises(ContractError):
            greedy_min_entropy(triangle_problem, triangle_graph, min_vertices=0)
        with pytest.raises(ContractError):
            greedy_min_entropy(triangle_problem, triangle_graph, min_vertices=4)


    def test_greedy_strategy_dispatch(self, triangle_problem, triangle_graph):
        """Test that min_entropy_subtree delegates to the greedy search."""
        greedy = min_entropy_subtree(triangle_problem, triangle_graph, SelectionStrategy.GREEDY)
        direct = greedy_min_entropy(triangle_problem, triangle_graph)
        assert greedy[0].key == direct[0].key

    def test_tree_selections(self, chain_problem, chain_graph):
        """Test that on a junction tree both selections are the whole tree."""
        source, entropy = min_entropy_subtree(chain_problem, chain_graph)
        best, bound = best_bound_subtree(chain_problem, chain_graph)

        assert source.vertex_subset == chain_graph.vertex_ids
        assert best.key == source.key
        assert entropy > 0.0
