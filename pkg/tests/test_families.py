"""Tests for the seeded instance families."""

import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from subtree_bounds.generators.families import FamilySpec, InstanceGenerator, chain_junction_graph
from subtree_bounds.model.junction import is_junction_tree, validate_junction_graph
from subtree_bounds.utils.config import GeneratorConfig


@pytest.fixture
def generator():
    return InstanceGenerator(GeneratorConfig())


class TestFamilySpec:
    """Tests for family expressions."""

    def test_parse_grid(self):
        """Test parsing a grid with its two size arguments."""
        spec = FamilySpec.parse("grid(3, 4)")
        assert spec.name == "grid"
        assert spec.int_arg(0) == 3 and spec.int_arg(1) == 4
        assert str(spec) == "grid(3,4)"

    def test_parse_optional_coupling(self):
        """Test that coupling bounds may follow the size arguments."""
        spec = FamilySpec.parse("cycle(5,0.5,2)")
        assert spec.args == (5.0, 0.5, 2.0)
        assert str(spec) == "cycle(5,0.5,2.0)"

    @pytest.mark.parametrize("text", ["ladder(3)", "grid(3)", "grid(2,x)", "cycle(2.5)", "grid"])
    def test_invalid_expressions(self, text):
        """Test that malformed family expressions raise ValueError."""
        with pytest.raises(ValueError):
            FamilySpec.parse(text)


class TestInstanceGenerator:
    """Tests for InstanceGenerator."""

    def test_same_seed_same_instance(self, generator):
        """Test that generation is a pure function of family and seed."""
        first = generator.generate("grid(2,3)", 11)
        second = generator.generate("grid(2,3)", 11)
        for a, b in zip(first.problem.kernels, second.problem.kernels):
            np.testing.assert_array_equal(a.table, b.table)

    def test_different_seeds_differ(self, generator):
        """Test that different seeds give different tables."""
        first = generator.generate("grid(2,3)", 1)
        second = generator.generate("grid(2,3)", 2)
        assert not np.array_equal(first.problem.kernels[0].table, second.problem.kernels[0].table)

    def test_grid_shape(self, generator):
        """Test the variable and kernel counts of a grid."""
        document = generator.generate("grid(2,3)", 0)

        assert document.problem.num_vars == 6
        assert document.problem.num_kernels == 7
        assert document.problem.name == "grid_2x3"
        assert document.metadata == {"family": "grid(2,3)", "seed": 0}
        assert validate_junction_graph(document.problem, document.graph).ok

    def test_cycle_graph(self, generator):
        """Test that cycle(3) reproduces the triangle junction graph."""
        document = generator.generate("cycle(3)", 0)

        assert [k.scope for k in document.problem.kernels] == [(0, 1), (1, 2), (0, 2)]
        assert [(e.u, e.v, e.label) for e in document.graph.edges] == [
            (0, 1, (1,)), (0, 2, (0,)), (1, 2, (2,))
        ]

    def test_cycle_too_short(self, generator):
        """Test that a cycle needs three variables."""
        with pytest.raises(ValueError):
            generator.generate("cycle(2)", 0)

    def test_coupling_range(self, generator):
        """Test that kernel entries stay inside the requested range."""
        document = generator.generate("cycle(6,0.5,2)", 3)
        for kernel in document.problem.kernels:
            assert np.all(kernel.table >= 0.5 - 1e-12)
            assert np.all(kernel.table <= 2.0 + 1e-12)

    @pytest.mark.parametrize("seed", range(100))
    def test_random_junction_is_tree(self, generator, seed):
        """Test that random_junction instances are valid junction trees."""
        document = generator.generate("random_junction(6,3)", seed)

        assert document.problem.num_kernels == 6
        assert is_junction_tree(document.graph)
        assert validate_junction_graph(document.problem, document.graph).ok

    def test_random_junction_variable_cap(self, generator):
        """Test that max_vars bounds the number of variables."""
        document = generator.generate("random_junction(8,3,4)", 0)
        assert document.problem.num_vars <= 4

    def test_zeros_keep_first_cell(self):
        """Test that zero injection never clears the first cell of a table."""
        generator = InstanceGenerator(GeneratorConfig(allow_zeros=True, zero_probability=0.9))
        document = generator.generate("grid(3,3)", 0)

        assert any(np.any(k.table == 0) for k in document.problem.kernels)
        assert all(k.table[0, 0] > 0 for k in document.problem.kernels)

    def test_cardinality(self):
        """Test that the configured cardinality applies to every variable."""
        document = InstanceGenerator(GeneratorConfig(cardinality=3)).generate("grid(2,2)", 0)
        assert document.problem.cardinalities == (3, 3, 3, 3)


class TestChainJunctionGraph:
    """Tests for chain_junction_graph."""

    def test_shared_pairs_merge_labels(self, triangle_problem):
        """Test that kernels sharing two variables get one edge carrying both."""
        problem = triangle_problem.with_kernel(1, triangle_problem.kernels[0])
        graph = chain_junction_graph(problem)

        assert [(e.u, e.v, e.label) for e in graph.edges] == [(0, 1, (0, 1)), (1, 2, (0,))]
        assert validate_junction_graph(problem, graph).ok
