"""Tests for GDL message passing on junction trees and loopy graphs."""

import itertools
import math
import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from subtree_bounds.exceptions import ContractError, StructuralError
from subtree_bounds.inference.gdl import (
    Schedule,
    beliefs_from_messages,
    calibrate,
    run_gdl,
    tree_entropy,
    tree_joint_eval,
    tree_log_partition,
    tree_marginal,
)
from subtree_bounds.inference.oracle import (
    brute_force_log_partition,
    brute_force_marginal,
    entropy,
    joint_distribution,
    joint_of_kernels,
    marginalize,
)
from subtree_bounds.model.junction import extract_subtree
from subtree_bounds.generators.families import InstanceGenerator
from subtree_bounds.model.models import Edge, InferenceProblem, JunctionGraph, Kernel
from subtree_bounds.utils.config import GeneratorConfig


class TestTreeExact:
    """Tests for the two-sweep schedule."""

    def test_log_partition_matches_oracle(self, chain_problem, chain_graph):
        """Test that ln Z from beliefs equals enumeration on a junction tree."""
        beliefs = calibrate(chain_problem, chain_graph)
        assert beliefs.log_partition == pytest.approx(brute_force_log_partition(chain_problem), abs=1e-9)

    def test_message_count(self, chain_problem, chain_graph):
        """Test that a tree on N vertices needs 2(N-1) message computations."""
        messages = run_gdl(chain_problem, chain_graph)

        assert messages.computations == 2 * (chain_graph.num_vertices - 1)
        assert messages.root == 0
        assert len(messages.messages) == 2 * len(chain_graph.edges)

    def test_vertex_beliefs_are_marginals(self, chain_problem, chain_graph):
        """Test that calibrated vertex beliefs equal exact marginals."""
        beliefs = calibrate(chain_problem, chain_graph)
        for vertex in chain_graph.vertex_ids:
            exact = brute_force_marginal(chain_problem, chain_graph.label(vertex))
            np.testing.assert_allclose(beliefs.vertex_beliefs[vertex], exact, atol=1e-12)

    def test_unnormalized_messages_agree(self, chain_problem, chain_graph):
        """Test that disabling message normalization gives the same ln Z."""
        plain = calibrate(chain_problem, chain_graph, normalize=False)
        scaled = calibrate(chain_problem, chain_graph)
        assert plain.log_partition == pytest.approx(scaled.log_partition, abs=1e-12)

    def test_entropy_matches_oracle(self, chain_problem, chain_graph):
        """Test that the tree entropy equals the entropy of the joint."""
        beliefs = calibrate(chain_problem, chain_graph)
        expected = entropy(joint_distribution(chain_problem))
        assert tree_entropy(beliefs, chain_graph) == pytest.approx(expected, abs=1e-9)

    def test_joint_eval(self, chain_problem, chain_graph):
        """Test that the belief ratio reproduces every joint probability."""
        beliefs = calibrate(chain_problem, chain_graph)
        dist = joint_distribution(chain_problem)
        for assignment in itertools.product(*(range(c) for c in chain_problem.cardinalities)):
            assert tree_joint_eval(beliefs, chain_graph, assignment) == pytest.approx(
                dist.prob(assignment), abs=1e-12
            )

    def test_loopy_graph_rejected(self, triangle_problem, triangle_graph):
        """Test that the exact schedule refuses a graph with a cycle."""
        with pytest.raises(ContractError):
            run_gdl(triangle_problem, triangle_graph)

    def test_label_must_match_scope(self, chain_problem):
        """Test that a vertex label differing from its kernel scope is a structural error."""
        graph = JunctionGraph(((0, 1), (1,), (2, 3), (3,)), (Edge(0, 1, (1,)),))
        with pytest.raises(StructuralError):
            run_gdl(chain_problem, extract_subtree(graph, [0, 1], [0]))


class TestSubtreeInference:
    """Tests for inference restricted to a sub-tree."""

    def test_triangle_subtree_partition(self, triangle_problem, triangle_graph):
        """Test that two agreement kernels on a chain give Z_T = 18."""
        subtree = extract_subtree(triangle_graph, [0, 1], [0])
        result = tree_log_partition(triangle_problem, subtree)

        assert result.value == pytest.approx(math.log(18), abs=1e-12)
        assert not result.degenerate

    def test_degenerate_subtree(self, triangle_problem, triangle_graph):
        """Test that a zero kernel inside the sub-tree gives a flagged ln Z_T = -inf."""
        problem = triangle_problem.with_kernel(0, Kernel((0, 1), np.zeros((2, 2))))
        subtree = extract_subtree(triangle_graph, [0, 1], [0])
        result = tree_log_partition(problem, subtree)

        assert result.value == -math.inf
        assert result.degenerate
        assert float(result) == -math.inf

    def test_tree_marginal_with_outside_variable(self, triangle_problem, triangle_graph):
        """Test elimination over a sub-tree, variables outside it being uniform."""
        subtree = extract_subtree(triangle_graph, [1], [])
        beliefs = calibrate(triangle_problem, subtree)
        q_t = joint_of_kernels(triangle_problem.cardinalities, triangle_problem.kernel_subset([1]))

        marginal = tree_marginal(beliefs, subtree, (0, 2), triangle_problem.cardinalities)

        np.testing.assert_allclose(marginal, marginalize(q_t, (0, 2)), atol=1e-12)
        np.testing.assert_allclose(marginal, np.full((2, 2), 0.25), atol=1e-12)

    def test_tree_marginal_across_vertices(self, chain_problem, chain_graph):
        """Test elimination for a scope spread over several vertices."""
        beliefs = calibrate(chain_problem, chain_graph)
        marginal = tree_marginal(beliefs, chain_graph, (0, 3), chain_problem.cardinalities)
        np.testing.assert_allclose(marginal, brute_force_marginal(chain_problem, (0, 3)), atol=1e-12)


class TestSynchronous:
    """Tests for the loopy (synchronous) schedule."""

    def test_converges_to_exact_on_tree(self, chain_problem, chain_graph):
        """Test that parallel updates reach the exact beliefs on a tree."""
        messages = run_gdl(chain_problem, chain_graph, Schedule.synchronous(max_iters=50))
        beliefs = beliefs_from_messages(chain_problem, chain_graph, messages)

        assert messages.converged
        for vertex in chain_graph.vertex_ids:
            exact = brute_force_marginal(chain_problem, chain_graph.label(vertex))
            np.testing.assert_allclose(beliefs.vertex_beliefs[vertex], exact, atol=1e-8)

    def test_loopy_beliefs_have_no_partition(self, triangle_problem, triangle_graph):
        """Test that loopy beliefs are normalized but carry no ln Z."""
        messages = run_gdl(triangle_problem, triangle_graph, Schedule.synchronous())
        beliefs = beliefs_from_messages(triangle_problem, triangle_graph, messages)

        assert beliefs.log_partition is None
        for belief in beliefs.vertex_beliefs.values():
            assert belief.sum() == pytest.approx(1.0)

    def test_synchronous_requires_normalization(self, triangle_problem, triangle_graph):
        """Test that unnormalized loopy updates are refused."""
        with pytest.raises(ContractError):
            run_gdl(triangle_problem, triangle_graph, Schedule.synchronous(), normalize=False)

    def test_unknown_schedule(self):
        """Test that an unknown schedule kind is rejected."""
        with pytest.raises(ValueError):
            Schedule("random")

    def test_non_convergence_is_reported(self):
        """Test that hitting max_iters leaves converged False."""
        kernels = tuple(Kernel(scope, np.array([[5.0, 0.1], [0.1, 5.0]])) for scope in [(0, 1), (1, 2), (0, 2)])
        problem = InferenceProblem((2, 2, 2), kernels)
        graph = JunctionGraph.for_problem(problem, (Edge(0, 1, (1,)), Edge(0, 2, (0,)), Edge(1, 2, (2,))))

        messages = run_gdl(problem, graph, Schedule.synchronous(max_iters=1, tol=0.0))
        assert not messages.converged
        assert messages.iterations == 1


class TestGeneratedJunctionTrees:
    """Tests of exact message passing against enumeration on generated junction trees."""

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_oracle(self, seed):
        """Test beliefs, ln Z_T and entropy against enumeration within 1e-9."""
        family = f"random_junction({3 + seed % 6},3,10)"
        document = InstanceGenerator(GeneratorConfig()).generate(family, seed)
        problem, graph = document.problem, document.graph
        assert problem.num_vars <= 10

        beliefs = calibrate(problem, graph)
        dist = joint_distribution(problem)
        for vertex in graph.vertex_ids:
            exact = marginalize(dist, graph.label(vertex))
            np.testing.assert_allclose(beliefs.vertex_beliefs[vertex], exact, atol=1e-9)

        result = tree_log_partition(problem, graph)
        assert not result.degenerate
        assert result.value == pytest.approx(dist.log_norm, abs=1e-9 * max(1.0, abs(dist.log_norm)))
        assert tree_entropy(beliefs, graph) == pytest.approx(entropy(dist), abs=1e-9)
        assert beliefs.log_partition == pytest.approx(brute_force_log_partition(problem), abs=1e-9)
