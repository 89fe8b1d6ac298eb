"""Tests for the brute-force enumeration oracle."""

import math
import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from subtree_bounds.exceptions import CapacityError, DegenerateModelError, StructuralError
from subtree_bounds.inference.oracle import (
    COMPENSATED_THRESHOLD,
    DenseDistribution,
    brute_force_log_partition,
    brute_force_marginal,
    compensated_sum,
    entropy,
    expected_log_kernel,
    joint_distribution,
    joint_of_kernels,
    kl_divergence,
    restricted_log_partition,
)
from subtree_bounds.generators.families import InstanceGenerator
from subtree_bounds.model.models import InferenceProblem, Kernel
from subtree_bounds.utils.config import GeneratorConfig


class TestLogPartition:
    """Tests for exact ln Z by enumeration."""

    def test_triangle(self, triangle_problem):
        """Test that the agreement triangle has Z = 28."""
        assert brute_force_log_partition(triangle_problem) == pytest.approx(math.log(28), abs=1e-12)

    def test_restricted_to_two_kernels(self, triangle_problem):
        """Test that two triangle kernels have Z = 18 over the variables they touch."""
        assert restricted_log_partition(triangle_problem, [0, 1]) == pytest.approx(math.log(18))

    def test_restricted_to_one_kernel(self, triangle_problem):
        """Test that a single kernel is normalized over its own scope only."""
        assert restricted_log_partition(triangle_problem, [2]) == pytest.approx(math.log(6))

    def test_capacity_checked_before_allocation(self):
        """Test that an oversized state space raises CapacityError."""
        kernels = tuple(Kernel((i,), np.ones(2)) for i in range(23))
        problem = InferenceProblem((2,) * 23, kernels)

        with pytest.raises(CapacityError):
            brute_force_log_partition(problem)

    def test_capacity_respects_custom_cap(self, triangle_problem):
        """Test that the cap is configurable."""
        with pytest.raises(CapacityError):
            brute_force_log_partition(triangle_problem, max_states=4)

    def test_degenerate_model(self):
        """Test that an all-zero product raises DegenerateModelError."""
        problem = InferenceProblem((2,), (Kernel((0,), np.array([0.0, 0.0])),))
        with pytest.raises(DegenerateModelError):
            brute_force_log_partition(problem)

    def test_large_values_stay_finite(self):
        """Test that huge kernel entries do not overflow."""
        kernels = tuple(Kernel((i,), np.array([1e300, 1e300])) for i in range(4))
        problem = InferenceProblem((2,) * 4, kernels)

        assert brute_force_log_partition(problem) == pytest.approx(4 * (math.log(1e300) + math.log(2)))

    @pytest.mark.parametrize("scale", [0.125, 3.0, 1e6])
    @pytest.mark.parametrize("seed", range(10))
    def test_scaling_a_kernel_shifts_log_partition(self, seed, scale):
        """Test that multiplying one kernel by c adds ln c to ln Z."""
        problem = InstanceGenerator(GeneratorConfig()).generate("grid(2,3)", seed).problem
        index = seed % problem.num_kernels
        kernel = problem.kernels[index]
        scaled = problem.with_kernel(index, Kernel(kernel.scope, kernel.table * scale))

        assert brute_force_log_partition(scaled) == pytest.approx(
            brute_force_log_partition(problem) + math.log(scale), abs=1e-9
        )


class TestDistributions:
    """Tests for dense distributions and information measures."""

    def test_joint_sums_to_one(self, chain_problem):
        """Test that the joint table is normalized."""
        dist = joint_distribution(chain_problem)
        assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert dist.log_norm == pytest.approx(brute_force_log_partition(chain_problem))

    def test_triangle_marginal_is_uniform(self, triangle_problem):
        """Test that the symmetric triangle has uniform single-variable marginals."""
        np.testing.assert_allclose(brute_force_marginal(triangle_problem, [1]), [0.5, 0.5])

    def test_marginal_axes_follow_variable_order(self, chain_problem):
        """Test that a pair marginal is laid out in increasing variable order."""
        pair = brute_force_marginal(chain_problem, [2, 1])
        assert pair.shape == (3, 2)

    def test_uniform_entropy(self):
        """Test that the uniform distribution over 8 states has entropy ln 8."""
        assert entropy(DenseDistribution.uniform((2, 2, 2))) == pytest.approx(math.log(8))

    def test_divergence_to_self_is_zero(self, triangle_problem):
        """Test D(p||p) = 0."""
        p = joint_distribution(triangle_problem)
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_divergence_infinite_off_support(self):
        """Test that mass where the reference has none gives +inf."""
        cards = (2,)
        p = DenseDistribution.uniform(cards)
        q = joint_of_kernels(cards, [Kernel((0,), np.array([1.0, 0.0]))])

        assert kl_divergence(p, q) == math.inf
        assert kl_divergence(q, p) == pytest.approx(math.log(2))

    def test_divergence_shape_mismatch(self):
        """Test that distributions over different spaces cannot be compared."""
        with pytest.raises(StructuralError):
            kl_divergence(DenseDistribution.uniform((2,)), DenseDistribution.uniform((3,)))

    def test_empty_kernel_collection_is_uniform(self):
        """Test that the empty product normalizes to the uniform distribution."""
        dist = joint_of_kernels((2, 3), [])
        np.testing.assert_allclose(dist.probs, np.full((2, 3), 1 / 6))
        assert dist.log_norm == pytest.approx(math.log(6))

    def test_expected_log_kernel_hits_zero(self):
        """Test that E[ln α] is -inf when the distribution charges a zero of α."""
        uniform = DenseDistribution.uniform((2, 2))
        kernel = Kernel((0, 1), np.array([[1.0, 0.0], [1.0, 1.0]]))
        assert expected_log_kernel(uniform, kernel) == -math.inf

    def test_expected_log_kernel_ignores_unreached_zero(self):
        """Test that zeros outside the support do not matter (0 ln 0 = 0)."""
        dist = joint_of_kernels((2,), [Kernel((0,), np.array([1.0, 0.0]))])
        kernel = Kernel((0,), np.array([math.e, 0.0]))
        assert expected_log_kernel(dist, kernel) == pytest.approx(1.0)


class TestCompensatedSum:
    """Tests for the summation helper."""

    def test_large_sums_are_exactly_rounded(self):
        """Test that sums above the threshold match math.fsum."""
        values = np.full(COMPENSATED_THRESHOLD + 1, 0.1)
        assert compensated_sum(values) == math.fsum(values.tolist())

    def test_small_sums(self):
        """Test that small sums are plain sums."""
        assert compensated_sum(np.array([1.0, 2.0, 3.0])) == 6.0
