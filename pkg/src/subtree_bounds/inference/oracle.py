"""Brute-force ground truth over the full joint state space.

Every quantity here enumerates all assignments, so inputs are capped by
``max_states`` (2**22 by default). Sums over tables larger than
``COMPENSATED_THRESHOLD`` entries are exactly rounded and taken in row-major
order, so results do not depend on how the sweep is split.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.special import entr, logsumexp, rel_entr

from ..exceptions import CapacityError, DegenerateModelError, InvalidModelError, StructuralError
from ..model.models import InferenceProblem, Kernel

logger = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 2 ** 22
COMPENSATED_THRESHOLD = 2 ** 12
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DenseDistribution:
    """Explicit joint table over all variables, one axis per variable."""

    cardinalities: Tuple[int, ...]
    probs: np.ndarray
    log_norm: float

    def __post_init__(self):
        cardinalities = tuple(int(c) for c in self.cardinalities)
        probs = np.array(self.probs, dtype=float)
        if probs.shape != cardinalities:
            raise StructuralError(
                f"Distribution table shape {probs.shape} does not match {cardinalities}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidModelError("Distribution entries must be finite and non-negative")
        total = compensated_sum(probs)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidModelError(f"Distribution sums to {total!r}, not 1")
        if not math.isfinite(self.log_norm):
            raise InvalidModelError("Distribution log_norm must be finite")
        probs.setflags(write=False)
        object.__setattr__(self, "cardinalities", cardinalities)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "log_norm", float(self.log_norm))

    @property
    def num_vars(self) -> int:
        return len(self.cardinalities)

    def prob(self, assignment: Sequence[int]) -> float:
        return float(self.probs[tuple(int(x) for x in assignment)])

    @classmethod
    def uniform(cls, cardinalities: Sequence[int]) -> "DenseDistribution":
        cardinalities = tuple(int(c) for c in cardinalities)
        size = math.prod(cardinalities)
        return cls(cardinalities, np.full(cardinalities, 1.0 / size), math.log(size))


def compensated_sum(values: np.ndarray, threshold: int = COMPENSATED_THRESHOLD) -> float:
    """Sum in row-major order, exactly rounded above ``threshold`` entries."""
    flat = np.asarray(values, dtype=float).ravel()
    if flat.size > threshold:
        return math.fsum(flat.tolist())
    return float(np.sum(flat))


def check_capacity(cardinalities: Sequence[int], max_states: int = DEFAULT_MAX_STATES) -> int:
    """Return the state count, raising CapacityError above ``max_states``."""
    states = math.prod(int(c) for c in cardinalities)
    if states > max_states:
        raise CapacityError(
            f"Joint state space has {states} states, above the cap of {max_states}"
        )
    return states


def _broadcast_shape(scope: Sequence[int], cardinalities: Sequence[int]) -> Tuple[int, ...]:
    members = set(scope)
    return tuple(card if var in members else 1 for var, card in enumerate(cardinalities))


def log_joint_table(
    cardinalities: Sequence[int],
    kernels: Iterable[Kernel],
    max_states: int = DEFAULT_MAX_STATES
) -> np.ndarray:
    """Log of the kernel product at every assignment (−inf where it is zero)."""
    cardinalities = tuple(int(c) for c in cardinalities)
    check_capacity(cardinalities, max_states)
    log_joint = np.zeros(cardinalities)
    with np.errstate(divide="ignore"):
        for kernel in kernels:
            log_joint = log_joint + np.log(kernel.table).reshape(
                _broadcast_shape(kernel.scope, cardinalities)
            )
    return log_joint


def _log_sum(log_values: np.ndarray) -> float:
    finite = np.isfinite(log_values)
    if not finite.any():
        raise DegenerateModelError("Every assignment has zero mass")
    if log_values.size <= COMPENSATED_THRESHOLD:
        return float(logsumexp(log_values[finite]))
    peak = float(log_values[finite].max())
    return peak + math.log(compensated_sum(np.exp(log_values[finite] - peak)))


def log_partition_of(
    cardinalities: Sequence[int],
    kernels: Iterable[Kernel],
    max_states: int = DEFAULT_MAX_STATES
) -> float:
    """ln of the kernel product summed over every assignment of all variables."""
    return _log_sum(log_joint_table(cardinalities, kernels, max_states))


def joint_of_kernels(
    cardinalities: Sequence[int],
    kernels: Iterable[Kernel],
    max_states: int = DEFAULT_MAX_STATES
) -> DenseDistribution:
    """Normalized product of ``kernels`` over all variables.

    Variables outside every scope come out uniform; an empty collection gives
    the uniform distribution.
    """
    log_joint = log_joint_table(cardinalities, kernels, max_states)
    log_norm = _log_sum(log_joint)
    probs = np.exp(log_joint - log_norm)
    probs /= compensated_sum(probs)
    return DenseDistribution(tuple(cardinalities), probs, log_norm)


def brute_force_log_partition(
    problem: InferenceProblem,
    max_states: int = DEFAULT_MAX_STATES
) -> float:
    """
    Exact ln Z by enumeration.

    Raises:
        CapacityError: If the state space exceeds ``max_states``
        DegenerateModelError: If every assignment has a zero product
    """
    return log_partition_of(problem.cardinalities, problem.kernels, max_states)


def restricted_log_partition(
    problem: InferenceProblem,
    kernel_indices: Iterable[int],
    max_states: int = DEFAULT_MAX_STATES
) -> float:
    """ln Z of the sub-collection of kernels, over the variables they touch."""
    kernel_indices = tuple(kernel_indices)
    full = log_partition_of(
        problem.cardinalities, problem.kernel_subset(kernel_indices), max_states
    )
    return full - problem.untouched_log_volume(kernel_indices)


def joint_distribution(
    problem: InferenceProblem,
    max_states: int = DEFAULT_MAX_STATES
) -> DenseDistribution:
    """p(x) = ∏ α_R(x_R) / Z as a dense table, with log_norm = ln Z."""
    return joint_of_kernels(problem.cardinalities, problem.kernels, max_states)


def marginalize(dist: DenseDistribution, scope: Iterable[int]) -> np.ndarray:
    """Marginal table over ``scope`` (axes in increasing variable order)."""
    scope = sorted(set(int(i) for i in scope))
    for var in scope:
        if not 0 <= var < dist.num_vars:
            raise StructuralError(f"Variable {var} is outside the distribution")
    others = tuple(axis for axis in range(dist.num_vars) if axis not in scope)
    return dist.probs.sum(axis=others)


def brute_force_marginal(
    problem: InferenceProblem,
    scope: Iterable[int],
    max_states: int = DEFAULT_MAX_STATES
) -> np.ndarray:
    """Exact marginal p_R(x_R) over ``scope``."""
    return marginalize(joint_distribution(problem, max_states), scope)


def entropy(dist: DenseDistribution) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0."""
    return max(0.0, compensated_sum(entr(dist.probs)))


def kl_divergence(p: DenseDistribution, q: DenseDistribution) -> float:
    """
    D(p||q) in nats; +inf when p puts mass where q has none.

    Raises:
        StructuralError: If the two tables have different shapes
    """
    if p.cardinalities != q.cardinalities:
        raise StructuralError(
            f"Cannot compare distributions over {p.cardinalities} and {q.cardinalities}"
        )
    terms = rel_entr(p.probs, q.probs)
    if np.isinf(terms).any():
        return math.inf
    return max(0.0, compensated_sum(terms))


def expected_log_marginal(marginal: np.ndarray, kernel: Kernel) -> float:
    """Σ m(x_R) ln α(x_R) for a marginal table already laid out like the kernel."""
    marginal = np.asarray(marginal, dtype=float)
    if marginal.shape != kernel.shape:
        raise StructuralError(
            f"Marginal shape {marginal.shape} does not match kernel shape {kernel.shape}"
        )
    support = marginal > 0
    if np.any(kernel.table[support] == 0):
        return -math.inf
    return compensated_sum(marginal[support] * np.log(kernel.table[support]))


def expected_log_kernel(dist: DenseDistribution, kernel: Kernel) -> float:
    """E_dist[ln α(x_R)], −inf iff dist puts mass on a zero of the kernel."""
    return expected_log_marginal(marginalize(dist, kernel.scope), kernel)
