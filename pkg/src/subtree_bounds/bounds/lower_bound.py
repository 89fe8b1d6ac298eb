"""Sub-tree lower bounds on ln Z and the divergences between sub-tree distributions.

Every distribution here lives on the full sample space of the problem: q_T
(product of the sub-tree kernels) and q̄_T (product of the remaining kernels)
are uniform in variables their kernels do not touch.
"""

import logging
from dataclasses import asdict, dataclass, replace
from typing import Dict, Mapping, Optional, Tuple

from ..exceptions import CapacityError, ContractError, StructuralError
from ..inference.gdl import calibrate, tree_entropy, tree_marginal
from ..inference.oracle import (
    DEFAULT_MAX_STATES,
    DenseDistribution,
    brute_force_log_partition,
    check_capacity,
    entropy,
    expected_log_kernel,
    expected_log_marginal,
    joint_distribution,
    joint_of_kernels,
    kl_divergence,
)
from ..model.models import InferenceProblem, SubTree
from ..utils.extended import ext_sum

logger = logging.getLogger(__name__)

ROUTE_AUTO = "auto"
ROUTE_DENSE = "dense"
ROUTE_ELIMINATION = "elimination"
ROUTES = (ROUTE_AUTO, ROUTE_DENSE, ROUTE_ELIMINATION)

SubtreeKey = Tuple[Tuple[int, ...], Tuple[int, ...]]


@dataclass(frozen=True)
class BoundReport:
    """L_{q_T} for one sub-tree together with the pieces it is built from.

    ``log_Z_T`` normalizes q_T on the full sample space; ``tree_log_Z`` is the
    vertex/edge decomposition over the tree's own variables. They differ by
    the log-volume of the variables no sub-tree kernel touches.
    """

    subtree: SubTree
    log_Z_T: float
    tree_log_Z: float
    entropy: float
    excluded_term: float
    lower_bound: float
    route: str
    divergence_to_p: Optional[float] = None
    log_Z: Optional[float] = None

    @property
    def identifier(self) -> str:
        return self.subtree.identifier

    def to_dict(self) -> Dict[str, object]:
        return {
            "subtree": self.subtree.identifier,
            "kernels": list(self.subtree.kernel_subset),
            "log_Z_T": self.log_Z_T,
            "tree_log_Z": self.tree_log_Z,
            "entropy": self.entropy,
            "excluded_term": self.excluded_term,
            "lower_bound": self.lower_bound,
            "route": self.route,
            "divergence_to_p": self.divergence_to_p,
            "log_Z": self.log_Z,
        }


@dataclass(frozen=True)
class ComplementReport:
    """q̄_T and its divergence from q_T."""

    complement_kernels: Tuple[int, ...]
    complement_dist: DenseDistribution
    self_gap: float


@dataclass(frozen=True)
class PairDivergences:
    """The divergences and entropies comparing two sub-tree distributions."""

    d12: float
    d21: float
    d1_bar1: float
    d1_bar2: float
    d2_bar2: float
    h1: float
    h2: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _excluded(problem: InferenceProblem, subtree: SubTree) -> Tuple[int, ...]:
    kept = set(subtree.kernel_subset)
    return tuple(i for i in range(problem.num_kernels) if i not in kept)


def _check_owner(problem: InferenceProblem, subtree: SubTree) -> None:
    if subtree.parent.num_vertices != problem.num_kernels:
        raise StructuralError(
            f"Sub-tree comes from a graph with {subtree.parent.num_vertices} vertices, "
            f"the problem has {problem.num_kernels} kernels"
        )


def _resolve_route(problem: InferenceProblem, route: str, max_states: int) -> str:
    if route not in ROUTES:
        raise ValueError(f"Unknown excluded-term route '{route}'")
    if route != ROUTE_AUTO:
        return route
    return ROUTE_DENSE if problem.state_count() <= max_states else ROUTE_ELIMINATION


class BoundCalculator:
    """
    Computes and caches bound reports and dense sub-tree distributions for one problem.

    Args:
        problem: The inference problem
        max_states: Cap on dense joint tables
        route: How the excluded-kernel expectations are taken (auto, dense, elimination)
        with_oracle: Attach ln Z and D(q_T||p) to every report when within the cap
        bound_offsets: Added to L_{q_T} for the given sub-tree keys (fault injection)
    """

    def __init__(
        self,
        problem: InferenceProblem,
        max_states: int = DEFAULT_MAX_STATES,
        route: str = ROUTE_AUTO,
        with_oracle: bool = True,
        bound_offsets: Optional[Mapping[SubtreeKey, float]] = None
    ):
        self.problem = problem
        self.max_states = max_states
        self.route = _resolve_route(problem, route, max_states)
        self.with_oracle = with_oracle
        self.bound_offsets: Dict[SubtreeKey, float] = dict(bound_offsets or {})
        self._reports: Dict[SubtreeKey, BoundReport] = {}
        self._tree_dists: Dict[Tuple[int, ...], DenseDistribution] = {}
        self._complements: Dict[Tuple[int, ...], DenseDistribution] = {}
        self._target: Optional[DenseDistribution] = None
        self._log_partition: Optional[float] = None

    def target(self) -> DenseDistribution:
        """The model distribution p."""
        if self._target is None:
            self._target = joint_distribution(self.problem, self.max_states)
            self._log_partition = self._target.log_norm
        return self._target

    def log_partition(self) -> float:
        if self._log_partition is None:
            self._log_partition = brute_force_log_partition(self.problem, self.max_states)
        return self._log_partition

    def tree_distribution(self, subtree: SubTree) -> DenseDistribution:
        """q_T on the full sample space."""
        kernels = subtree.kernel_subset
        if kernels not in self._tree_dists:
            self._tree_dists[kernels] = joint_of_kernels(
                self.problem.cardinalities, self.problem.kernel_subset(kernels), self.max_states
            )
        return self._tree_dists[kernels]

    def complement(self, subtree: SubTree) -> DenseDistribution:
        """q̄_T; the empty product (every kernel in the tree) is the uniform distribution."""
        excluded = _excluded(self.problem, subtree)
        if excluded not in self._complements:
            self._complements[excluded] = joint_of_kernels(
                self.problem.cardinalities, self.problem.kernel_subset(excluded), self.max_states
            )
        return self._complements[excluded]

    def report(self, subtree: SubTree) -> BoundReport:
        """BoundReport for ``subtree`` (cached, fault offsets applied)."""
        if subtree.key not in self._reports:
            report = self._compute(subtree)
            offset = self.bound_offsets.get(subtree.key)
            if offset:
                logger.warning(f"Injecting offset {offset:+g} into L of {subtree.identifier}")
                report = replace(report, lower_bound=report.lower_bound + offset)
            self._reports[subtree.key] = report
        return self._reports[subtree.key]

    def _compute(self, subtree: SubTree) -> BoundReport:
        _check_owner(self.problem, subtree)
        beliefs = calibrate(self.problem, subtree)
        untouched = self.problem.untouched_log_volume(subtree.kernel_subset)
        log_Z_T = beliefs.log_partition + untouched
        excluded = _excluded(self.problem, subtree)

        if self.route == ROUTE_DENSE:
            q_T = self.tree_distribution(subtree)
            terms = [expected_log_kernel(q_T, self.problem.kernels[i]) for i in excluded]
        else:
            terms = []
            for index in excluded:
                kernel = self.problem.kernels[index]
                marginal = tree_marginal(beliefs, subtree, kernel.scope, self.problem.cardinalities)
                terms.append(expected_log_marginal(marginal, kernel))
        excluded_term = ext_sum(terms)
        lower_bound = ext_sum([excluded_term, log_Z_T])

        divergence_to_p = log_Z = None
        if self.with_oracle:
            try:
                log_Z = self.log_partition()
                divergence_to_p = kl_divergence(self.tree_distribution(subtree), self.target())
            except CapacityError as e:
                logger.debug(f"No oracle values for {subtree.identifier}: {e}")

        logger.debug(
            f"{subtree.identifier}: ln Z_T={log_Z_T!r} excluded={excluded_term!r} L={lower_bound!r}"
        )
        return BoundReport(
            subtree=subtree,
            log_Z_T=log_Z_T,
            tree_log_Z=beliefs.log_partition,
            entropy=tree_entropy(beliefs, subtree) + untouched,
            excluded_term=excluded_term,
            lower_bound=lower_bound,
            route=self.route,
            divergence_to_p=divergence_to_p,
            log_Z=log_Z,
        )

    def pair(self, t1: SubTree, t2: SubTree) -> PairDivergences:
        q1, q2 = self.tree_distribution(t1), self.tree_distribution(t2)
        bar1, bar2 = self.complement(t1), self.complement(t2)
        return PairDivergences(
            d12=kl_divergence(q1, q2),
            d21=kl_divergence(q2, q1),
            d1_bar1=kl_divergence(q1, bar1),
            d1_bar2=kl_divergence(q1, bar2),
            d2_bar2=kl_divergence(q2, bar2),
            h1=entropy(q1),
            h2=entropy(q2),
        )


def subtree_lower_bound(
    problem: InferenceProblem,
    subtree: SubTree,
    max_states: int = DEFAULT_MAX_STATES,
    route: str = ROUTE_AUTO,
    with_oracle: bool = True
) -> BoundReport:
    """
    L_{q_T} = Σ_{R ∉ R_T} E_{q_T}[ln α_R] + ln Z_T.

    Args:
        problem: The inference problem
        subtree: A valid sub-tree of a junction graph for ``problem``
        max_states: Dense-table cap; above it the auto route eliminates on the tree
        route: ``auto``, ``dense`` or ``elimination``

    Returns:
        BoundReport; ``lower_bound`` is -inf when q_T charges a zero of an excluded kernel

    Raises:
        DegenerateModelError: If the sub-tree kernels have no joint mass
        CapacityError: If neither route fits the caps
    """
    return BoundCalculator(problem, max_states, route, with_oracle).report(subtree)


def complement_distribution(
    problem: InferenceProblem,
    subtree: SubTree,
    max_states: int = DEFAULT_MAX_STATES
) -> ComplementReport:
    """
    q̄_T, the normalized product of the kernels outside the sub-tree.

    Raises:
        ContractError: If the sub-tree holds every kernel
        DegenerateModelError: If the excluded kernels have no joint mass
    """
    _check_owner(problem, subtree)
    excluded = _excluded(problem, subtree)
    if not excluded:
        raise ContractError(f"Sub-tree {subtree.identifier} leaves no kernels outside it")
    calculator = BoundCalculator(problem, max_states, with_oracle=False)
    q_bar = calculator.complement(subtree)
    return ComplementReport(
        complement_kernels=excluded,
        complement_dist=q_bar,
        self_gap=kl_divergence(calculator.tree_distribution(subtree), q_bar),
    )


def pairwise_divergences(
    problem: InferenceProblem,
    t1: SubTree,
    t2: SubTree,
    max_states: int = DEFAULT_MAX_STATES
) -> PairDivergences:
    """D(q1||q2), D(q2||q1), D(q1||q̄1), D(q1||q̄2), D(q2||q̄2), H(q1) and H(q2)."""
    check_capacity(problem.cardinalities, max_states)
    return BoundCalculator(problem, max_states, with_oracle=False).pair(t1, t2)
