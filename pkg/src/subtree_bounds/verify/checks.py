"""Numerical checks of the divergence inequalities between sub-tree bounds."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..bounds.catalog import SubtreeCatalog
from ..bounds.lower_bound import BoundCalculator, PairDivergences
from ..exceptions import ContractError
from ..inference.gdl import calibrate, tree_entropy
from ..inference.oracle import DEFAULT_MAX_STATES, brute_force_marginal, entropy, kl_divergence
from ..model.models import InferenceProblem, JunctionGraph, SubTree
from ..utils.extended import ext_le, ext_slack, lhs_sum, rhs_sum

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
EXACT_TOL = 1e-9
AGREEMENT_TOL = 2e-8
ENTROPY_TIE_TOL = 1e-12

THEOREM2 = "theorem2"
COROLLARY1_BOUND = "corollary1_bound"
COROLLARY1_PATH = "corollary1_path"
TRIANGLE_PATH = "triangle_path"
COROLLARY1_AGREEMENT = "corollary1_agreement"
COROLLARY2 = "corollary2"
COROLLARY2_TIGHT = "corollary2_tight"
THEOREM3 = "theorem3"
COROLLARY3 = "corollary3"
BOUND_VALIDITY = "bound_validity"
BOUND_IDENTITY = "bound_identity"
TREE_MARGINALS = "tree_marginals"
TREE_PARTITION = "tree_partition"
TREE_ENTROPY = "tree_entropy"


@dataclass(frozen=True)
class InequalityCheck:
    """One evaluated inequality ``lhs ≤ rhs + tol``."""

    name: str
    lhs: float
    rhs: float
    tol: float
    context: Dict[str, Any] = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return ext_slack(self.lhs, self.rhs)

    @property
    def satisfied(self) -> bool:
        return ext_le(self.lhs, self.rhs, self.tol)

    def sort_key(self) -> Tuple[str, str]:
        return (self.name, repr(sorted(self.context.items())))


def make_check(name: str, lhs: float, rhs: float, tol: float, **context) -> InequalityCheck:
    check = InequalityCheck(name, float(lhs), float(rhs), tol, dict(context))
    if not check.satisfied:
        logger.warning(f"{name} violated: lhs={check.lhs!r} rhs={check.rhs!r} context={check.context}")
    return check


def _calculator(problem: InferenceProblem, calculator: Optional[BoundCalculator]) -> BoundCalculator:
    return calculator or BoundCalculator(problem, DEFAULT_MAX_STATES, with_oracle=False)


def order_by_entropy(
    calculator: BoundCalculator,
    t1: SubTree,
    t2: SubTree
) -> Tuple[SubTree, SubTree, PairDivergences, bool]:
    """Return (t1, t2, divergences, swapped) with H(q1) ≤ H(q2).

    Entropies within 1e-12 count as tied; ties keep the lexicographically
    smaller sub-tree first.
    """
    pair = calculator.pair(t1, t2)
    tied = abs(pair.h1 - pair.h2) <= ENTROPY_TIE_TOL
    if (not tied and pair.h1 > pair.h2) or (tied and t2.key < t1.key):
        return t2, t1, calculator.pair(t2, t1), True
    return t1, t2, pair, False


def _is_partition(problem: InferenceProblem, t1: SubTree, t2: SubTree) -> bool:
    first, second = set(t1.kernel_subset), set(t2.kernel_subset)
    return not (first & second) and (first | second) == set(range(problem.num_kernels))


def check_theorem2(
    problem: InferenceProblem,
    t1: SubTree,
    t2: SubTree,
    tol: float = DEFAULT_TOL,
    calculator: Optional[BoundCalculator] = None,
    **context
) -> InequalityCheck:
    """
    L_{q2} ≤ L_{q1} + min(D(q1||q̄1) − D(q2||q1), D(q1||q2) + D(q1||q̄2)) for H(q1) ≤ H(q2).

    The inputs are reordered when needed; the swap is recorded in the context.
    """
    calculator = _calculator(problem, calculator)
    t1, t2, pair, swapped = order_by_entropy(calculator, t1, t2)
    bound1 = calculator.report(t1).lower_bound
    bound2 = calculator.report(t2).lower_bound
    margin = min(
        rhs_sum([pair.d1_bar1, -pair.d21]),
        rhs_sum([pair.d12, pair.d1_bar2]),
    )
    return make_check(
        THEOREM2,
        bound2,
        rhs_sum([bound1, margin]),
        tol,
        t1=t1.identifier,
        t2=t2.identifier,
        swapped=swapped,
        **context,
    )


def check_corollary1(
    problem: InferenceProblem,
    t1: SubTree,
    t2: SubTree,
    tol: float = DEFAULT_TOL,
    calculator: Optional[BoundCalculator] = None,
    agreement_tol: float = AGREEMENT_TOL,
    **context
) -> List[InequalityCheck]:
    """
    The two-tree partition inequalities, plus the agreement of the path form
    with the bound form rewritten through L_T = ln Z − D(q_T||p).

    Raises:
        ContractError: If the kernel sets of ``t1`` and ``t2`` do not partition the kernels
    """
    if not _is_partition(problem, t1, t2):
        raise ContractError(
            f"{t1.identifier} and {t2.identifier} do not partition the kernel collection"
        )
    calculator = _calculator(problem, calculator)
    t1, t2, pair, swapped = order_by_entropy(calculator, t1, t2)
    p = calculator.target()
    d1p = kl_divergence(calculator.tree_distribution(t1), p)
    d2p = kl_divergence(calculator.tree_distribution(t2), p)
    bound1 = calculator.report(t1).lower_bound
    bound2 = calculator.report(t2).lower_bound
    context = dict(t1=t1.identifier, t2=t2.identifier, swapped=swapped, **context)

    bound_form = make_check(
        COROLLARY1_BOUND, lhs_sum([bound2, pair.d21]), rhs_sum([bound1, pair.d12]), tol, **context
    )
    path_form = make_check(
        COROLLARY1_PATH, lhs_sum([pair.d21, d1p]), rhs_sum([pair.d12, d2p]), tol, **context
    )
    triangle = make_check(TRIANGLE_PATH, d1p, rhs_sum([pair.d12, d2p]), tol, **context)

    first, second = bound_form.slack, path_form.slack
    if math.isinf(first) and first == second:
        disagreement = 0.0
    else:
        disagreement = abs(first - second)
        if math.isnan(disagreement):
            disagreement = math.inf
    agreement = make_check(COROLLARY1_AGREEMENT, disagreement, agreement_tol, 0.0, **context)
    return [bound_form, path_form, triangle, agreement]


def check_corollary2(
    problem: InferenceProblem,
    catalog: SubtreeCatalog,
    tol: float = DEFAULT_TOL,
    calculator: Optional[BoundCalculator] = None,
    **context
) -> List[InequalityCheck]:
    """
    L_{q_T} ≤ L_{q_S} + D(q_S||q̄_S) for every catalog entry T, and the
    sharper L_{q_T} ≤ L_{q_S} + D(q_S||q̄_S) − D(q_T||q_S).
    """
    calculator = _calculator(problem, calculator or catalog.calculator)
    source = catalog.min_entropy
    q_s = calculator.tree_distribution(source.subtree)
    guarantee = kl_divergence(q_s, calculator.complement(source.subtree))
    bound_s = calculator.report(source.subtree).lower_bound
    logger.debug(f"Guarantee D(q_S||q̄_S) = {guarantee!r} for q_S = {source.subtree.identifier}")

    checks = []
    for entry in catalog.entries:
        subtree = entry.subtree
        bound_t = calculator.report(subtree).lower_bound
        local = dict(t=subtree.identifier, s=source.subtree.identifier, **context)
        checks.append(make_check(COROLLARY2, bound_t, rhs_sum([bound_s, guarantee]), tol, **local))
        gap = kl_divergence(calculator.tree_distribution(subtree), q_s)
        checks.append(make_check(
            COROLLARY2_TIGHT, bound_t, rhs_sum([bound_s, guarantee, -gap]), tol, **local
        ))
    return checks


def check_theorem3(
    problem: InferenceProblem,
    catalog: SubtreeCatalog,
    tol: float = DEFAULT_TOL,
    calculator: Optional[BoundCalculator] = None,
    **context
) -> InequalityCheck:
    """D(q_B||q_S) ≤ D(q_S||q̄_S) for the catalog's flagged q_S and q_B."""
    calculator = _calculator(problem, calculator or catalog.calculator)
    source, best = catalog.min_entropy.subtree, catalog.best_bound.subtree
    q_s = calculator.tree_distribution(source)
    return make_check(
        THEOREM3,
        kl_divergence(calculator.tree_distribution(best), q_s),
        kl_divergence(q_s, calculator.complement(source)),
        tol,
        s=source.identifier,
        b=best.identifier,
        **context,
    )


def check_corollary3(
    problem: InferenceProblem,
    t_s: SubTree,
    t_b: SubTree,
    tol: float = DEFAULT_TOL,
    calculator: Optional[BoundCalculator] = None,
    **context
) -> InequalityCheck:
    """
    D(q_B||q_S) ≤ D(q_S||q_B) when R_S and R_B partition the kernels.

    The same sub-tree may be passed twice (q_S = q_B), which gives 0 ≤ 0.

    Raises:
        ContractError: If two distinct sub-trees do not partition the kernels
    """
    if t_s.key != t_b.key and not _is_partition(problem, t_s, t_b):
        raise ContractError(
            f"{t_s.identifier} and {t_b.identifier} do not partition the kernel collection"
        )
    calculator = _calculator(problem, calculator)
    q_s = calculator.tree_distribution(t_s)
    q_b = calculator.tree_distribution(t_b)
    return make_check(
        COROLLARY3,
        kl_divergence(q_b, q_s),
        kl_divergence(q_s, q_b),
        tol,
        s=t_s.identifier,
        b=t_b.identifier,
        **context,
    )


def check_bound(
    problem: InferenceProblem,
    subtree: SubTree,
    calculator: BoundCalculator,
    tol: float = EXACT_TOL,
    **context
) -> List[InequalityCheck]:
    """L_{q_T} ≤ ln Z and L_{q_T} = ln Z − D(q_T||p)."""
    report = calculator.report(subtree)
    log_z = calculator.log_partition()
    divergence = kl_divergence(calculator.tree_distribution(subtree), calculator.target())
    expected = lhs_sum([log_z, -divergence])
    if math.isinf(report.lower_bound) and report.lower_bound == expected:
        mismatch = 0.0
    else:
        mismatch = abs(report.lower_bound - expected)
    context = dict(t=subtree.identifier, **context)
    return [
        make_check(BOUND_VALIDITY, report.lower_bound, log_z, tol, **context),
        make_check(BOUND_IDENTITY, mismatch, 0.0, tol, **context),
    ]


def check_tree_exactness(
    problem: InferenceProblem,
    graph: JunctionGraph,
    tol: float = EXACT_TOL,
    max_states: int = DEFAULT_MAX_STATES,
    **context
) -> List[InequalityCheck]:
    """GDL marginals, ln Z and entropy against the oracle on a junction tree."""
    view = graph.full_view()
    beliefs = calibrate(problem, view)
    calculator = BoundCalculator(problem, max_states, with_oracle=False)
    p = calculator.target()

    worst = 0.0
    for vertex in view.vertex_subset:
        exact = brute_force_marginal(problem, view.label(vertex), max_states)
        worst = max(worst, float(np.max(np.abs(beliefs.vertex_beliefs[vertex] - exact))))

    log_z = p.log_norm
    h = entropy(p)
    return [
        make_check(TREE_MARGINALS, worst, 0.0, tol, **context),
        make_check(
            TREE_PARTITION, abs(beliefs.log_partition - log_z), 0.0, tol * max(1.0, abs(log_z)), **context
        ),
        make_check(
            TREE_ENTROPY, abs(tree_entropy(beliefs, view) - h), 0.0, tol * max(1.0, h), **context
        ),
    ]
