"""Enumeration of sub-junction-trees and selection of q_S / q_B."""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from networkx.utils import UnionFind

from ..exceptions import CapacityError, ContractError, DegenerateModelError
from ..inference.gdl import Schedule, beliefs_from_messages, bethe_entropy, calibrate, run_gdl, tree_entropy
from ..inference.oracle import DEFAULT_MAX_STATES
from ..model.junction import check_subtree, extract_subtree, first_broken_label
from ..model.models import GraphView, InferenceProblem, JunctionGraph, SubTree
from .lower_bound import BoundCalculator, BoundReport

logger = logging.getLogger(__name__)

DEFAULT_MAX_VERTICES = 12
DEFAULT_MAX_COMBINATIONS = 1_000_000
TIE_TOL = 1e-12


class EnumerationMode(str, Enum):
    """Which sub-trees a catalog holds."""
    SPANNING = "spanning"
    EXHAUSTIVE = "exhaustive"


class SelectionStrategy(str, Enum):
    """How the minimum-entropy sub-tree is searched for."""
    EXHAUSTIVE = "exhaustive"
    GREEDY = "greedy"


@dataclass(frozen=True)
class CatalogEntry:
    """One sub-tree with its cached bound report."""

    report: BoundReport

    @property
    def subtree(self) -> SubTree:
        return self.report.subtree

    @property
    def entropy(self) -> float:
        return self.report.entropy

    @property
    def log_Z_T(self) -> float:
        return self.report.log_Z_T

    @property
    def lower_bound(self) -> float:
        return self.report.lower_bound


@dataclass
class SubtreeCatalog:
    """Sub-trees in (vertex_subset, edge_subset) order with the q_S and q_B flags."""

    entries: List[CatalogEntry]
    mode: EnumerationMode
    min_entropy_index: Optional[int] = None
    best_bound_index: Optional[int] = None
    greedy: Optional[CatalogEntry] = None
    calculator: Optional[BoundCalculator] = field(default=None, repr=False)

    def __post_init__(self):
        if self.entries:
            self.min_entropy_index = _argmin_entropy(self.entries)
            self.best_bound_index = _argmax_bound(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def min_entropy(self) -> CatalogEntry:
        if self.min_entropy_index is None:
            raise ContractError("Empty catalog has no minimum-entropy entry")
        return self.entries[self.min_entropy_index]

    @property
    def best_bound(self) -> CatalogEntry:
        if self.best_bound_index is None:
            raise ContractError("Empty catalog has no best-bound entry")
        return self.entries[self.best_bound_index]

    def by_bound(self) -> List[Tuple[int, CatalogEntry]]:
        """(index, entry) pairs sorted by L descending, ties in catalog order."""
        return sorted(enumerate(self.entries), key=lambda item: (-item[1].lower_bound, item[0]))


def _argmin_entropy(entries: Sequence[CatalogEntry]) -> int:
    best = 0
    for index, entry in enumerate(entries[1:], start=1):
        if entry.entropy < entries[best].entropy - TIE_TOL:
            best = index
    return best


def _argmax_bound(entries: Sequence[CatalogEntry]) -> int:
    best = 0
    for index, entry in enumerate(entries[1:], start=1):
        if entry.lower_bound > entries[best].lower_bound + TIE_TOL:
            best = index
    return best


def _induced_edges(graph: JunctionGraph, vertices: Sequence[int]) -> List[int]:
    members = set(vertices)
    return [
        edge_id for edge_id, edge in enumerate(graph.edges)
        if edge.u in members and edge.v in members
    ]


def _trees_on(graph: JunctionGraph, vertices: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    """Edge sets making ``vertices`` a sub-junction-tree.

    In a valid junction graph each label induces a tree, so its induced
    restriction is a forest; a sub-tree has to keep every labelled induced
    edge. Only edges with an empty label are free to choose.
    """
    induced = _induced_edges(graph, vertices)
    forced = [e for e in induced if graph.edges[e].label]
    free = [e for e in induced if not graph.edges[e].label]

    components = UnionFind(vertices)
    for edge_id in forced:
        edge = graph.edges[edge_id]
        if components[edge.u] == components[edge.v]:
            return
        components.union(edge.u, edge.v)

    missing = len(vertices) - 1 - len(forced)
    if missing < 0 or missing > len(free):
        return
    for extra in itertools.combinations(free, missing):
        edges = tuple(sorted(forced + list(extra)))
        if check_subtree(graph, vertices, edges) is None:
            yield edges


def enumerate_subtrees(
    graph: JunctionGraph,
    mode: EnumerationMode = EnumerationMode.SPANNING,
    min_vertices: int = 1,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS
) -> List[SubTree]:
    """
    Enumerate sub-junction-trees of ``graph``.

    Args:
        graph: A valid junction graph
        mode: ``spanning`` keeps the valid sub-trees with the most vertices;
            ``exhaustive`` keeps every valid sub-tree
        min_vertices: Smallest vertex count to report
        max_vertices: Graph size limit for exhaustive mode
        max_combinations: Limit on vertex subsets examined

    Returns:
        SubTrees ordered by (vertex_subset, edge_subset)

    Raises:
        CapacityError: If a size limit is exceeded
        ContractError: If ``graph`` breaks the junction property
    """
    mode = EnumerationMode(mode)
    broken = first_broken_label(graph.full_view())
    if broken is not None:
        raise ContractError(f"Cannot enumerate sub-trees: label {broken} does not induce a tree")
    if mode == EnumerationMode.EXHAUSTIVE and graph.num_vertices > max_vertices:
        raise CapacityError(
            f"Exhaustive enumeration over {graph.num_vertices} vertices exceeds "
            f"the limit of {max_vertices}"
        )

    sizes = range(graph.num_vertices, max(min_vertices, 1) - 1, -1)
    found: List[SubTree] = []
    examined = 0
    for size in sizes:
        for vertices in itertools.combinations(graph.vertex_ids, size):
            examined += 1
            if examined > max_combinations:
                raise CapacityError(
                    f"Enumeration examined more than {max_combinations} vertex subsets"
                )
            for edges in _trees_on(graph, vertices):
                found.append(extract_subtree(graph, vertices, edges))
        if found and mode == EnumerationMode.SPANNING:
            break

    found.sort(key=lambda subtree: subtree.key)
    logger.debug(f"{mode.value} enumeration: {len(found)} sub-trees, {examined} vertex subsets")
    return found


def build_catalog(
    problem: InferenceProblem,
    graph: JunctionGraph,
    mode: EnumerationMode = EnumerationMode.SPANNING,
    min_vertices: int = 1,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
    calculator: Optional[BoundCalculator] = None,
    max_states: int = DEFAULT_MAX_STATES
) -> SubtreeCatalog:
    """Enumerate sub-trees and attach a bound report to each."""
    subtrees = enumerate_subtrees(graph, mode, min_vertices, max_vertices, max_combinations)
    return catalog_from_subtrees(problem, subtrees, mode, calculator or BoundCalculator(problem, max_states))


def catalog_from_subtrees(
    problem: InferenceProblem,
    subtrees: Sequence[SubTree],
    mode: EnumerationMode,
    calculator: BoundCalculator
) -> SubtreeCatalog:
    """Catalog over an already enumerated family."""
    entries = [CatalogEntry(calculator.report(subtree)) for subtree in subtrees]
    catalog = SubtreeCatalog(entries, EnumerationMode(mode), calculator=calculator)
    if entries:
        logger.info(
            f"Catalog ({catalog.mode.value}) of '{problem.name}': {len(entries)} sub-trees, "
            f"q_S={catalog.min_entropy.subtree.identifier}, "
            f"q_B={catalog.best_bound.subtree.identifier}"
        )
    return catalog


def partition_pairs(family: Union[SubtreeCatalog, Sequence[SubTree]]) -> List[Tuple[int, int]]:
    """Index pairs (i, j), i < j, whose kernel sets partition all kernels.

    ``family`` is a catalog or a plain list of sub-trees; indices refer to it.
    """
    if isinstance(family, SubtreeCatalog):
        family = [entry.subtree for entry in family.entries]
    if not family:
        return []
    everything = set(range(family[0].parent.num_vertices))
    by_kernels: Dict[Tuple[int, ...], List[int]] = {}
    for index, subtree in enumerate(family):
        by_kernels.setdefault(subtree.kernel_subset, []).append(index)

    pairs = []
    for index, subtree in enumerate(family):
        rest = tuple(sorted(everything - set(subtree.kernel_subset)))
        for other in by_kernels.get(rest, []):
            if other > index:
                pairs.append((index, other))
    return pairs


def _label_connected(view: GraphView) -> bool:
    """Connected, and every label connects the vertices carrying it (cycles allowed)."""
    components = UnionFind(view.vertex_subset)
    for _, edge in view.edge_items:
        components.union(edge.u, edge.v)
    if len({components[v] for v in view.vertex_subset}) != 1:
        return False
    for variable in view.variables:
        carriers = [v for v in view.vertex_subset if variable in view.label(v)]
        linked = UnionFind(carriers)
        for _, edge in view.edge_items:
            if variable in edge.label:
                linked.union(edge.u, edge.v)
        if len({linked[v] for v in carriers}) != 1:
            return False
    return True


def _greedy_score(problem: InferenceProblem, view: GraphView, schedule: Schedule) -> float:
    untouched = problem.untouched_log_volume(view.vertex_subset)
    if check_subtree(view.parent, view.vertex_subset, view.edge_subset) is None:
        return tree_entropy(calibrate(problem, view), view) + untouched
    beliefs = beliefs_from_messages(problem, view, run_gdl(problem, view, schedule))
    return bethe_entropy(beliefs, view) + untouched


def _greedy_moves(view: GraphView, min_vertices: int) -> Iterator[GraphView]:
    for edge_id in view.edge_subset:
        yield GraphView(view.parent, view.vertex_subset, tuple(e for e in view.edge_subset if e != edge_id))
    if len(view.vertex_subset) > min_vertices:
        for vertex in view.vertex_subset:
            edges = tuple(
                e for e, edge in view.edge_items if vertex not in (edge.u, edge.v)
            )
            yield GraphView(view.parent, tuple(v for v in view.vertex_subset if v != vertex), edges)


def greedy_min_entropy(
    problem: InferenceProblem,
    graph: JunctionGraph,
    schedule: Optional[Schedule] = None,
    min_vertices: int = 1
) -> Tuple[SubTree, float]:
    """
    Heuristic minimum-entropy sub-tree search.

    Starting from the full graph, repeatedly remove the edge or vertex whose
    removal gives the lowest entropy estimate, among removals that keep the
    structure connected in every label. The estimate is the exact tree
    entropy for sub-trees and the Bethe entropy of loopy GDL beliefs
    otherwise. Stops at the first valid sub-tree.

    Vertices are only removed while more than ``min_vertices`` remain. With
    ``min_vertices`` set to the vertex count of the spanning family the
    result is a member of that family, so its entropy is never below the
    family minimum. When no removal is admissible the search falls back to
    the best valid sub-tree on exactly ``min_vertices`` vertices.

    Returns:
        (SubTree, entropy of q_T on the full sample space)
    """
    if not 1 <= min_vertices <= graph.num_vertices:
        raise ContractError(f"min_vertices must lie in [1, {graph.num_vertices}], got {min_vertices}")
    schedule = schedule or Schedule.synchronous(max_iters=100, tol=1e-9)
    state = graph.full_view()
    steps = 0
    while check_subtree(graph, state.vertex_subset, state.edge_subset) is not None:
        best: Optional[Tuple[float, GraphView]] = None
        for candidate in _greedy_moves(state, min_vertices):
            if not _label_connected(candidate):
                continue
            try:
                score = _greedy_score(problem, candidate, schedule)
            except DegenerateModelError as e:
                logger.debug(f"Skipping greedy candidate {candidate.identifier}: {e}")
                continue
            if (
                best is None
                or score < best[0] - TIE_TOL
                or (abs(score - best[0]) <= TIE_TOL and candidate.key < best[1].key)
            ):
                best = (score, candidate)
        if best is None:
            logger.warning(
                f"Greedy search found no admissible removal; falling back to "
                f"{min_vertices}-vertex sub-trees"
            )
            return _best_of_size(problem, graph, min_vertices)
        state = best[1]
        steps += 1
        logger.debug(f"Greedy step {steps}: {state.identifier} (estimate {best[0]!r})")

    subtree = extract_subtree(graph, state.vertex_subset, state.edge_subset)
    return subtree, _greedy_score(problem, subtree, schedule)


def _best_of_size(problem: InferenceProblem, graph: JunctionGraph, size: int) -> Tuple[SubTree, float]:
    scored = []
    for vertices in itertools.combinations(graph.vertex_ids, size):
        for edges in _trees_on(graph, vertices):
            subtree = extract_subtree(graph, vertices, edges)
            try:
                scored.append((_greedy_score(problem, subtree, Schedule.tree_exact()), subtree.key, subtree))
            except DegenerateModelError:
                continue
    if not scored:
        raise DegenerateModelError(f"No non-degenerate sub-tree on {size} vertices")
    score, _, subtree = min(scored, key=lambda item: (item[0], item[1]))
    return subtree, score


def min_entropy_subtree(
    problem: InferenceProblem,
    graph: JunctionGraph,
    strategy: SelectionStrategy = SelectionStrategy.EXHAUSTIVE,
    mode: EnumerationMode = EnumerationMode.SPANNING,
    **limits
) -> Tuple[SubTree, float]:
    """
    q_S: the sub-tree whose distribution has the smallest entropy.

    Exhaustive search ranges over the enumerated family (spanning by default);
    ties go to the lexicographically first sub-tree.
    """
    if SelectionStrategy(strategy) == SelectionStrategy.GREEDY:
        return greedy_min_entropy(problem, graph, min_vertices=limits.get("min_vertices", 1))
    catalog = build_catalog(problem, graph, mode, **limits)
    if not catalog.entries:
        raise ContractError("The enumerated family is empty")
    entry = catalog.min_entropy
    return entry.subtree, entry.entropy


def best_bound_subtree(
    problem: InferenceProblem,
    graph: JunctionGraph,
    mode: EnumerationMode = EnumerationMode.SPANNING,
    **limits
) -> Tuple[SubTree, float]:
    """q_B: the sub-tree with the largest lower bound over the enumerated family."""
    catalog = build_catalog(problem, graph, mode, **limits)
    if not catalog.entries:
        raise ContractError("The enumerated family is empty")
    entry = catalog.best_bound
    return entry.subtree, entry.lower_bound

