"""Generalized distributive law (sum-product) on junction graphs.

Messages live on directed edges and are tables over the edge label. They are
rescaled to sum to one after every update; ``MessageSet.log_scales`` keeps,
per directed edge, the log factor that turns the stored message back into
the unnormalized one. Rescaling a message multiplies the receiving vertex
normalizer and the edge normalizer by the same factor, so the vertex/edge
decomposition of ln Z_T is unaffected.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.special import entr

from ..exceptions import CapacityError, ConsistencyError, ContractError, DegenerateModelError, StructuralError
from ..model.models import GraphView, InferenceProblem, JunctionGraph

logger = logging.getLogger(__name__)

TREE_EXACT = "tree_exact"
SYNCHRONOUS = "synchronous"
CROSS_CHECK_TOL = 1e-9
# numpy.einsum accepts at most 52 distinct subscripts
EINSUM_MAX_LABELS = 52

Structure = Union[JunctionGraph, GraphView]
DirectedEdge = Tuple[int, int]


@dataclass(frozen=True)
class Schedule:
    """Message update schedule."""

    kind: str = TREE_EXACT
    max_iters: int = 200
    tol: float = 1e-10

    def __post_init__(self):
        if self.kind not in (TREE_EXACT, SYNCHRONOUS):
            raise ValueError(f"Unknown schedule '{self.kind}'")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    @classmethod
    def tree_exact(cls) -> "Schedule":
        return cls(TREE_EXACT)

    @classmethod
    def synchronous(cls, max_iters: int = 200, tol: float = 1e-10) -> "Schedule":
        return cls(SYNCHRONOUS, max_iters, tol)


@dataclass
class MessageSet:
    """Messages m_{u,v} keyed by directed edge (u, v)."""

    messages: Dict[DirectedEdge, np.ndarray]
    log_scales: Dict[DirectedEdge, float]
    schedule: Schedule
    normalized: bool = True
    computations: int = 0
    iterations: int = 0
    converged: bool = True
    root: Optional[int] = None
    root_log_mass: Optional[float] = None


@dataclass
class TreeBeliefs:
    """Vertex and edge beliefs with their local normalizers (in log form)."""

    vertex_beliefs: Dict[int, np.ndarray]
    edge_beliefs: Dict[int, np.ndarray]
    vertex_log_norms: Dict[int, float]
    edge_log_norms: Dict[int, float]
    log_partition: Optional[float] = None
    messages: Optional[MessageSet] = field(default=None, repr=False)


def as_view(structure: Structure) -> GraphView:
    if isinstance(structure, JunctionGraph):
        return structure.full_view()
    return structure


def _check_structure(problem: InferenceProblem, view: GraphView) -> None:
    if view.parent.num_vertices != problem.num_kernels:
        raise StructuralError(
            f"Junction graph has {view.parent.num_vertices} vertices but the problem "
            f"has {problem.num_kernels} kernels"
        )
    for vertex in view.vertex_subset:
        if view.label(vertex) != problem.kernels[vertex].scope:
            raise StructuralError(
                f"Vertex {vertex} label {view.label(vertex)} differs from its kernel scope"
            )


def _incoming_operands(
    problem: InferenceProblem,
    view: GraphView,
    messages: Dict[DirectedEdge, np.ndarray],
    vertex: int,
    exclude: Optional[int] = None
) -> Tuple[list, Dict[int, int]]:
    label = view.label(vertex)
    local = {var: axis for axis, var in enumerate(label)}
    operands = [problem.kernels[vertex].table, list(range(len(label)))]
    for neighbor, edge_id in view.neighbors[vertex]:
        if neighbor == exclude:
            continue
        operands += [
            messages[(neighbor, vertex)],
            [local[var] for var in view.edge(edge_id).label],
        ]
    return operands, local


def _raw_message(
    problem: InferenceProblem,
    view: GraphView,
    messages: Dict[DirectedEdge, np.ndarray],
    source: int,
    target: int,
    edge_id: int
) -> np.ndarray:
    operands, local = _incoming_operands(problem, view, messages, source, exclude=target)
    out = [local[var] for var in view.edge(edge_id).label]
    return np.asarray(np.einsum(*operands, out))


def _rescale(raw: np.ndarray, source: int, target: int, normalize: bool) -> Tuple[np.ndarray, float]:
    total = float(raw.sum())
    if not total > 0 or not math.isfinite(total):
        raise DegenerateModelError(f"Message {source}->{target} has no mass")
    if not normalize:
        return raw, 0.0
    return raw / total, math.log(total)


def _send(
    problem: InferenceProblem,
    view: GraphView,
    store: MessageSet,
    source: int,
    target: int,
    edge_id: int,
    inputs: Optional[Dict[DirectedEdge, np.ndarray]] = None,
    input_scales: Optional[Dict[DirectedEdge, float]] = None
) -> None:
    inputs = store.messages if inputs is None else inputs
    input_scales = store.log_scales if input_scales is None else input_scales
    raw = _raw_message(problem, view, inputs, source, target, edge_id)
    message, log_scale = _rescale(raw, source, target, store.normalized)
    carried = sum(
        input_scales[(neighbor, source)]
        for neighbor, _ in view.neighbors[source]
        if neighbor != target
    )
    store.messages[(source, target)] = message
    store.log_scales[(source, target)] = log_scale + carried
    store.computations += 1


def _directed_edges(view: GraphView):
    for edge_id, edge in view.edge_items:
        yield edge.u, edge.v, edge_id
        yield edge.v, edge.u, edge_id


def run_gdl(
    problem: InferenceProblem,
    graph: Structure,
    schedule: Optional[Schedule] = None,
    normalize: bool = True
) -> MessageSet:
    """
    Run GDL message passing.

    Args:
        problem: Kernels attached to the graph vertices
        graph: Junction graph, or a restriction of one
        schedule: ``Schedule.tree_exact()`` (default) or ``Schedule.synchronous(...)``
        normalize: Rescale messages to sum 1 (tree_exact only may disable it)

    Returns:
        MessageSet; for tree_exact it also records the root mass of the upward sweep

    Raises:
        ContractError: tree_exact on a graph that is not a tree
        DegenerateModelError: A message with no mass
    """
    schedule = schedule or Schedule.tree_exact()
    view = as_view(graph)
    _check_structure(problem, view)

    if schedule.kind == TREE_EXACT:
        return _run_tree_exact(problem, view, schedule, normalize)
    if not normalize:
        raise ContractError("Synchronous schedules always normalize messages")
    return _run_synchronous(problem, view, schedule)


def _run_tree_exact(
    problem: InferenceProblem,
    view: GraphView,
    schedule: Schedule,
    normalize: bool
) -> MessageSet:
    if not view.is_tree():
        raise ContractError("tree_exact schedule requires a junction tree")

    store = MessageSet({}, {}, schedule, normalized=normalize, iterations=1)
    tree = view.to_networkx()
    root = view.vertex_subset[0]
    order = list(nx.bfs_edges(tree, root))

    for parent, child in reversed(order):
        _send(problem, view, store, child, parent, tree[parent][child]["id"])

    operands, _ = _incoming_operands(problem, view, store.messages, root)
    root_mass = float(np.einsum(*operands, []))
    if not root_mass > 0:
        raise DegenerateModelError(f"Root vertex {root} has no mass after the upward sweep")
    store.root = root
    store.root_log_mass = math.log(root_mass) + sum(
        store.log_scales[(child, root)] for child, _ in view.neighbors[root]
    )

    for parent, child in order:
        _send(problem, view, store, parent, child, tree[parent][child]["id"])

    logger.debug(
        f"tree_exact GDL on {len(view.vertex_subset)} vertices: "
        f"{store.computations} message computations"
    )
    return store


def _run_synchronous(problem: InferenceProblem, view: GraphView, schedule: Schedule) -> MessageSet:
    store = MessageSet({}, {}, schedule, normalized=True, converged=False)
    for source, target, edge_id in _directed_edges(view):
        shape = tuple(problem.cardinalities[var] for var in view.edge(edge_id).label)
        size = math.prod(shape)
        store.messages[(source, target)] = np.full(shape, 1.0 / size)
        store.log_scales[(source, target)] = 0.0

    for iteration in range(1, schedule.max_iters + 1):
        previous = dict(store.messages)
        previous_scales = dict(store.log_scales)
        for source, target, edge_id in _directed_edges(view):
            _send(problem, view, store, source, target, edge_id, previous, previous_scales)
        store.iterations = iteration
        delta = max(
            (float(np.max(np.abs(store.messages[key] - previous[key]))) for key in previous),
            default=0.0,
        )
        if delta < schedule.tol:
            store.converged = True
            break

    if not store.converged:
        logger.warning(
            f"Synchronous GDL did not converge within {schedule.max_iters} iterations"
        )
    return store


def beliefs_from_messages(
    problem: InferenceProblem,
    graph: Structure,
    messages: MessageSet
) -> TreeBeliefs:
    """
    Vertex and edge beliefs from a message set.

    ``log_partition`` is filled only when the structure is a tree, as the sum
    of vertex log-normalizers minus the sum of edge log-normalizers.

    Raises:
        DegenerateModelError: A belief with zero normalizer
        ConsistencyError: The two routes to ln Z_T disagree
    """
    view = as_view(graph)
    vertex_beliefs, vertex_log_norms = {}, {}
    edge_beliefs, edge_log_norms = {}, {}

    for vertex in view.vertex_subset:
        operands, local = _incoming_operands(problem, view, messages.messages, vertex)
        raw = np.asarray(np.einsum(*operands, list(range(len(local)))))
        total = float(raw.sum())
        if not total > 0:
            raise DegenerateModelError(f"Vertex {vertex} belief has zero normalizer")
        vertex_beliefs[vertex] = raw / total
        vertex_log_norms[vertex] = math.log(total)

    for edge_id, edge in view.edge_items:
        raw = messages.messages[(edge.u, edge.v)] * messages.messages[(edge.v, edge.u)]
        total = float(np.sum(raw))
        if not total > 0:
            raise DegenerateModelError(f"Edge {edge_id} belief has zero normalizer")
        edge_beliefs[edge_id] = raw / total
        edge_log_norms[edge_id] = math.log(total)

    log_partition = None
    if view.is_tree():
        log_partition = math.fsum(vertex_log_norms.values()) - math.fsum(edge_log_norms.values())
        if messages.root_log_mass is not None:
            gap = abs(log_partition - messages.root_log_mass)
            if gap > CROSS_CHECK_TOL * max(1.0, abs(log_partition)):
                raise ConsistencyError(
                    f"ln Z_T routes disagree: decomposition {log_partition!r} vs "
                    f"root mass {messages.root_log_mass!r}"
                )

    return TreeBeliefs(
        vertex_beliefs=vertex_beliefs,
        edge_beliefs=edge_beliefs,
        vertex_log_norms=vertex_log_norms,
        edge_log_norms=edge_log_norms,
        log_partition=log_partition,
        messages=messages,
    )


def calibrate(problem: InferenceProblem, graph: Structure, normalize: bool = True) -> TreeBeliefs:
    """Exact two-sweep GDL on a tree followed by belief computation."""
    messages = run_gdl(problem, graph, Schedule.tree_exact(), normalize=normalize)
    return beliefs_from_messages(problem, graph, messages)


@dataclass(frozen=True)
class TreePartition:
    """ln Z_T with a flag set when the restricted model has no mass."""

    value: float
    degenerate: bool = False
    reason: Optional[str] = None

    def __float__(self) -> float:
        return self.value


def tree_log_partition(problem: InferenceProblem, subtree: Structure) -> TreePartition:
    """ln Z_T of the sub-tree's kernels over the variables they touch.

    A degenerate restricted model yields −inf with ``degenerate`` set.
    """
    try:
        return TreePartition(calibrate(problem, subtree).log_partition)
    except DegenerateModelError as e:
        logger.warning(f"Degenerate sub-tree model, ln Z_T = -inf: {e}")
        return TreePartition(-math.inf, degenerate=True, reason=str(e))


def _table_entropy(table: np.ndarray) -> float:
    return float(np.sum(entr(table)))


def bethe_entropy(beliefs: TreeBeliefs, graph: Structure) -> float:
    """Σ_v H(b_v) − Σ_e H(b_e): exact on a calibrated tree, an estimate on loopy graphs."""
    view = as_view(graph)
    vertex_part = math.fsum(_table_entropy(beliefs.vertex_beliefs[v]) for v in view.vertex_subset)
    edge_part = math.fsum(_table_entropy(beliefs.edge_beliefs[e]) for e in view.edge_subset)
    return vertex_part - edge_part


def tree_entropy(beliefs: TreeBeliefs, subtree: Structure) -> float:
    """H(q_T) in nats from calibrated beliefs."""
    return max(0.0, bethe_entropy(beliefs, subtree))


def tree_joint_eval(beliefs: TreeBeliefs, subtree: Structure, assignment: Sequence[int]) -> float:
    """q_T(x) = ∏ b_v / ∏ b_e at ``assignment`` (indexed by variable), with 0/0 = 0."""
    view = as_view(subtree)
    numerator = 1.0
    for vertex in view.vertex_subset:
        index = tuple(int(assignment[var]) for var in view.label(vertex))
        numerator *= float(beliefs.vertex_beliefs[vertex][index])
    if numerator == 0.0:
        return 0.0
    denominator = 1.0
    for edge_id, edge in view.edge_items:
        index = tuple(int(assignment[var]) for var in edge.label)
        denominator *= float(beliefs.edge_beliefs[edge_id][index])
    return numerator / denominator


def tree_marginal(
    beliefs: TreeBeliefs,
    subtree: Structure,
    scope: Sequence[int],
    cardinalities: Sequence[int]
) -> np.ndarray:
    """
    Marginal of q_T over ``scope`` by eliminating every other tree variable.

    Variables of ``scope`` outside the tree are uniform under q_T.

    Raises:
        CapacityError: If the contraction needs more subscripts than einsum allows
    """
    view = as_view(subtree)
    scope = sorted(set(int(v) for v in scope))
    tree_vars = view.variables
    outside = [var for var in scope if var not in set(tree_vars)]
    if len(tree_vars) + len(outside) > EINSUM_MAX_LABELS:
        raise CapacityError(
            f"Elimination over {len(tree_vars) + len(outside)} variables exceeds "
            f"the {EINSUM_MAX_LABELS}-subscript contraction limit"
        )

    subscript = {var: i for i, var in enumerate(tree_vars)}
    for offset, var in enumerate(outside):
        subscript[var] = len(tree_vars) + offset

    operands = []
    for vertex in view.vertex_subset:
        operands += [beliefs.vertex_beliefs[vertex], [subscript[v] for v in view.label(vertex)]]
    for edge_id, edge in view.edge_items:
        belief = beliefs.edge_beliefs[edge_id]
        inverse = np.divide(1.0, belief, out=np.zeros_like(belief), where=belief > 0)
        operands += [inverse, [subscript[v] for v in edge.label]]
    for var in outside:
        card = int(cardinalities[var])
        operands += [np.full(card, 1.0 / card), [subscript[var]]]

    marginal = np.einsum(*operands, [subscript[v] for v in scope], optimize="greedy")
    return np.asarray(marginal)
