"""Junction-graph validation and sub-tree extraction."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind

from ..exceptions import RejectReason, StructuralError, SubtreeRejected
from .models import GraphView, InferenceProblem, JunctionGraph, SubTree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Violation:
    """One broken junction-graph invariant."""

    kind: str
    message: str
    label: Optional[int] = None
    edge: Optional[int] = None

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of :func:`validate_junction_graph`."""

    violations: Tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> List[str]:
        return [violation.kind for violation in self.violations]


def validate_junction_graph(
    problem: InferenceProblem,
    graph: JunctionGraph
) -> ValidationResult:
    """
    Check every junction-graph invariant of ``graph`` against ``problem``.

    Args:
        problem: The inference problem the graph should represent
        graph: Candidate junction graph

    Returns:
        ValidationResult listing each violation (empty when the graph is valid)

    Raises:
        StructuralError: If the vertex count differs from the kernel count
    """
    if graph.num_vertices != problem.num_kernels:
        raise StructuralError(
            f"Junction graph has {graph.num_vertices} vertices but the problem "
            f"has {problem.num_kernels} kernels"
        )

    violations: List[Violation] = []

    for vertex, (label, kernel) in enumerate(zip(graph.vertex_labels, problem.kernels)):
        if label != kernel.scope:
            violations.append(Violation(
                "vertex_label_mismatch",
                f"vertex {vertex} label {list(label)} differs from kernel scope {list(kernel.scope)}",
            ))

    seen_pairs = set()
    usable_edges = []
    for index, edge in enumerate(graph.edges):
        if not (0 <= edge.u < graph.num_vertices and 0 <= edge.v < graph.num_vertices):
            violations.append(Violation(
                "edge_endpoint", f"edge {index} references a missing vertex", edge=index
            ))
            continue
        if edge.u == edge.v:
            violations.append(Violation(
                "self_loop", f"edge {index} is a self-loop on vertex {edge.u}", edge=index
            ))
            continue
        if edge.u > edge.v:
            violations.append(Violation(
                "edge_order", f"edge {index} must be listed with u < v", edge=index
            ))
        pair = (min(edge.u, edge.v), max(edge.u, edge.v))
        if pair in seen_pairs:
            violations.append(Violation(
                "duplicate_edge", f"edge {index} duplicates {pair}", edge=index
            ))
            continue
        seen_pairs.add(pair)

        shared = set(graph.label(edge.u)) & set(graph.label(edge.v))
        if not set(edge.label) <= shared:
            violations.append(Violation(
                "edge_label",
                f"edge {index} label {list(edge.label)} not ⊆ intersection {sorted(shared)}",
                edge=index,
            ))
        usable_edges.append((index, edge))

    for variable in range(problem.num_vars):
        label_graph = nx.Graph()
        label_graph.add_nodes_from(
            v for v, label in enumerate(graph.vertex_labels) if variable in label
        )
        for index, edge in usable_edges:
            if variable in edge.label:
                label_graph.add_edge(edge.u, edge.v)
        if label_graph.number_of_nodes() == 0:
            continue
        if not nx.is_tree(label_graph):
            reason = "cycle" if nx.is_connected(label_graph) else "disconnected"
            violations.append(Violation(
                "label_not_tree",
                f"subgraph induced by label {variable} is not a tree ({reason})",
                label=variable,
            ))

    if violations:
        logger.debug(f"Junction graph has {len(violations)} violation(s)")
    return ValidationResult(tuple(violations))


def is_junction_tree(graph: JunctionGraph) -> bool:
    """True iff the whole graph is connected and acyclic."""
    return graph.full_view().is_tree()


def _component_count(vertices: Sequence[int], pairs: Iterable[Tuple[int, int]]) -> int:
    components = UnionFind(vertices)
    for u, v in pairs:
        components.union(u, v)
    return len({components[v] for v in vertices})


def first_broken_label(view: GraphView) -> Optional[int]:
    """
    Check that every label induces a tree inside ``view``.

    Returns:
        None when the property holds, otherwise the first offending variable
    """
    for variable in view.variables:
        carriers = [v for v in view.vertex_subset if variable in view.label(v)]
        links = [
            (edge.u, edge.v) for _, edge in view.edge_items if variable in edge.label
        ]
        if len(links) != len(carriers) - 1 or _component_count(carriers, links) != 1:
            return variable
    return None


def check_subtree(
    graph: JunctionGraph,
    vertices: Iterable[int],
    edges: Iterable[int]
) -> Optional[RejectReason]:
    """
    Non-raising form of :func:`extract_subtree`.

    Returns:
        None if the restriction is a sub-junction-tree, else the rejection reason
    """
    view = _restriction(graph, vertices, edges)
    reason, _ = _classify(view)
    return reason


def extract_subtree(
    graph: JunctionGraph,
    vertices: Iterable[int],
    edges: Iterable[int]
) -> SubTree:
    """
    Restrict ``graph`` to the given vertices and edge ids.

    Args:
        graph: A validated junction graph
        vertices: Vertex ids to keep
        edges: Edge ids (indices into ``graph.edges``) to keep

    Returns:
        The SubTree, with kernel subset equal to the kept vertices

    Raises:
        StructuralError: If an id does not exist or an edge leaves the vertex set
        SubtreeRejected: If the restriction is not a junction tree
    """
    view = _restriction(graph, vertices, edges)
    reason, detail = _classify(view)
    if reason is not None:
        raise SubtreeRejected(reason, detail)
    return SubTree(graph, view.vertex_subset, view.edge_subset)


def _restriction(graph: JunctionGraph, vertices: Iterable[int], edges: Iterable[int]) -> GraphView:
    vertex_set = sorted(set(int(v) for v in vertices))
    edge_set = sorted(set(int(e) for e in edges))
    if not vertex_set:
        raise StructuralError("A sub-tree needs at least one vertex")
    for vertex in vertex_set:
        if not 0 <= vertex < graph.num_vertices:
            raise StructuralError(f"Vertex {vertex} does not exist")
    members = set(vertex_set)
    for edge_id in edge_set:
        if not 0 <= edge_id < len(graph.edges):
            raise StructuralError(f"Edge {edge_id} does not exist")
        edge = graph.edges[edge_id]
        if edge.u not in members or edge.v not in members:
            raise StructuralError(
                f"Edge {edge_id} ({edge.u}-{edge.v}) leaves the selected vertex set"
            )
    return GraphView(graph, tuple(vertex_set), tuple(edge_set))


def _classify(view: GraphView) -> Tuple[Optional[RejectReason], str]:
    pairs = [(edge.u, edge.v) for _, edge in view.edge_items]
    components = _component_count(view.vertex_subset, pairs)
    if len(pairs) > len(view.vertex_subset) - components:
        return RejectReason.CYCLE, f"{len(pairs)} edges on {len(view.vertex_subset)} vertices"
    if components > 1:
        return RejectReason.DISCONNECTED, f"{components} components"
    broken = first_broken_label(view)
    if broken is not None:
        return RejectReason.JUNCTION_BROKEN, f"label {broken} does not induce a tree"
    return None, ""
