"""Data models for factored inference problems and junction graphs."""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from ..exceptions import InvalidModelError, StructuralError

Scope = Tuple[int, ...]


def _as_scope(values: Iterable[Any]) -> Scope:
    return tuple(int(i) for i in values)


@dataclass(frozen=True, eq=False)
class Kernel:
    """A non-negative local kernel over the variables listed in ``scope``.

    ``table`` has one axis per scope variable, in scope order. Its flat
    row-major view therefore has the last scope variable varying fastest,
    which is the layout used by model files.
    """

    scope: Scope
    table: np.ndarray

    def __post_init__(self):
        scope = _as_scope(self.scope)
        if not scope:
            raise InvalidModelError("Kernel scope must not be empty")
        if scope[0] < 0:
            raise InvalidModelError(f"Kernel scope {scope} has a negative index")
        if any(b <= a for a, b in zip(scope, scope[1:])):
            raise InvalidModelError(f"Kernel scope {scope} must be strictly increasing")

        table = np.array(self.table, dtype=float)
        if table.ndim != len(scope):
            raise StructuralError(
                f"Kernel over {scope} needs a {len(scope)}-axis table, got {table.ndim} axes"
            )
        if not np.all(np.isfinite(table)):
            raise InvalidModelError(f"Kernel over {scope} has non-finite entries")
        if np.any(table < 0):
            raise InvalidModelError(f"Kernel over {scope} has negative entries")
        table.setflags(write=False)

        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_flat(
        cls,
        scope: Sequence[int],
        values: Sequence[float],
        cardinalities: Sequence[int]
    ) -> "Kernel":
        """Build a kernel from a row-major flat list of entries."""
        scope = _as_scope(scope)
        try:
            shape = tuple(int(cardinalities[i]) for i in scope)
        except IndexError:
            raise InvalidModelError(f"Kernel scope {scope} references an unknown variable")
        flat = np.asarray(values, dtype=float).ravel()
        expected = math.prod(shape)
        if flat.size != expected:
            raise StructuralError(
                f"Kernel over {scope} needs {expected} entries, got {flat.size}"
            )
        return cls(scope, flat.reshape(shape))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.table.shape

    def flat(self) -> List[float]:
        """Row-major entries as plain floats."""
        return [float(v) for v in self.table.ravel()]

    def scaled(self, factor: float) -> "Kernel":
        """Return a copy with every entry multiplied by ``factor``."""
        return Kernel(self.scope, self.table * factor)

    def to_dict(self) -> Dict[str, Any]:
        """Convert kernel to a dictionary for model files."""
        return {"scope": list(self.scope), "table": self.flat()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], cardinalities: Sequence[int]) -> "Kernel":
        """Create kernel from a model-file mapping."""
        return cls.from_flat(data["scope"], data["table"], cardinalities)


@dataclass(frozen=True, eq=False)
class InferenceProblem:
    """Variables with finite domains and an ordered collection of kernels.

    The joint mass of an assignment is the product of all kernels evaluated
    on it. Kernel scopes may repeat; kernels are identified by position.
    """

    cardinalities: Tuple[int, ...]
    kernels: Tuple[Kernel, ...]
    name: str = "model"

    def __post_init__(self):
        cardinalities = tuple(int(c) for c in self.cardinalities)
        kernels = tuple(self.kernels)

        if not cardinalities:
            raise InvalidModelError("A model needs at least one variable")
        if any(c < 1 for c in cardinalities):
            raise InvalidModelError(f"Cardinalities must be positive, got {cardinalities}")
        if not kernels:
            raise InvalidModelError("A model needs at least one kernel")

        covered = set()
        for index, kernel in enumerate(kernels):
            if kernel.scope[-1] >= len(cardinalities):
                raise InvalidModelError(
                    f"Kernel {index} scope {kernel.scope} exceeds {len(cardinalities)} variables"
                )
            expected = tuple(cardinalities[i] for i in kernel.scope)
            if kernel.shape != expected:
                raise StructuralError(
                    f"Kernel {index} table shape {kernel.shape} does not match "
                    f"scope cardinalities {expected}"
                )
            covered.update(kernel.scope)

        missing = sorted(set(range(len(cardinalities))) - covered)
        if missing:
            raise InvalidModelError(f"Variables {missing} appear in no kernel scope")

        object.__setattr__(self, "cardinalities", cardinalities)
        object.__setattr__(self, "kernels", kernels)

    @property
    def num_vars(self) -> int:
        return len(self.cardinalities)

    @property
    def num_kernels(self) -> int:
        return len(self.kernels)

    def state_count(self) -> int:
        """Size of the joint state space."""
        return math.prod(self.cardinalities)

    def kernel_subset(self, indices: Iterable[int]) -> Tuple[Kernel, ...]:
        return tuple(self.kernels[i] for i in indices)

    def touched_variables(self, indices: Iterable[int]) -> Scope:
        """Variables appearing in at least one of the selected kernels."""
        touched = set()
        for i in indices:
            touched.update(self.kernels[i].scope)
        return tuple(sorted(touched))

    def untouched_log_volume(self, indices: Iterable[int]) -> float:
        """Sum of ln(cardinality) over variables the selected kernels miss."""
        touched = set(self.touched_variables(indices))
        return float(sum(
            math.log(card)
            for var, card in enumerate(self.cardinalities)
            if var not in touched
        ))

    def with_kernel(self, index: int, kernel: Kernel) -> "InferenceProblem":
        """Return a copy with the kernel at ``index`` replaced."""
        kernels = list(self.kernels)
        kernels[index] = kernel
        return InferenceProblem(self.cardinalities, tuple(kernels), self.name)

    def to_dict(self) -> Dict[str, Any]:
        """Convert problem to a dictionary for model files."""
        return {
            "name": self.name,
            "num_vars": self.num_vars,
            "cardinalities": list(self.cardinalities),
            "kernels": [kernel.to_dict() for kernel in self.kernels],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InferenceProblem":
        """Create problem from a model-file mapping."""
        cardinalities = [int(c) for c in data["cardinalities"]]
        if "num_vars" in data and int(data["num_vars"]) != len(cardinalities):
            raise StructuralError(
                f"num_vars={data['num_vars']} but {len(cardinalities)} cardinalities given"
            )
        kernels = [Kernel.from_dict(item, cardinalities) for item in data["kernels"]]
        return cls(tuple(cardinalities), tuple(kernels), str(data.get("name", "model")))


@dataclass(frozen=True, order=True)
class Edge:
    """An undirected junction-graph edge ``u - v`` carrying label L(e)."""

    u: int
    v: int
    label: Scope

    def __post_init__(self):
        object.__setattr__(self, "u", int(self.u))
        object.__setattr__(self, "v", int(self.v))
        object.__setattr__(self, "label", tuple(sorted(_as_scope(self.label))))

    def to_dict(self) -> Dict[str, Any]:
        return {"u": self.u, "v": self.v, "label": list(self.label)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Edge":
        return cls(data["u"], data["v"], data["label"])


@dataclass(frozen=True, eq=False)
class JunctionGraph:
    """Labelled graph whose vertices are in bijection with a problem's kernels."""

    vertex_labels: Tuple[Scope, ...]
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "vertex_labels", tuple(tuple(sorted(_as_scope(l))) for l in self.vertex_labels)
        )
        object.__setattr__(self, "edges", tuple(self.edges))

    @classmethod
    def for_problem(
        cls,
        problem: InferenceProblem,
        edges: Iterable[Edge] = ()
    ) -> "JunctionGraph":
        """Junction graph whose vertex labels are the problem's kernel scopes."""
        return cls(tuple(kernel.scope for kernel in problem.kernels), tuple(edges))

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_labels)

    @property
    def vertex_ids(self) -> Tuple[int, ...]:
        return tuple(range(self.num_vertices))

    @property
    def edge_ids(self) -> Tuple[int, ...]:
        return tuple(range(len(self.edges)))

    def label(self, vertex: int) -> Scope:
        return self.vertex_labels[vertex]

    def full_view(self) -> "GraphView":
        return GraphView(self, self.vertex_ids, self.edge_ids)

    def to_networkx(self) -> nx.Graph:
        return self.full_view().to_networkx()

    def edges_to_dicts(self) -> List[Dict[str, Any]]:
        return [edge.to_dict() for edge in self.edges]


@dataclass(frozen=True, eq=False)
class GraphView:
    """A vertex/edge restriction of a junction graph.

    Vertex and edge ids are those of the parent graph. Labels are inherited
    unchanged.
    """

    parent: JunctionGraph
    vertex_subset: Tuple[int, ...]
    edge_subset: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertex_subset", tuple(sorted(int(v) for v in self.vertex_subset)))
        object.__setattr__(self, "edge_subset", tuple(sorted(int(e) for e in self.edge_subset)))

    @property
    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Ordering key: vertex subset first, then edge subset."""
        return (self.vertex_subset, self.edge_subset)

    @property
    def identifier(self) -> str:
        vertices = ",".join(str(v) for v in self.vertex_subset)
        edges = ",".join(str(e) for e in self.edge_subset)
        return f"v[{vertices}]e[{edges}]"

    def label(self, vertex: int) -> Scope:
        return self.parent.vertex_labels[vertex]

    def edge(self, edge_id: int) -> Edge:
        return self.parent.edges[edge_id]

    @cached_property
    def edge_items(self) -> Tuple[Tuple[int, Edge], ...]:
        return tuple((e, self.parent.edges[e]) for e in self.edge_subset)

    @cached_property
    def neighbors(self) -> Dict[int, List[Tuple[int, int]]]:
        """vertex -> list of (neighbor vertex, edge id)."""
        adjacency: Dict[int, List[Tuple[int, int]]] = {v: [] for v in self.vertex_subset}
        for edge_id, edge in self.edge_items:
            adjacency[edge.u].append((edge.v, edge_id))
            adjacency[edge.v].append((edge.u, edge_id))
        return adjacency

    @cached_property
    def variables(self) -> Scope:
        """Variables appearing in any vertex label of the view."""
        seen = set()
        for vertex in self.vertex_subset:
            seen.update(self.label(vertex))
        return tuple(sorted(seen))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertex_subset)
        for edge_id, edge in self.edge_items:
            graph.add_edge(edge.u, edge.v, id=edge_id, label=edge.label)
        return graph

    def is_tree(self) -> bool:
        return bool(self.vertex_subset) and nx.is_tree(self.to_networkx())


@dataclass(frozen=True, eq=False)
class SubTree(GraphView):
    """A sub-junction-tree: a restriction that is itself a junction tree.

    Build instances with :func:`subtree_bounds.model.junction.extract_subtree`.
    """

    @property
    def kernel_subset(self) -> Tuple[int, ...]:
        """Indices of the kernels R_T (vertices are in bijection with kernels)."""
        return self.vertex_subset
