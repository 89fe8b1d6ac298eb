"""Model file loading and emission (YAML documents)."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from ..exceptions import ModelParseError
from .models import Edge, InferenceProblem, JunctionGraph

logger = logging.getLogger(__name__)


@dataclass
class ModelDocument:
    """A parsed model file: the problem, its junction graph, metadata.

    Without an 'edges' key the graph is the edgeless one, a valid junction
    tree when the problem has a single kernel; ``edges_given`` records which.
    """

    problem: InferenceProblem
    graph: Optional[JunctionGraph] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    edges_given: bool = True


def parse_problem(text: str) -> ModelDocument:
    """
    Parse a model document.

    Args:
        text: YAML text with num_vars, cardinalities, kernels and optional edges

    Returns:
        ModelDocument

    Raises:
        ModelParseError: If the text is not a well-formed model document
        InvalidModelError: If the document parses but breaks a model invariant
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ModelParseError(f"Model document is not valid YAML: {e}") from e

    if not isinstance(raw, dict):
        raise ModelParseError("Model document must be a mapping")
    for key in ("cardinalities", "kernels"):
        if key not in raw:
            raise ModelParseError(f"Model document is missing '{key}'")
    if not isinstance(raw["kernels"], list) or not all(isinstance(k, dict) for k in raw["kernels"]):
        raise ModelParseError("'kernels' must be a list of {scope, table} mappings")

    try:
        problem = InferenceProblem.from_dict(raw)
        edges_given = raw.get("edges") is not None
        edges = [Edge.from_dict(item) for item in raw["edges"]] if edges_given else []
        graph = JunctionGraph.for_problem(problem, edges)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelParseError(f"Malformed model document: {e!r}") from e

    metadata = raw.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise ModelParseError("'metadata' must be a mapping")
    return ModelDocument(problem=problem, graph=graph, metadata=metadata, edges_given=edges_given)


def load_problem(model_path: str) -> ModelDocument:
    """
    Load a model file from disk.

    Raises:
        FileNotFoundError: If the file doesn't exist
    """
    path = Path(model_path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {model_path}")

    document = parse_problem(path.read_text(encoding="utf-8"))
    logger.info(
        f"Model '{document.problem.name}' loaded from {model_path}: "
        f"{document.problem.num_vars} variables, {document.problem.num_kernels} kernels"
    )
    return document


def emit_problem(
    problem: InferenceProblem,
    graph: Optional[JunctionGraph] = None,
    metadata: Optional[Dict[str, Any]] = None
) -> str:
    """Serialize a problem (and graph) to YAML; floats keep their exact repr."""
    data = problem.to_dict()
    if graph is not None:
        data["edges"] = graph.edges_to_dicts()
    if metadata:
        data["metadata"] = dict(metadata)
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def save_problem(
    model_path: str,
    problem: InferenceProblem,
    graph: Optional[JunctionGraph] = None,
    metadata: Optional[Dict[str, Any]] = None
) -> None:
    """Write a model file."""
    Path(model_path).write_text(emit_problem(problem, graph, metadata), encoding="utf-8")
    logger.info(f"Model '{problem.name}' written to {model_path}")
