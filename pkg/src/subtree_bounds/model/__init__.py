"""Factored inference problems, junction graphs and model files."""

from .models import Edge, GraphView, InferenceProblem, JunctionGraph, Kernel, SubTree
from .junction import (
    ValidationResult,
    Violation,
    check_subtree,
    extract_subtree,
    first_broken_label,
    is_junction_tree,
    validate_junction_graph,
)
from .io import ModelDocument, emit_problem, load_problem, parse_problem, save_problem

__all__ = [
    "Edge",
    "GraphView",
    "InferenceProblem",
    "JunctionGraph",
    "Kernel",
    "SubTree",
    "ValidationResult",
    "Violation",
    "check_subtree",
    "extract_subtree",
    "first_broken_label",
    "is_junction_tree",
    "validate_junction_graph",
    "ModelDocument",
    "emit_problem",
    "load_problem",
    "parse_problem",
    "save_problem",
]
