"""Structured (JSON lines) and human-readable report rendering."""

import json
import math
from typing import Any, Dict, List, Sequence

import numpy as np

from .extended import format_ext


def json_value(value: Any) -> Any:
    """Make ``value`` JSON-safe; non-finite floats become ``+inf``/``-inf``/``nan`` strings."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_ext(value)
    if isinstance(value, np.ndarray):
        return json_value(value.tolist())
    if isinstance(value, dict):
        return {str(k): json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_value(v) for v in value]
    return value


def to_json_line(record: Dict[str, Any]) -> str:
    """One record per line, keys in insertion order."""
    return json.dumps(json_value(record), ensure_ascii=False, allow_nan=False)


def format_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Left-aligned text table with a rule under the header."""
    cells: List[List[str]] = [[str(h) for h in headers]]
    cells += [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines)
