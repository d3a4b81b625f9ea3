"""Deterministic report serialization.

JSON reports are rendered with a small recursive writer rather than the
stdlib encoder so that every float carries 17 significant digits (lossless
double round-trip, stable golden files).  Objects keep insertion order,
lists are laid out inline, and non-finite floats are rejected: a report must
never contain NaN or infinity.
"""

from __future__ import annotations

import json
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = ["SCHEMA_VERSION", "render_json", "render_csv", "format_float"]

SCHEMA_VERSION = 1


def format_float(value: float) -> str:
    """17-significant-digit decimal form; round-trips to the same double."""
    if not np.isfinite(value):
        raise ValueError(f"non-finite float in report: {value!r}")
    return f"{value:.17g}"


def _render(obj, indent: int, pieces: "list[str]") -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"report keys must be strings, got {key!r}")
            pieces.append(f"{pad}  {json.dumps(key)}: ")
            _render(value, indent + 1, pieces)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        pieces.append("[")
        for i, value in enumerate(items):
            _render(value, indent, pieces)
            if i < len(items) - 1:
                pieces.append(", ")
        pieces.append("]")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        pieces.append("true" if obj else "false")
    elif obj is None:
        pieces.append("null")
    elif isinstance(obj, (int, np.integer)):
        pieces.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        pieces.append(format_float(float(obj)))
    elif isinstance(obj, str):
        pieces.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def render_json(payload: dict) -> str:
    """Render a report dict as deterministic JSON text (trailing newline)."""
    pieces: "list[str]" = []
    _render(payload, 0, pieces)
    pieces.append("\n")
    return "".join(pieces)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    raise TypeError(f"cannot place {type(value).__name__} in a CSV cell")


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Simple comma-separated rendering with newline line endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(value) for value in row))
    return "\n".join(lines) + "\n"
