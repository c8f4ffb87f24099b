"""Deterministic JSON and float formatting for data artifacts.

Numbers are printed with 17 significant digits, enough for an exact float64
round trip, so identical inputs always produce byte-identical files.
Non-finite floats become JSON null.
"""

from __future__ import annotations

import json as _json
import math

import numpy as np

__all__ = ["dumps", "format_float"]


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def dumps(document) -> str:
    parts: list[str] = []
    _emit(document, parts)
    return "".join(parts)


def _emit(node, out: list[str]) -> None:
    if node is None:
        out.append("null")
    elif isinstance(node, (bool, np.bool_)):
        out.append("true" if node else "false")
    elif isinstance(node, str):
        out.append(_json.dumps(node))
    elif isinstance(node, (int, np.integer)):
        out.append(str(int(node)))
    elif isinstance(node, (float, np.floating)):
        out.append(format_float(node) if math.isfinite(node) else "null")
    elif isinstance(node, dict):
        out.append("{")
        for i, (key, value) in enumerate(node.items()):
            if i:
                out.append(", ")
            out.append(_json.dumps(str(key)))
            out.append(": ")
            _emit(value, out)
        out.append("}")
    elif isinstance(node, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(node):
            if i:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(node).__name__}")
