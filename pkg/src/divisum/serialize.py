"""Deterministic serialization for reports.

JSON output writes every float as a decimal literal with 17 significant
digits (lossless for doubles) and every exact integer result as a decimal
string, so consumers never truncate through a 64-bit float."""

from __future__ import annotations

import math
from typing import Any

__all__ = ["format_float", "dumps_json", "csv_text"]


def format_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite value {v} cannot be serialized")
    return format(float(v), ".17g")


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def _write(obj: Any, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(f'"{_escape(obj)}"')
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                parts.append(",")
            parts.append(f'"{_escape(str(k))}":')
            _write(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, v in enumerate(obj):
            if i:
                parts.append(",")
            _write(v, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj: Any) -> str:
    """Compact JSON with 17-significant-digit float literals; key order is
    insertion order, so identical inputs give byte-identical output."""
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def csv_text(rows: list[list[str]]) -> str:
    """Rows of pre-formatted cells joined with commas and newline \\n."""
    return "".join(",".join(row) + "\n" for row in rows)
