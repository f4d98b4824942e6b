"""Deterministic report writers.

All numeric output is serialized with 17 significant digits so reruns of a
subcommand produce byte-identical files; JSON keys are emitted sorted.
"""

from __future__ import annotations

import json


def format_float(value: float) -> str:
    return f"{float(value):.17g}"


def _encode(obj) -> str:
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(
            f"{json.dumps(str(k))}: {_encode(v)}" for k, v in sorted(obj.items())
        )
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "tolist"):  # numpy scalars and arrays
        return _encode(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, 17-significant-digit floats)."""
    return _encode(obj) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def csv_rows(header, rows) -> str:
    """CSV text with 17-significant-digit float cells."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for name in header:
            value = row[name] if isinstance(row, dict) else row[header.index(name)]
            if isinstance(value, bool):
                cells.append("true" if value else "false")
            elif isinstance(value, float):
                cells.append(format_float(value))
            elif hasattr(value, "item"):
                cells.append(format_float(value.item())
                             if isinstance(value.item(), float) else str(value.item()))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(csv_rows(header, rows))
