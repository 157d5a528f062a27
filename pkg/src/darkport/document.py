"""Machine-readable output documents.

Every command emits one document that echoes its fully resolved inputs,
carries unit-tagged results and lists any warnings, so a result can be
reproduced from the document alone.  Floats are serialized with 17
significant digits (lossless double round-trip) by a deterministic
renderer: the same document always produces the same bytes.
"""

from __future__ import annotations

import csv
import io
import math

SCHEMA_VERSION = "1.0"

__all__ = [
    "SCHEMA_VERSION",
    "result",
    "build_document",
    "format_float",
    "render_json",
    "render_scalar_csv",
    "render_table_csv",
]


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return format(x, ".17g")


def result(value, unit: str) -> dict:
    """One named result: a value (scalar or list) with its unit string."""
    return {"value": value, "unit": unit}


def build_document(command: str, inputs: dict, results: dict, warnings=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "warnings": list(warnings or []),
    }


def _render(obj, out: list, indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"document keys must be strings, got {key!r}")
            out.append(f'{pad_in}"{_escape(key)}": ')
            _render(value, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(obj):
            out.append(pad_in)
            _render(value, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(f'"{_escape(obj)}"')
    elif obj is None:
        out.append("null")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} into a document")


def _escape(s: str) -> str:
    return (
        s.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def render_json(doc: dict, indent: int = 2) -> str:
    out: list = []
    _render(doc, out, indent, 0)
    out.append("\n")
    return "".join(out)


def _stringify(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def render_scalar_csv(doc: dict) -> str:
    """Flatten a scalar-results document into name,value,unit rows."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(("name", "value", "unit"))
    for name, entry in doc["results"].items():
        writer.writerow((name, _stringify(entry["value"]), entry["unit"]))
    return buf.getvalue()


def render_table_csv(header, rows) -> str:
    """RFC-4180-style table; header row mandatory, '.' decimals always."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_stringify(v) for v in row])
    return buf.getvalue()
