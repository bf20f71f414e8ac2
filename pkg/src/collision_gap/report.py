"""JSON and CSV serialization with 17 significant digits for floats."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def parse_float(text: str) -> float:
    return float(text)


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        x = float(obj)
        if math.isfinite(x):
            return format_float(x)
        return '"' + format_float(x) + '"'
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text; non-finite floats become the strings
    "inf", "-inf" and "nan"."""
    return _encode(obj, indent, 0) + "\n"


def encode_omega(omega) -> str:
    if isinstance(omega, (tuple, list)):
        return ";".join(str(int(k)) for k in omega)
    return str(omega)


def decode_omega(text: str):
    if ";" in text:
        return tuple(int(k) for k in text.split(";"))
    try:
        return int(text)
    except ValueError:
        return float(text)


SWEEP_FIELDS = ["omega", "rho", "gap", "method", "residual"]


def sweep_csv(rows) -> str:
    """Rows of (omega, rho, gap, method, residual); ``omega == "min"`` marks
    the summary row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_FIELDS)
    for omega, rho, gap, method, residual in rows:
        w.writerow([
            omega if omega == "min" else encode_omega(omega),
            "" if rho is None else format_float(rho),
            format_float(gap),
            method,
            "" if residual is None else format_float(residual),
        ])
    return buf.getvalue()


def parse_sweep_csv(text: str) -> list[tuple]:
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    for r in reader:
        omega = r["omega"] if r["omega"] == "min" else decode_omega(r["omega"])
        rows.append((
            omega,
            None if r["rho"] == "" else parse_float(r["rho"]),
            parse_float(r["gap"]),
            r["method"],
            None if r["residual"] == "" else parse_float(r["residual"]),
        ))
    return rows


def table(rows, headers) -> str:
    """Plain fixed-width text table."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
