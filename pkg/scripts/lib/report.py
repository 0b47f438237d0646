"""Serialization shared by the shapeinv CLI: JSON envelope, CSV and text tables.

JSON output is deterministic: keys keep insertion order, floats are printed
with 17 significant digits, non-finite floats become null and Fractions
become "p/q" strings.
"""

import csv
import io
import json
import math
import os
import tempfile
from fractions import Fraction

import numpy as np

from lib.rational_poly import format_rational

SCHEMA_VERSION = 1


def plain(obj):
    """Reduce report objects, numpy values and Fractions to JSON-ready data."""
    if hasattr(obj, "to_dict"):
        return plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _float_text(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text for plain(obj)."""
    return _encode(plain(obj), indent, 0)


def _encode(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float_text(obj)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def envelope(command: str, run_config: dict, results, ok: bool, exit_code: int) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": run_config,
        "ok": ok,
        "exitCode": exit_code,
        "results": results,
    }


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_float_text(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def text_table(header, rows) -> str:
    """Fixed-width summary table."""
    cells = [[str(h) for h in header]] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return "-" if not math.isfinite(v) else f"{v:.6g}"
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def atomic_write_text(path, text):
    """Write text to path atomically via temp file + rename."""
    dir_name = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=dir_name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise
