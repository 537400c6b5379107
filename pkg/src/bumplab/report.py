"""Deterministic JSON and CSV emission for scenario reports.

Floats are printed with ``%.12e``; keys are sorted; non-finite floats become
the strings ``"inf"``, ``"-inf"`` and ``"nan"``.  A report is a dict whose
``tables`` entry maps table names to lists of flat row dicts; every table
projects to one CSV file with exactly one line per row.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__

SCHEMA_VERSION = __version__
FLOAT_FMT = "%.12e"


def plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays, tuples and dataclasses to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if hasattr(obj, "to_json"):
        return plain(obj.to_json())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return plain(dataclasses.asdict(obj))
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return FLOAT_FMT % x


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = format_float(obj)
        return s if math.isfinite(obj) else json.dumps(s)
    return json.dumps(obj, ensure_ascii=False)


def dumps(obj: Any, indent: int = 2) -> str:
    """Canonical JSON text: sorted keys, ``%.12e`` floats, trailing newline."""
    return _encode(plain(obj), indent, 0) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (dict, list)):
        return dumps(v, indent=0).replace("\n", "")
    return str(v)


def table_csv(rows: list) -> str:
    """CSV text of a list of flat dicts; columns are the sorted union of keys."""
    rows = plain(rows)
    cols = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def with_schema(results: dict) -> dict:
    doc = dict(results)
    doc["schema_version"] = SCHEMA_VERSION
    doc.setdefault("tool", "bumplab")
    doc.setdefault("tables", {})
    return doc


def emit_report(results: dict, path, fmt: str = "json", table: Optional[str] = None) -> Path:
    """Write ``results`` as canonical JSON, or one of its tables as CSV.

    With ``fmt="csv"`` and no ``table`` the report must hold exactly one table.
    """
    path = Path(path)
    doc = with_schema(results)
    if fmt == "json":
        text = dumps(doc)
    elif fmt == "csv":
        tables = doc["tables"]
        if table is None:
            if len(tables) != 1:
                raise ValueError(f"report has {len(tables)} tables; name one of {sorted(tables)}")
            table = next(iter(tables))
        text = table_csv(tables[table])
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def emit_all(results: dict, out_dir, stem: str) -> list:
    """``<stem>.json`` plus ``<stem>_<table>.csv`` for every table."""
    out_dir = Path(out_dir)
    paths = [emit_report(results, out_dir / f"{stem}.json", "json")]
    for name in sorted(with_schema(results)["tables"]):
        paths.append(emit_report(results, out_dir / f"{stem}_{name}.csv", "csv", name))
    return paths
