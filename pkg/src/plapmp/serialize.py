"""Deterministic JSON and CSV writers.

Floats are written with 17 significant digits ('.' decimal, no locale), keys
are sorted and no timestamps are recorded, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os

import numpy as np

from . import __version__


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def envelope(command: str, digest: str, seed, result: dict) -> dict:
    return {"command": command, "version": __version__, "config_digest": digest,
            "seed": seed, "result": result}


def table_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_num(x) for x in row])
    return buf.getvalue()


def fields_csv(domain, **fields) -> str:
    """One row per node: coordinate columns (x or x, y), then each named field."""
    coords = ["x"] if domain.dim == 1 else ["x", "y"]
    names = list(fields)
    arrays = [np.asarray(fields[k], dtype=float) for k in names]
    rows = (list(domain.coords[i]) + [a[i] for a in arrays] for i in range(domain.n_nodes))
    return table_csv(coords + names, rows)


def write_text(directory, name: str, text: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
