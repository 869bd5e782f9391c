"""CSV and JSON serialization of benchmark, stress and trace reports.

Column order is fixed. Floats are written with ``repr`` so values round-trip
exactly and output is byte-stable for identical inputs.
"""

import csv
import io
import json
import platform

import numpy as np

from . import __version__
from .benchmark import RmseReport


def versions():
    return {"mcckf": __version__, "numpy": np.__version__, "python": platform.python_version()}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def _jsonable(v):
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def benchmark_columns(n):
    return ["filter", "estimate_kind"] + [f"rmse_x{i + 1}" for i in range(n)] + [
        "rmse_norm2", "sigma", "steps", "runs", "seed",
    ]


def benchmark_rows(reports, sigma, seed):
    """Flatten ``{kind: (prior, posterior)}`` into ordered rows, a priori rows first."""
    rows = []
    for idx in (0, 1):
        for kind, pair in reports.items():
            rep = pair[idx]
            row = {"filter": kind, "estimate_kind": rep.estimate_kind}
            for i, v in enumerate(rep.per_component):
                row[f"rmse_x{i + 1}"] = float(v)
            row.update(rmse_norm2=rep.norm2, sigma=sigma, steps=rep.steps, runs=rep.runs, seed=seed)
            rows.append(row)
    return rows


def rows_from_report(rows):
    """Parse benchmark rows (as read back from JSON) into ``RmseReport`` values."""
    out = []
    for row in rows:
        comps = []
        i = 1
        while f"rmse_x{i}" in row:
            comps.append(float(row[f"rmse_x{i}"]))
            i += 1
        out.append(RmseReport(np.array(comps), float(row["rmse_norm2"]), int(row["runs"]),
                              int(row["steps"]), row["estimate_kind"], row["filter"]))
    return out


def to_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(columns, rows, metadata):
    doc = {
        "metadata": {k: _jsonable(v) for k, v in metadata.items()},
        "columns": list(columns),
        "rows": [{c: _jsonable(row.get(c)) for c in columns} for row in rows],
    }
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def render(fmt, columns, rows, metadata):
    if fmt == "csv":
        return to_csv(columns, rows)
    if fmt == "json":
        return to_json(columns, rows, metadata)
    raise ValueError(f"unknown format {fmt!r}")
