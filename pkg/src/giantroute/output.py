"""
Tabular results and their CSV / JSON serialization.

Numbers are written with 12 significant digits and LF line endings so that
identical runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


@dataclass
class Table:
    """Named columns, row tuples, and free-form metadata."""

    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])

    def __len__(self):
        return len(self.rows)


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, str):
        return x
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def table_to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def table_to_json(table: Table) -> str:
    doc = {
        "metadata": _jsonable(table.metadata),
        "columns": {name: [_json_value(row[i]) for row in table.rows]
                    for i, name in enumerate(table.columns)},
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if obj is None or isinstance(obj, str):
        return obj
    return _json_value(obj)


def read_csv(path) -> Table:
    """Read back a CSV written by :func:`write_table`; numeric cells become floats."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [tuple(_parse_cell(c) for c in row) for row in reader]
    return Table(columns, rows)


def _parse_cell(cell):
    try:
        return float(cell)
    except ValueError:
        return cell


def write_table(table: Table, path, fmt: str = "csv") -> Path:
    """Write ``table`` to ``path``, appending ``.csv`` / ``.json`` if missing."""
    path = Path(path)
    if path.suffix != "." + fmt:
        path = path.with_name(path.name + "." + fmt)
    if fmt == "csv":
        text = table_to_csv(table)
    elif fmt == "json":
        text = table_to_json(table)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    return path


def routing_table(result, metadata=None) -> Table:
    """One-row table holding the seven partition fields plus t_final."""
    d = result.as_dict()
    return Table(list(d), [tuple(d.values())], dict(metadata or {}))


def heatmap_table(traj, site_window=None, metadata=None) -> Table:
    """Long-form (t, m, lattice, probability) rows for every snapshot."""
    sites = traj.grid.sites
    mask = np.ones(len(sites), dtype=bool)
    if site_window is not None:
        lo, hi = site_window
        mask = (sites >= lo) & (sites <= hi)
    rows = []
    for t, pa, pb in zip(traj.times, traj.prob_a, traj.prob_b):
        for lattice, p in (("a", pa), ("b", pb)):
            rows.extend((t, int(m), lattice, prob) for m, prob in zip(sites[mask], p[mask]))
    return Table(["t", "m", "lattice", "probability"], rows, dict(metadata or {}))


def series_table(traj, n_sep=None, metadata=None) -> Table:
    """Per-snapshot scalars: atomic populations, norm, theta and (optionally) window weights."""
    columns = ["t", "theta", "P_e", "P_f", "norm"]
    cols = [traj.times, traj.theta, traj.p_e, traj.p_f, traj.norm]
    if n_sep is not None:
        win_a, win_b = traj.window_weight(0, n_sep)
        columns += ["P_C_a", "P_C_b", "P_C_total"]
        cols += [win_a, win_b, win_a + win_b]
    rows = list(zip(*[c.tolist() for c in cols]))
    return Table(columns, rows, dict(metadata or {}))


def write_outputs(obj, path, fmt: str = "csv", **kwargs) -> list:
    """
    Serialize a :class:`Table`, a routing result or a trajectory.

    Trajectories produce two files: ``<path>_heatmap`` and ``<path>_series``.
    Returns the list of written paths.

    Raises
    ------
    OSError
        If the destination cannot be written.
    """
    from .dynamics import RoutingResult, Trajectory

    path = Path(path)
    if isinstance(obj, Table):
        return [write_table(obj, path, fmt)]
    if isinstance(obj, RoutingResult):
        return [write_table(routing_table(obj, kwargs.get("metadata")), path, fmt)]
    if isinstance(obj, Trajectory):
        meta = kwargs.get("metadata")
        heat = heatmap_table(obj, kwargs.get("site_window"), meta)
        series = series_table(obj, kwargs.get("n_sep"), meta)
        return [write_table(heat, path.with_name(path.name + "_heatmap"), fmt),
                write_table(series, path.with_name(path.name + "_series"), fmt)]
    raise TypeError(f"cannot serialize {type(obj).__name__}")
