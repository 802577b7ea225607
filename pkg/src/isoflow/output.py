"""CSV/JSON writers.  Every file carries the tool version and the run config."""
from __future__ import annotations

import json
import os

import numpy as np

from . import __version__

TOOL = "isoflow"


def fmt(v) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(v), ".17g")


def header_line(config: dict) -> str:
    return f"# {TOOL} {__version__} " + json.dumps(config, separators=(",", ":")) + "\n"


def trajectory_csv(traj, config: dict) -> str:
    k = traj.x.shape[1]
    cols = ["t"] + [f"x{i + 1}" for i in range(k)] + ["norm_sq", "min_wall_gap", "radial_residual"]
    lines = [header_line(config), ",".join(cols) + "\n"]
    extra = np.column_stack([traj.norm_sq, traj.min_wall_gap, traj.radial_residual])
    for t, x, e in zip(traj.t, traj.x, extra):
        lines.append(",".join([fmt(t)] + [fmt(v) for v in x] + [fmt(v) for v in e]) + "\n")
    return "".join(lines)


def rows_csv(columns, rows, config: dict) -> str:
    lines = [header_line(config), ",".join(columns) + "\n"]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row) + "\n")
    return "".join(lines)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, (set, frozenset, tuple)):
        return sorted(o) if isinstance(o, (set, frozenset)) else list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def json_doc(payload: dict, config: dict) -> str:
    doc = {"tool": TOOL, "version": __version__, "config": config}
    doc.update(payload)
    return json.dumps(doc, indent=1, default=_default) + "\n"


def write_all(files: dict) -> list:
    """Write {path: text} only after everything has been rendered."""
    written = []
    for path, text in files.items():
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        written.append(path)
    return written
