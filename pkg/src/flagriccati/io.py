"""Trajectory serialization: CSV with 17 significant digits, or JSON."""
from __future__ import annotations

import csv
import io
import json

import numpy as np

from .dynamics import Trajectory


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def state_names(traj: Trajectory) -> list[str]:
    if traj.kind == "full":
        return ["U"]
    if traj.kind == "grassmann":
        return ["Z"]
    return ["X", "Y", "Z"]


def _state_blocks(traj: Trajectory, k: int) -> list[np.ndarray]:
    s = traj.states[k]
    return [s] if traj.kind == "full" else list(s.blocks)


def columns(traj: Trajectory) -> dict[str, np.ndarray]:
    """Flat real-valued columns, ``t`` first, then ``re_/im_<name>_<i>_<j>``."""
    cols: dict[str, np.ndarray] = {"t": traj.times}
    names = state_names(traj)
    series = [np.stack([_state_blocks(traj, k)[b] for k in range(len(traj))])
              for b in range(len(names))]
    for name, arr in zip(names, series):
        for i in range(arr.shape[1]):
            for j in range(arr.shape[2]):
                cols[f"re_{name}_{i}_{j}"] = arr[:, i, j].real
                cols[f"im_{name}_{i}_{j}"] = arr[:, i, j].imag
    for key in ("unitarity_defect", "chart_condition"):
        if key in traj.diagnostics:
            cols[key] = np.asarray(traj.diagnostics[key], dtype=float)
    return cols


def to_csv(traj: Trajectory) -> str:
    cols = columns(traj)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in zip(*cols.values()):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def to_json(traj: Trajectory) -> str:
    return json.dumps({
        "kind": traj.kind,
        "partition": list(traj.partition.sizes),
        "columns": {k: [float(x) for x in v] for k, v in columns(traj).items()},
    }, indent=1)


def dumps(traj: Trajectory, fmt: str = "csv") -> str:
    if fmt == "csv":
        return to_csv(traj)
    if fmt == "json":
        return to_json(traj)
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(text: str) -> dict[str, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body]).reshape(len(body), len(header))
    return {name: data[:, k] for k, name in enumerate(header)}
