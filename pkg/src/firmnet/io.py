"""File emission: trajectories, spectra and phase diagrams as CSV or JSON.

Floats are written with shortest round-trip representation (exact to the
last bit on re-read).  Every artifact carries the resolved configuration
fingerprint: as a leading comment line in CSV, as a meta field in JSON.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .abm import AbmTrajectory
from .naive import NaiveTrajectory
from .phases import PhaseDiagram

__all__ = [
    "strided_indices",
    "emit_trajectory",
    "emit_spectrum",
    "emit_phase_diagram",
    "read_csv_columns",
    "trajectory_payload",
    "phase_diagram_payload",
]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def strided_indices(length: int, stride: int) -> np.ndarray:
    """Every stride-th index, endpoints always included."""
    if stride <= 1 or length <= 2:
        return np.arange(length)
    idx = np.arange(0, length, stride)
    if idx[-1] != length - 1:
        idx = np.append(idx, length - 1)
    return idx


def _write_csv(path, header, columns, fingerprint=None):
    lines = []
    if fingerprint:
        lines.append(f"# config_fingerprint: {fingerprint}")
    lines.append(",".join(header))
    n_rows = len(columns[0])
    for k in range(n_rows):
        lines.append(",".join(_fmt(col[k]) for col in columns))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a CSV written by this module back into named float columns."""
    rows = []
    header = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append([float(x) for x in line.split(",")])
    data = np.asarray(rows)
    return {name: data[:, k] for k, name in enumerate(header)}


def _trajectory_columns(traj) -> tuple[list[str], list[np.ndarray]]:
    if isinstance(traj, NaiveTrajectory):
        n = traj.prices.shape[1]
        header = (["t"] + [f"p_{i+1}" for i in range(n)]
                  + [f"gamma_{i+1}" for i in range(n)])
        columns = [traj.times] + [traj.prices[:, i] for i in range(n)] \
            + [traj.gammas[:, i] for i in range(n)]
        return header, columns
    if isinstance(traj, AbmTrajectory):
        n = traj.prices.shape[1]
        m = len(traj.times)
        pad = lambda arr: np.concatenate([[np.nan], arr])[:m]  # step series start at t=1
        header = (["t"] + [f"p_{i+1}" for i in range(n)]
                  + [f"pi_{i+1}" for i in range(n)]
                  + ["wage_inflation", "savings", "labor_supply", "labor_demand",
                     "unemployment"])
        columns = [traj.times] + [traj.prices[:, i] for i in range(n)] \
            + [traj.productions[:, i] for i in range(n)] \
            + [pad(traj.wage_inflation), traj.savings, pad(traj.labor_supply),
               pad(traj.labor_demand), pad(traj.unemployment)]
        return header, columns
    raise TypeError(f"unsupported trajectory type {type(traj)!r}")


def trajectory_payload(traj, stride: int = 1) -> dict:
    """JSON-ready dict of the (possibly downsampled) trajectory."""
    header, columns = _trajectory_columns(traj)
    idx = strided_indices(len(columns[0]), stride)
    series = {name: [None if (isinstance(v, float) and math.isnan(v)) else float(v)
                     for v in np.asarray(col)[idx]]
              for name, col in zip(header, columns)}
    payload = {"columns": header, "series": series, "status": traj.status}
    halt = getattr(traj, "halt_t", None) or getattr(traj, "halt_time", None)
    if halt is not None:
        payload["halt"] = halt
    return payload


def emit_trajectory(traj, path, fmt: str = "csv", stride: int = 1,
                    fingerprint: str | None = None, meta: dict | None = None):
    header, columns = _trajectory_columns(traj)
    idx = strided_indices(len(columns[0]), stride)
    columns = [np.asarray(col)[idx] for col in columns]
    if fmt == "csv":
        _write_csv(path, header, columns, fingerprint)
    elif fmt == "json":
        payload = trajectory_payload(traj, stride)
        payload["meta"] = dict(meta or {}, config_fingerprint=fingerprint)
        Path(path).write_text(json.dumps(payload, indent=1))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def emit_spectrum(eigenvalues: np.ndarray, path, fmt: str = "csv",
                  fingerprint: str | None = None, meta: dict | None = None):
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    if fmt == "csv":
        _write_csv(path, ["re", "im"], [eigenvalues.real, eigenvalues.imag],
                   fingerprint)
    elif fmt == "json":
        payload = {
            "eigenvalues": [[float(v.real), float(v.imag)] for v in eigenvalues],
            "meta": dict(meta or {}, config_fingerprint=fingerprint),
        }
        Path(path).write_text(json.dumps(payload, indent=1))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def phase_diagram_payload(diagram: PhaseDiagram) -> dict:
    def clean(value):
        if isinstance(value, float) and not math.isfinite(value):
            return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
        return value

    meta = json.loads(json.dumps(diagram.meta, default=str))
    return {
        "axis1": {"name": diagram.axis1_name,
                  "values": [clean(float(v)) for v in diagram.axis1_values]},
        "axis2": {"name": diagram.axis2_name,
                  "values": [clean(float(v)) for v in diagram.axis2_values]},
        "labels": diagram.labels.tolist(),
        "subtags": diagram.subtags.tolist(),
        "stats": {k: [[clean(float(x)) for x in row] for row in v]
                  for k, v in diagram.stats.items()},
        "meta": meta,
    }


def emit_phase_diagram(diagram: PhaseDiagram, path, fmt: str = "csv",
                       fingerprint: str | None = None):
    if fmt == "json":
        payload = phase_diagram_payload(diagram)
        payload["meta"]["config_fingerprint"] = fingerprint
        Path(path).write_text(json.dumps(payload, indent=1))
        return
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    header = [diagram.axis1_name, diagram.axis2_name, "label", "subtag"]
    stat_names = sorted(diagram.stats)
    header += stat_names
    rows = []
    for i, v1 in enumerate(diagram.axis1_values):
        for j, v2 in enumerate(diagram.axis2_values):
            row = [_fmt(v1), _fmt(v2), str(diagram.labels[i, j]),
                   str(diagram.subtags[i, j])]
            row += [_fmt(diagram.stats[name][i, j]) for name in stat_names]
            rows.append(",".join(row))
    lines = []
    if fingerprint:
        lines.append(f"# config_fingerprint: {fingerprint}")
    lines.append(",".join(header))
    lines.extend(rows)
    Path(path).write_text("\n".join(lines) + "\n")
