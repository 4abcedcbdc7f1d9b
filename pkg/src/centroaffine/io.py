"""CSV and JSON serialization for fields, curves, trajectories and manifests."""
from __future__ import annotations

import csv
import io
import json

import numpy as np

from .numerics.frames import CurvatureField, CurveSamples
from .numerics.grid import Grid

FORMAT_VERSION = 1


def fmt(x: float) -> str:
    # shortest round-trip repr, so reruns are byte-identical
    return repr(float(x))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _read_table(path, prefix: str) -> tuple:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header[0] != "x" or len(header) < 2:
        raise ValueError(f"{path}: header must be x,{prefix}0,...")
    expected = [f"{prefix}{k}" for k in range(len(header) - 1)]
    if header[1:] != expected:
        raise ValueError(f"{path}: expected columns {','.join(['x'] + expected)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    return data[:, 0], data[:, 1:]


def grid_from_samples(x: np.ndarray, periodic: bool = True, rtol: float = 1e-9) -> Grid:
    if len(x) < 2:
        raise ValueError("need at least two samples")
    steps = np.diff(x)
    h = float(np.mean(steps))
    if not h > 0 or np.max(np.abs(steps - h)) > rtol * max(1.0, abs(h)) * len(x):
        raise ValueError("samples are not uniformly spaced")
    N = len(x)
    length = N * h if periodic else (N - 1) * h
    return Grid(float(x[0]), length, N, periodic)


def read_field(path, periodic: bool = True) -> CurvatureField:
    x, vals = _read_table(path, "u")
    return CurvatureField(grid_from_samples(x, periodic), vals.T)


def read_curve(path, periodic: bool = True) -> CurveSamples:
    x, vals = _read_table(path, "g")
    return CurveSamples(grid_from_samples(x, periodic), vals)


def _table_text(header, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def field_csv(field: CurvatureField) -> str:
    header = ["x"] + [f"u{k}" for k in range(field.n)]
    return _table_text(header, [field.grid.x] + list(field.u))


def curve_csv(curve: CurveSamples) -> str:
    header = ["x"] + [f"g{k}" for k in range(curve.n)]
    return _table_text(header, [curve.grid.x] + list(curve.values.T))


def write_field(path, field: CurvatureField) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(field_csv(field))


def write_curve(path, curve: CurveSamples) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(curve_csv(curve))


def trajectory_csv(traj) -> str:
    """Long format: one row per (snapshot, sample) with columns t,x,u0,..."""
    n = traj.n
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x"] + [f"u{k}" for k in range(n)])
    x = traj.grid.x
    for t, f in zip(traj.times, traj.fields):
        for i in range(traj.grid.N):
            w.writerow([fmt(t), fmt(x[i])] + [fmt(f[k, i]) for k in range(n)])
    return buf.getvalue()


def manifest(**entries) -> dict:
    out = {"format_version": FORMAT_VERSION}
    out.update(entries)
    return out
