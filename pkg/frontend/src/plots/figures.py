"""Render purification-sweep and stabilisation-trajectory CSV files to figures.

The renderer is read-only over its input and writes one image per call.  SVG
output is byte-stable for a fixed input file: the id hash salt is pinned and
the date metadata field is dropped, so re-rendering the same CSV reproduces
the same bytes.

Three figure kinds are supported:

- RATIO_VS_M_BY_P: log-log purification ratio vs copy count, one colour per
  input rate p.  Finite-dimension rows become point series, infinite-dimension
  rows become curves, and a solid black e/M valley reference line is drawn.
- RATIO_VS_M_BY_D: the same axes keyed by local dimension d, no reference
  line.
- ZENO_TRAJ: fidelity and cumulative acceptance against step count on linear
  axes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

RATIO_VS_M_BY_P = "RATIO_VS_M_BY_P"
RATIO_VS_M_BY_D = "RATIO_VS_M_BY_D"
ZENO_TRAJ = "ZENO_TRAJ"
KINDS = (RATIO_VS_M_BY_P, RATIO_VS_M_BY_D, ZENO_TRAJ)

_RATIO_COLUMNS = ("p", "d", "M", "ratio")
_ZENO_COLUMNS = ("step", "fidelity", "cumulative_accept")

_SVG_HASHSALT = "qpurify-plots"


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: which CSV, which kind of panel, where to save."""

    input_csv: str
    kind: str
    output: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}; expected one of {', '.join(KINDS)}"
            )


def _read_rows(path, required):
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames
        rows = list(reader)
    missing = list(required) if fields is None else [c for c in required if c not in fields]
    if missing:
        raise ValueError(f"missing columns: {', '.join(missing)}")
    return rows


def _group_ratio_rows(rows, key_column):
    """Split rows into finite-d point data and d=inf curve data, per key."""
    points = {}
    curves = {}
    for row in rows:
        m = float(row["M"])
        ratio = float(row["ratio"])
        if m <= 0.0 or ratio <= 0.0:
            raise ValueError(
                "log axes require strictly positive data; "
                f"got M={row['M']} ratio={row['ratio']}"
            )
        key = float(row[key_column])
        bucket = curves if math.isinf(float(row["d"])) else points
        bucket.setdefault(key, []).append((m, ratio))
    return points, curves


def _render_ratio(ax, rows, key_column, with_reference):
    points, curves = _group_ratio_rows(rows, key_column)
    keys = sorted(set(points) | set(curves))
    plotted = []
    for i, key in enumerate(keys):
        if key not in points:
            continue
        data = sorted(points[key])
        (line,) = ax.plot(
            [m for m, _ in data],
            [r for _, r in data],
            linestyle="none",
            marker="o",
            markersize=4,
            color=f"C{i % 10}",
            label=f"{key_column}={key:g}",
        )
        plotted.append(("points", key, line))
    for i, key in enumerate(keys):
        if key not in curves:
            continue
        data = sorted(curves[key])
        label = f"{key_column}={key:g}" + (", d=inf" if key_column == "p" else "")
        (line,) = ax.plot(
            [m for m, _ in data],
            [r for _, r in data],
            linestyle="-",
            color=f"C{i % 10}",
            label=label,
        )
        plotted.append(("curve", key, line))
    if with_reference:
        all_m = [m for data in (*points.values(), *curves.values()) for m, _ in data]
        if all_m:
            xs = np.geomspace(min(all_m), max(all_m), 256)
            (line,) = ax.plot(
                xs, np.e / xs, color="black", linewidth=1.0, label="e/M reference"
            )
            plotted.append(("reference", None, line))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("copies M")
    ax.set_ylabel("purification ratio")
    if plotted:
        ax.legend(fontsize=8)
    return plotted


def _render_zeno(ax, rows):
    if not rows:
        return []
    steps = [float(row["step"]) for row in rows]
    plotted = []
    for column, label in (("fidelity", "fidelity"), ("cumulative_accept", "cumulative accept")):
        (line,) = ax.plot(steps, [float(row[column]) for row in rows], label=label)
        plotted.append(("curve", None, line))
    ax.set_xlabel("step")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    return plotted


def _save(fig, output):
    out = Path(output)
    with matplotlib.rc_context({"svg.hashsalt": _SVG_HASHSALT}):
        if out.suffix.lower() == ".svg":
            fig.savefig(out, metadata={"Date": None})
        else:
            fig.savefig(out)


def render(spec: FigureSpec):
    """Write the requested figure and return the plotted series.

    The return value is a list of dicts with keys role (points, curve or
    reference), key (the p or d value the series belongs to, None for the
    reference and trajectory series), label, x and y.  Coordinates are read
    back from the placed artists, so they are exactly what the figure shows.
    A header-only CSV yields an empty-axes figure and an empty list.
    """
    if spec.kind == ZENO_TRAJ:
        rows = _read_rows(spec.input_csv, _ZENO_COLUMNS)
    else:
        rows = _read_rows(spec.input_csv, _RATIO_COLUMNS)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    try:
        if spec.kind == ZENO_TRAJ:
            plotted = _render_zeno(ax, rows)
        else:
            key_column = "p" if spec.kind == RATIO_VS_M_BY_P else "d"
            plotted = _render_ratio(
                ax, rows, key_column, with_reference=spec.kind == RATIO_VS_M_BY_P
            )
        _save(fig, spec.output)
    finally:
        plt.close(fig)
    return [
        {
            "role": role,
            "key": key,
            "label": line.get_label(),
            "x": [float(v) for v in line.get_xdata()],
            "y": [float(v) for v in line.get_ydata()],
        }
        for role, key, line in plotted
    ]
