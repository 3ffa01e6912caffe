#!/usr/bin/env python3
"""Render plots from the sweep/spectrum CSV files produced by the cdh CLI.

Pure file-to-file post-processing: no physics is computed here beyond the
min/max needed for color scales, and the primary toolkit is never invoked.

Usage: render.py --spec <json>

The spec document selects one figure kind and names its input/output:

    {"kind": "heatmap", "input": "sweep.csv", "output": "phase.png",
     "observable": "mz", "title": "...", "xlabel": "...", "ylabel": "..."}

Kinds: "lines" (energy levels vs coupling), "log_error" (deviation column on
a log axis), "heatmap" (order parameter over the coupling/splitting plane),
"cuts" (one curve per splitting value).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

SPECTRUM_COLUMNS = (
    "lambda_over_omega", "delta_over_omega", "representation", "M_or_N", "nu",
    "energy", "abs_dev_vs_ref",
)
SWEEP_COLUMNS = (
    "lambda_over_omega", "delta_over_omega", "representation", "M_or_N", "M_P",
    "L", "gamma_x", "gamma_y", "gamma_z", "observable", "value", "wall_time_ms",
)
REQUIRED = {
    "lines": SPECTRUM_COLUMNS,
    "log_error": SPECTRUM_COLUMNS,
    "heatmap": SWEEP_COLUMNS,
    "cuts": SWEEP_COLUMNS,
}


class SchemaError(Exception):
    pass


def load_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            fieldnames = reader.fieldnames or []
            missing = [column for column in required if column not in fieldnames]
            if missing:
                raise SchemaError(f"{path} is missing required column(s): {', '.join(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path} has no rows")
    return rows


def _finite(rows, column):
    values = []
    for row in rows:
        value = float(row[column])
        if math.isfinite(value):
            values.append((row, value))
    if not values:
        raise SchemaError(f"column {column!r} has no finite values")
    return values


def _new_axes(spec):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
    ax.set_xlabel(spec.get("xlabel", "lambda / Omega"))
    ax.set_ylabel(spec.get("ylabel", ""))
    if spec.get("title"):
        ax.set_title(spec["title"])
    return fig, ax


def _filter(rows, spec, key):
    wanted = spec.get(key)
    column = {"representation": "representation", "observable": "observable"}[key]
    return [row for row in rows if wanted is None or row[column] == wanted]


def render_lines(rows, spec):
    fig, ax = _new_axes(spec)
    rows = _filter(rows, spec, "representation")
    groups: dict[tuple, list] = {}
    for row, energy in _finite(rows, "energy"):
        groups.setdefault((row["representation"], int(row["nu"])), []).append(
            (float(row["lambda_over_omega"]), energy)
        )
    for (representation, nu), points in sorted(groups.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points],
                label=f"{representation} nu={nu}")
    ax.set_ylabel(spec.get("ylabel", "energy"))
    ax.legend(fontsize=7)
    return fig


def render_log_error(rows, spec):
    fig, ax = _new_axes(spec)
    rows = [row for row in rows if row["representation"] == spec.get("representation", "cdh")]
    groups: dict[int, list] = {}
    for row, dev in _finite(rows, "abs_dev_vs_ref"):
        groups.setdefault(int(row["nu"]), []).append((float(row["lambda_over_omega"]), dev))
    if not groups:
        raise SchemaError("no finite deviation values to plot")
    floor = spec.get("floor", 1e-17)
    for nu, points in sorted(groups.items()):
        points.sort()
        ax.semilogy([p[0] for p in points], [max(p[1], floor) for p in points], label=f"nu={nu}")
    ax.set_ylabel(spec.get("ylabel", "absolute deviation"))
    ax.legend(fontsize=7)
    return fig


def render_heatmap(rows, spec):
    rows = _filter(_filter(rows, spec, "observable"), spec, "representation")
    if not rows:
        raise SchemaError("no rows left after observable/representation filters")
    pairs = _finite(rows, "value")
    xs = sorted({float(row["lambda_over_omega"]) for row, _ in pairs})
    ys = sorted({float(row["delta_over_omega"]) for row, _ in pairs})
    grid = np.full((len(ys), len(xs)), np.nan)
    for row, value in pairs:
        ix = xs.index(float(row["lambda_over_omega"]))
        iy = ys.index(float(row["delta_over_omega"]))
        grid[iy, ix] = value
    fig, ax = _new_axes(spec)
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest")
    ax.set_ylabel(spec.get("ylabel", "Delta / Omega"))
    fig.colorbar(mesh, ax=ax, label=spec.get("observable", "value"))
    return fig


def render_cuts(rows, spec):
    rows = _filter(_filter(rows, spec, "observable"), spec, "representation")
    if not rows:
        raise SchemaError("no rows left after observable/representation filters")
    fig, ax = _new_axes(spec)
    groups: dict[float, list] = {}
    for row, value in _finite(rows, "value"):
        groups.setdefault(float(row["delta_over_omega"]), []).append(
            (float(row["lambda_over_omega"]), value)
        )
    for delta_over, points in sorted(groups.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], label=f"Delta/Omega={delta_over:g}")
    ax.set_ylabel(spec.get("ylabel", spec.get("observable", "value")))
    ax.legend(fontsize=7)
    return fig


RENDERERS = {
    "lines": render_lines,
    "log_error": render_log_error,
    "heatmap": render_heatmap,
    "cuts": render_cuts,
}


def render(spec: dict) -> str:
    kind = spec.get("kind")
    if kind not in RENDERERS:
        raise SchemaError(f"unknown figure kind {kind!r}; expected one of {sorted(RENDERERS)}")
    for field in ("input", "output"):
        if not spec.get(field):
            raise SchemaError(f"figure spec is missing {field!r}")
    rows = load_rows(spec["input"], REQUIRED[kind])
    fig = RENDERERS[kind](rows, spec)
    fig.savefig(spec["output"], metadata={"Software": "cdh-figures"})
    plt.close(fig)
    return spec["output"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="render cdh CSV outputs")
    parser.add_argument("--spec", required=True, help="JSON figure specification")
    args = parser.parse_args(argv)
    try:
        with open(args.spec) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot load figure spec: {exc}", file=sys.stderr)
        return 1
    try:
        output = render(spec)
    except SchemaError as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return 1
    print(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
