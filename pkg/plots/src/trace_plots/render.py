"""Render convergence traces into overlay figures.

Input files follow the experiment runner's trace schema

    k,kind,f,g,h,grad_norm,gamma,dist

with one row per iteration; this module consumes only that CSV contract.
Output is deterministic: fixed figure geometry, a fixed SVG hash salt, and
no embedded timestamps, so re-rendering identical inputs yields identical
bytes.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "trace-plots"
matplotlib.rcParams["svg.fonttype"] = "none"

import matplotlib.pyplot as plt

TRACE_HEADER = ["k", "kind", "f", "g", "h", "grad_norm", "gamma", "dist"]
SERIES = ("f", "g", "dist", "gap")
FIGSIZE = (8.0, 5.0)
DPI = 110


class TraceFormatError(Exception):
    """The input file does not conform to the trace CSV contract."""


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple[str, ...]
    series: tuple[str, ...]
    labels: tuple[str, ...]
    output: str
    y_scale: str = "linear"
    f_star: Optional[float] = None

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input trace is required")
        if len(self.labels) != len(self.inputs):
            raise ValueError("labels must match inputs one to one")
        if not self.series:
            raise ValueError("at least one series is required")
        for s in self.series:
            if s not in SERIES:
                raise ValueError(f"unknown series {s!r}; choose from {SERIES}")
        if self.y_scale not in ("linear", "log"):
            raise ValueError("y_scale must be 'linear' or 'log'")
        if "gap" in self.series and self.f_star is None:
            raise ValueError("the gap series (f - f*) needs f_star")


def load_trace(path: str) -> dict[str, list[Optional[float]]]:
    """Parse one trace CSV, validating the schema row by row."""
    columns: dict[str, list[Optional[float]]] = {"k": [], "f": [], "g": [], "dist": []}
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != TRACE_HEADER:
                raise TraceFormatError(f"{path}: unexpected header {header!r}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(TRACE_HEADER):
                    raise TraceFormatError(f"{path}:{lineno}: truncated row")
                try:
                    columns["k"].append(float(row[0]))
                    columns["f"].append(float(row[2]))
                    columns["g"].append(float(row[3]))
                    columns["dist"].append(float(row[7]) if row[7] != "" else None)
                except ValueError:
                    raise TraceFormatError(f"{path}:{lineno}: non-numeric field")
    except OSError as err:
        raise TraceFormatError(f"{path}: {err}")
    if not columns["k"]:
        raise TraceFormatError(f"{path}: no data rows")
    return columns


def _series_values(columns, series: str, f_star: Optional[float], path: str):
    if series == "f":
        return columns["f"]
    if series == "g":
        return columns["g"]
    if series == "gap":
        return [v - f_star for v in columns["f"]]
    values = columns["dist"]
    if any(v is None for v in values):
        raise TraceFormatError(f"{path}: dist column empty; rerun with ground truth")
    return values


def render(spec: PlotSpec) -> None:
    """One figure, one curve per (input, series); log scale masks
    nonpositive values with a warning."""
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        for path, label in zip(spec.inputs, spec.labels):
            columns = load_trace(path)
            for series in spec.series:
                values = _series_values(columns, series, spec.f_star, path)
                xs = columns["k"]
                if spec.y_scale == "log":
                    clipped = sum(1 for v in values if v is not None and v <= 0.0)
                    if clipped:
                        print(
                            f"warning: {label} {series}: {clipped} nonpositive "
                            "values hidden by the log scale",
                            file=sys.stderr,
                        )
                    values = [v if v is not None and v > 0.0 else math.nan for v in values]
                ax.plot(xs, values, label=f"{label} {series}", linewidth=1.2)
        ax.set_xlabel("iteration")
        ax.set_yscale(spec.y_scale)
        ax.legend()
        ax.grid(True, alpha=0.3)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix.lower() == ".svg":
            fig.savefig(out, metadata={"Date": None})
        else:
            fig.savefig(out)
    finally:
        plt.close(fig)
