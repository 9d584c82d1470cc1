"""Delimited output, scaling fits, and figure rendering.

Records are written with 17 significant digits so a read-back reproduces
every float bit-for-bit, and writes go through a temporary file in the
destination directory followed by an atomic rename.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be pinned first

__all__ = [
    "ScalingRecord",
    "SCALING_COLUMNS",
    "format_float",
    "atomic_write_text",
    "write_records",
    "read_records",
    "fit_loglog",
    "render_sweep_figure",
    "render_bounds_figure",
    "figure_path_for",
]

_FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    return _FLOAT_FORMAT % value


@dataclass
class ScalingRecord:
    """One sweep point relating realized error to its budget."""

    n_system: int
    n_total: int
    epsilon: float
    delta: float
    j: float
    lambda_target: float
    lambda_simulator: float
    abs_error: float
    budget: float
    bound_exponent_context: float
    wall_time_seconds: float


SCALING_COLUMNS = tuple(f.name for f in fields(ScalingRecord))
_INT_COLUMNS = ("n_system", "n_total")


def atomic_write_text(path: Path, text: str) -> None:
    """Write text through a same-directory temp file and an atomic rename."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records(records: Sequence[ScalingRecord], path: str | Path) -> Path:
    """Write records as CSV; returns the destination path."""
    path = Path(path)
    rows = [",".join(SCALING_COLUMNS)]
    for rec in records:
        cells = []
        for name in SCALING_COLUMNS:
            value = getattr(rec, name)
            cells.append(str(value) if name in _INT_COLUMNS else format_float(value))
        rows.append(",".join(cells))
    atomic_write_text(path, "\n".join(rows) + "\n")
    return path


def read_records(path: str | Path) -> list[ScalingRecord]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != SCALING_COLUMNS:
            raise ValueError(f"unexpected columns in {path}")
        out = []
        for row in reader:
            kwargs = {
                name: (int(row[name]) if name in _INT_COLUMNS else float(row[name]))
                for name in SCALING_COLUMNS
            }
            out.append(ScalingRecord(**kwargs))
    return out


def fit_loglog(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    design = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), _, _, _ = np.linalg.lstsq(design, ly, rcond=None)
    return float(slope), float(intercept)


def figure_path_for(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".png")


def render_sweep_figure(
    records: Sequence[ScalingRecord],
    path: str | Path,
    axis: str = "delta",
    reference_slope: float | None = None,
) -> Path:
    """Log-log error plot with the fitted power law and an optional guide."""
    path = Path(path)
    xs = [getattr(r, axis) for r in records]
    ys = [r.abs_error for r in records]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(xs, ys, "o", label="measured error")
    positive = [(x, y) for x, y in zip(xs, ys) if y > 0]
    if len(positive) >= 2:
        px = [x for x, _ in positive]
        py = [y for _, y in positive]
        slope, intercept = fit_loglog(px, py)
        grid = np.geomspace(min(px), max(px), 64)
        ax.loglog(grid, np.exp(intercept) * grid**slope, "-", label=f"fit slope {slope:.3f}")
        if reference_slope is not None:
            anchor = py[0] / (px[0] ** reference_slope)
            ax.loglog(
                grid,
                anchor * grid**reference_slope,
                "--",
                label=f"reference slope {reference_slope:g}",
            )
    ax.set_xlabel(axis)
    ax.set_ylabel("|lambda(simulator) - lambda(target)|")
    ax.set_title(f"spectral error against {axis}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_bounds_figure(
    r_values: Sequence[float],
    bounds: Sequence[float],
    path: str | Path,
) -> Path:
    """Scatter of measured remainders against their bounds with y = x."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(bounds, r_values, s=14, label="(bound, remainder)")
    finite = [v for v in (*r_values, *bounds) if v > 0]
    if finite:
        lo, hi = min(finite), max(finite)
        grid = np.geomspace(lo, hi, 16)
        ax.plot(grid, grid, "k--", linewidth=1.0, label="y = x")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("bound |L^k(H)| / k!")
    ax.set_ylabel("measured remainder r_k")
    ax.set_title("rotation remainders against their bounds")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
