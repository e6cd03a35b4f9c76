"""CSV time series, JSON summaries and SVG error plots.

CSV and plots use the reporting units (mm, degrees); everything upstream
is metres and radians.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .simulator import MetricsSample, RunSummary

CSV_COLUMNS = ("t", "image_error_px", "centering_error_mm", "orientation_error_deg", "contact", "planning_active")


class CsvFormatError(ValueError):
    pass


def format_row(sample: MetricsSample) -> list[str]:
    # %-formatting is locale independent
    return [
        "%.3f" % sample.t,
        "%.6f" % sample.image_error,
        "%.6f" % (sample.centering_error_3d * 1e3),
        "%.6f" % math.degrees(sample.orientation_error),
        "1" if sample.contact else "0",
        "1" if sample.planning_active else "0",
    ]


def samples_to_csv(samples: Iterable[MetricsSample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in samples:
        writer.writerow(format_row(s))
    return buf.getvalue()


def write_csv(path: Path, samples: Iterable[MetricsSample]) -> None:
    Path(path).write_text(samples_to_csv(samples), encoding="utf-8")


def summary_dict(summary: RunSummary) -> dict:
    return {
        "mean_image_error_px": summary.mean_image_error,
        "mean_centering_error_mm": summary.mean_3d_error * 1e3,
        "mean_orientation_error_deg": math.degrees(summary.mean_orientation_error),
        "touch_count": summary.touch_count,
        "ticks": summary.ticks,
    }


@dataclass
class ErrorSeries:
    """One CSV read back for plotting."""

    label: str
    t: np.ndarray
    image_error: np.ndarray
    centering_error: np.ndarray
    orientation_error: np.ndarray
    planning_active: np.ndarray


def _flag(text: str) -> bool:
    if text not in ("0", "1"):
        raise ValueError(f"expected 0 or 1, got {text!r}")
    return text == "1"


def read_csv(path: Path, label: str | None = None) -> ErrorSeries:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise CsvFormatError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
    cols: list[list] = [[] for _ in CSV_COLUMNS]
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_COLUMNS):
            raise CsvFormatError(f"{path}: row {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        try:
            values = [float(v) for v in row[:4]] + [_flag(row[4]), _flag(row[5])]
        except ValueError as exc:
            raise CsvFormatError(f"{path}: row {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in values[:4]):
            raise CsvFormatError(f"{path}: row {lineno}: non-finite value")
        for col, v in zip(cols, values):
            col.append(v)
    if not cols[0]:
        raise CsvFormatError(f"{path}: no data rows")
    return ErrorSeries(
        label=label or path.stem,
        t=np.array(cols[0]),
        image_error=np.array(cols[1]),
        centering_error=np.array(cols[2]),
        orientation_error=np.array(cols[3]),
        planning_active=np.array(cols[5], dtype=bool),
    )


def plot_svg(series: Sequence[ErrorSeries], path: Path) -> None:
    """Three stacked panels of error against time, one curve per series."""
    if not series:
        raise ValueError("nothing to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = (
        ("image_error", "image error [px]"),
        ("centering_error", "3D error [mm]"),
        ("orientation_error", "orientation error [deg]"),
    )
    # fixed metadata keeps the SVG reproducible
    with matplotlib.rc_context({"svg.hashsalt": "endocam", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 7))
        for ax, (attr, ylabel) in zip(axes, panels):
            for s in series:
                ax.plot(s.t, getattr(s, attr), linewidth=0.8, label=s.label)
            ax.set_ylabel(ylabel)
            ax.grid(True, linewidth=0.3)
        axes[-1].set_xlabel("time [s]")
        axes[0].legend(loc="upper right", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
