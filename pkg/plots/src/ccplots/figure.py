"""Aggregation and drawing.

A figure is built in three steps that are usable on their own:
read_rows gives per-trial records, aggregate averages them into one
curve per group, draw_figure turns curves into a matplotlib figure.
render chains all three and writes the image file.
"""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import COLUMNS, read_rows

DEFAULT_GROUP_BY = ("scheme", "alpha", "beta")


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple
    out: str
    group_by: tuple = DEFAULT_GROUP_BY
    xlabel: str = "SNR [dB]"
    ylabel: str = "symmetric rate [bits/s/Hz]"
    title: str = ""
    bands: bool = True


@dataclass
class CurveData:
    """One aggregated line: mean rate per SNR point plus its spread."""

    label: str
    snr_db: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    trials: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))


def _label(group_by, key):
    parts = []
    for col, val in zip(group_by, key):
        if col == "scheme":
            parts.append(str(val))
        else:
            parts.append(f"{col}={val}")
    return " ".join(parts)


def aggregate(rows, group_by=DEFAULT_GROUP_BY):
    """Average trials into one curve per distinct group-key tuple.

    Means are plain arithmetic averages of the sym_rate samples at each
    SNR point; the band half-width is the standard error of that mean.
    """
    for col in group_by:
        if col not in COLUMNS:
            raise ValueError(f"cannot group by unknown column {col!r}")
    samples = {}
    for row in rows:
        key = tuple(row[col] for col in group_by)
        samples.setdefault(key, {}).setdefault(row["snr_db"], []).append(row["sym_rate"])
    curves = {}
    for key in sorted(samples, key=str):
        points = samples[key]
        snr = np.array(sorted(points))
        mean = np.array([float(np.mean(points[s])) for s in snr])
        stderr = np.array(
            [float(np.std(points[s], ddof=1) / np.sqrt(len(points[s])))
             if len(points[s]) > 1 else 0.0
             for s in snr]
        )
        curves[key] = CurveData(
            label=_label(group_by, key),
            snr_db=snr,
            mean=mean,
            stderr=stderr,
            trials=np.array([len(points[s]) for s in snr]),
        )
    return curves


def draw_figure(curves, spec: PlotSpec):
    """Plot aggregated curves; the line y-data is the mean array itself."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for key in curves:
        c = curves[key]
        ax.plot(c.snr_db, c.mean, marker="o", markersize=4, label=c.label)
        if spec.bands and np.any(c.stderr > 0):
            ax.fill_between(c.snr_db, c.mean - c.stderr, c.mean + c.stderr, alpha=0.2)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    return fig


def render(spec: PlotSpec):
    """Read, aggregate, draw, and write the image.

    Returns the aggregated curves so callers can check exactly what was
    plotted. Errors surface before anything touches the output path, so
    a failed render leaves no file behind.
    """
    if not spec.inputs:
        raise ValueError("no input files given")
    rows = []
    for path in spec.inputs:
        rows.extend(read_rows(path))
    curves = aggregate(rows, spec.group_by)
    fig = draw_figure(curves, spec)
    try:
        fig.savefig(spec.out, dpi=150)
    finally:
        plt.close(fig)
    return curves
