"""Render sweep CSVs to deterministic SVG figures.

CSV stays the interface of record; figures are a convenience layer drawn
next to it.  SVG output embeds no timestamps and uses a fixed hash salt,
so identical CSV + plot spec produce byte-identical files.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

__all__ = ["read_columns", "emit_plot"]

X_CANDIDATES = ("snr_db", "theta", "n")
NON_SERIES = {"trial", "schema", "K", "epsilon"}

SERIES_LABELS = {
    "r_sum_secure": "secure sum rate",
    "r_baseline": "random-coding baseline",
    "r_nonsecure_cf": "non-secure combination sum",
    "capacity_sum": "sum capacity",
    "entropy_bits_per_dim": "entropy per dim",
    "ratio_bound_bits": "covering-ratio bound",
    "clean_bound_bits": "clean bound",
    "tail_prob": "tail probability",
}

X_LABELS = {"snr_db": "SNR (dB)", "theta": "theta (rad)", "n": "dimension n"}

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.0),
        "figure.dpi": 100,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "svg.hashsalt": "cfsec",
    }
)


def read_columns(csv_path: str) -> dict:
    """Read a sweep CSV into {column: list}; numeric cells become floats."""
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{csv_path} is empty") from None
        columns = {name: [] for name in header}
        for line in reader:
            if len(line) != len(header):
                raise ValueError(f"malformed CSV row in {csv_path}: {line!r}")
            for name, cell in zip(header, line):
                try:
                    columns[name].append(float(cell))
                except ValueError:
                    columns[name].append(cell)
    return columns


def emit_plot(csv_path: str, out_path: str | None = None, x_col: str | None = None,
              series: list | None = None, title: str | None = None) -> str:
    """Line plot of the rate columns of a sweep CSV; returns the SVG path.

    Aggregate rows (trial = -1) are preferred when present; series without
    a single finite value are dropped from the legend.
    """
    columns = read_columns(csv_path)
    if x_col is None:
        x_col = next((c for c in X_CANDIDATES if c in columns), None)
        if x_col is None:
            raise ValueError("cannot infer the x column; pass x_col")
    if x_col not in columns:
        raise ValueError(f"no column {x_col!r} in {csv_path}")

    keep = [True] * len(columns[x_col])
    if "trial" in columns:
        means = [t == -1 for t in columns["trial"]]
        if any(means):
            keep = means

    def column(name):
        return [v for v, k in zip(columns[name], keep) if k]

    xs = column(x_col)
    if series is None:
        series = [
            name
            for name in columns
            if name != x_col
            and name not in NON_SERIES
            and any(isinstance(v, float) for v in columns[name])
        ]

    fig, ax = plt.subplots()
    plotted = 0
    for name in series:
        ys = column(name)
        if not any(isinstance(v, float) for v in ys):
            continue
        ax.plot(xs, ys, label=SERIES_LABELS.get(name, name), linewidth=1.5)
        plotted += 1
    if plotted == 0:
        plt.close(fig)
        raise ValueError("no plottable series found")
    ax.set_xlabel(X_LABELS.get(x_col, x_col))
    ax.set_ylabel("rate (bits / channel use)" if x_col != "n" else "bits / probability")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()

    if out_path is None:
        out_path = os.path.splitext(csv_path)[0] + ".svg"
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
