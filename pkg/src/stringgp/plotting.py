"""Render calibration curves and inducing-point histograms from result CSVs.

SVG output is byte-stable across runs: matplotlib's id salt is fixed and
the date metadata is dropped.
"""

import csv
from collections import OrderedDict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import MissingInput  # noqa: E402

_RC = {"svg.hashsalt": "stringgp", "svg.fonttype": "none", "path.simplify": False}
CURVE_GID = "calibration-curve"
DIAGONAL_GID = "diagonal"


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def _safe(name):
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in str(name))


def plot_calibration(rows, path, title=""):
    """One reliability diagram; empty bins are left out of the polyline."""
    pts = [(float(r["mean_pred"]), float(r["frac_pos"])) for r in rows
           if r["mean_pred"] != "" and r["frac_pos"] != "" and int(r["count"]) > 0]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.plot([0, 1], [0, 1], ls="--", color="0.5", lw=1, gid=DIAGONAL_GID)
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", color="C0", gid=CURVE_GID)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xlabel("mean predicted probability")
        ax.set_ylabel("fraction of positives")
        ax.set_title(title)
        _save(fig, path)
    return len(pts)


def plot_histogram(counts, freqs, path, title="", xlabel="count"):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4, 3))
        ax.bar(counts, freqs, color="C1", gid="histogram")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("inducing points")
        ax.set_title(title)
        _save(fig, path)


def plot_results(directory):
    """Write SVGs next to the CSVs in ``directory``; returns the written paths."""
    directory = Path(directory)
    cal = directory / "calibration.csv"
    hist = directory / "inducing_histogram.csv"
    if not directory.is_dir():
        raise MissingInput(f"results directory not found: {directory}")
    if not cal.exists() and not hist.exists():
        raise MissingInput(f"no calibration.csv or inducing_histogram.csv in {directory}")
    written = []
    if cal.exists():
        groups = OrderedDict()
        for r in _read(cal):
            groups.setdefault((r["method"], r["repeat"]), []).append(r)
        for (method, repeat), rows in groups.items():
            path = directory / f"calibration_{_safe(method)}_{_safe(repeat)}.svg"
            plot_calibration(rows, path, f"{method} (repeat {repeat})")
            written.append(path)
    if hist.exists():
        groups = OrderedDict()
        for r in _read(hist):
            if r["repeat"] == "all":
                groups.setdefault(r["method"], []).append(r)
        for method, rows in groups.items():
            path = directory / f"histogram_{_safe(method)}.svg"
            plot_histogram([int(r["count"]) for r in rows], [int(r["frequency"]) for r in rows],
                           path, method, "character count")
            written.append(path)
    return written
