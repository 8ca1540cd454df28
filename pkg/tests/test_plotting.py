import csv
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from stringgp.errors import MissingInput
from stringgp.metrics import calibration
from stringgp.plotting import CURVE_GID, DIAGONAL_GID, plot_results

SVG = "{http://www.w3.org/2000/svg}"


def write_calibration(directory, curve, method="full", repeat=0):
    path = directory / "calibration.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "repeat", "bin_lo", "bin_hi", "mean_pred", "frac_pos", "count"])
        curve.to_csv(fh, {"method": method, "repeat": repeat})
    return path


def group_vertices(svg_path, gid):
    """Number of path vertices drawn inside the group with the given id."""
    root = ET.parse(svg_path).getroot()
    for g in root.iter(SVG + "g"):
        if g.get("id") == gid:
            d = next(g.iter(SVG + "path")).get("d")
            return len(re.findall(r"[ML]", d))
    raise AssertionError(f"no group {gid!r} in {svg_path}")


def spread_curve():
    # one prediction in the middle of every bin
    probs = np.repeat(np.arange(10) / 10 + 0.05, 3)
    labels = np.tile([1, 0, 0], 10)
    return calibration(probs, labels)


class TestCalibrationPlot:
    def test_ten_points_and_diagonal(self, tmp_path):
        write_calibration(tmp_path, spread_curve())
        (svg,) = plot_results(tmp_path)
        assert svg.name == "calibration_full_0.svg"
        assert group_vertices(svg, CURVE_GID) == 10
        assert group_vertices(svg, DIAGONAL_GID) == 2

    def test_empty_bins_omitted(self, tmp_path):
        curve = calibration([0.05, 0.07, 0.55, 0.95], [0, 1, 1, 1])
        assert curve.nonempty.sum() == 3
        write_calibration(tmp_path, curve)
        (svg,) = plot_results(tmp_path)
        assert group_vertices(svg, CURVE_GID) == 3

    def test_byte_identical_rerun(self, tmp_path):
        write_calibration(tmp_path, spread_curve())
        (svg,) = plot_results(tmp_path)
        first = svg.read_bytes()
        plot_results(tmp_path)
        assert svg.read_bytes() == first


class TestHistogramPlot:
    def test_histogram(self, tmp_path):
        with open(tmp_path / "inducing_histogram.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "repeat", "count", "frequency"])
            for k in range(11):
                w.writerow(["sa", 0, k, int(k == 5)])
                w.writerow(["sa", "all", k, int(k == 5) * 3])
        (svg,) = plot_results(tmp_path)
        assert svg.name == "histogram_sa.svg"
        ET.parse(svg)


class TestMissing:
    def test_missing_directory(self, tmp_path):
        with pytest.raises(MissingInput):
            plot_results(tmp_path / "absent")

    def test_no_csvs(self, tmp_path):
        with pytest.raises(MissingInput):
            plot_results(tmp_path)
