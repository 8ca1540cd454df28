import csv
import io

import numpy as np
import pytest

from stringgp.errors import AllBinsEmpty, LengthMismatch, NoPositives, UnequalLengths
from stringgp.metrics import (CalibrationCurve, EvalReport, auprc, calibration, calibration_ad,
                              mse, ones_histogram)


def brute_force_auprc(scores, labels):
    """Step-wise PR area by enumerating every distinct threshold."""
    scores, labels = np.asarray(scores, float), np.asarray(labels)
    n_pos = labels.sum()
    area, prev_recall = 0.0, 0.0
    for t in sorted(set(scores), reverse=True):
        hit = scores >= t
        tp = labels[hit].sum()
        recall = tp / n_pos
        area += (recall - prev_recall) * tp / hit.sum()
        prev_recall = recall
    return area


class TestMSE:
    def test_examples(self):
        assert mse([1, 2], [1, 2]) == 0
        assert mse([0, 0], [1, 3]) == 5

    def test_recomputation(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=37), rng.normal(size=37)
        total = 0.0
        for x, y in zip(a.tolist(), b.tolist()):
            total += (x - y) * (x - y)
        assert mse(a, b) == pytest.approx(total / 37, rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mse([1, 2], [1])
        with pytest.raises(LengthMismatch):
            mse([], [])


class TestAUPRC:
    def test_separating(self):
        assert auprc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_all_tied(self):
        labels = [1, 0, 0, 1, 0, 0, 0, 0]
        assert auprc(np.full(8, 0.3), labels) == pytest.approx(0.25)

    def test_six_point_hand_case(self):
        scores = [0.9, 0.8, 0.7, 0.6, 0.55, 0.4]
        labels = [1, 0, 1, 1, 0, 0]
        # thresholds reach recall 1/3 at precision 1, 2/3 at 2/3, 1 at 3/4
        expected = (1 / 3) * 1 + (1 / 3) * (2 / 3) + (1 / 3) * (3 / 4)
        assert auprc(scores, labels) == pytest.approx(expected, rel=1e-12)
        assert auprc(scores, labels) == pytest.approx(brute_force_auprc(scores, labels))

    def test_ties_match_brute_force(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            scores = rng.integers(0, 4, 12).astype(float)
            labels = rng.integers(0, 2, 12)
            if labels.sum() == 0:
                continue
            assert auprc(scores, labels) == pytest.approx(brute_force_auprc(scores, labels))

    def test_no_positives(self):
        with pytest.raises(NoPositives):
            auprc([0.1, 0.2], [0, 0])


class TestCalibration:
    def test_single_bin(self):
        c = calibration(np.full(6, 0.5), [1, 0, 1, 0, 1, 0])
        assert c.counts.sum() == 6 and c.nonempty.sum() == 1
        assert c.mean_pred[5] == 0.5 and c.frac_pos[5] == 0.5

    def test_perfect_confidence(self):
        c = calibration([0.0, 1.0, 1.0, 0.0], [0, 1, 1, 0])
        ok = c.nonempty
        np.testing.assert_array_equal(c.mean_pred[ok], [0.0, 1.0])
        np.testing.assert_array_equal(c.frac_pos[ok], [0.0, 1.0])
        # p = 1 falls into the last bin
        assert c.counts[-1] == 2
        assert calibration_ad(c) == 0.0

    def test_hand_binning(self):
        probs = [0.05, 0.15, 0.12, 0.55, 0.58, 0.93]
        labels = [0, 1, 0, 1, 1, 0]
        c = calibration(probs, labels)
        np.testing.assert_array_equal(c.counts, [1, 2, 0, 0, 0, 2, 0, 0, 0, 1])
        np.testing.assert_allclose(c.mean_pred[[0, 1, 5, 9]], [0.05, 0.135, 0.565, 0.93])
        np.testing.assert_allclose(c.frac_pos[[0, 1, 5, 9]], [0.0, 0.5, 1.0, 0.0])
        assert np.isnan(c.mean_pred[2]) and np.isnan(c.frac_pos[2])
        expected = np.mean([0.05, abs(0.5 - 0.135), abs(1.0 - 0.565), 0.93])
        assert calibration_ad(c) == pytest.approx(expected)

    def test_one_bin_ad(self):
        c = CalibrationCurve(np.linspace(0, 1, 11), np.r_[np.nan, np.nan, 0.2, [np.nan] * 7],
                             np.r_[np.nan, np.nan, 0.7, [np.nan] * 7], np.r_[0, 0, 4, [0] * 7])
        assert calibration_ad(c) == pytest.approx(0.5)

    def test_perfectly_calibrated_construction(self):
        # in each bin the positive fraction equals the mean prediction exactly
        probs = np.repeat([0.25, 0.5, 0.75], 4)
        labels = [1, 0, 0, 0, 1, 1, 0, 0, 1, 1, 1, 0]
        assert calibration_ad(calibration(probs, labels)) == 0.0

    def test_all_empty(self):
        with pytest.raises(AllBinsEmpty):
            calibration_ad(calibration([], []))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            calibration([1.2], [1])

    def test_csv(self):
        buf = io.StringIO()
        calibration([0.05, 0.95], [0, 1], bins=2).to_csv(buf, {"method": "full"})
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows == [["full", "0.0", "0.5", "0.05", "0.0", "1"],
                        ["full", "0.5", "1.0", "0.95", "1.0", "1"]]


class TestOnesHistogram:
    def test_examples(self):
        np.testing.assert_array_equal(ones_histogram(["0000000000"]), [1] + [0] * 10)
        h = ones_histogram(["1111100000", "0000011111"])
        assert h[5] == 2 and h.sum() == 2 and len(h) == 11

    def test_unequal_lengths(self):
        with pytest.raises(UnequalLengths):
            ones_histogram(["01", "011"])


def test_eval_report_round_trip(tmp_path):
    r = EvalReport(mse=0.25, auprc=float("nan"), test_log_likelihood=-3.5, calibration_ad=0.1,
                   timing={"selection": 1.5, "fit": 0.25})
    path = tmp_path / "report.csv"
    r.to_csv(path)
    back = EvalReport.from_csv(path)
    assert back.mse == 0.25 and np.isnan(back.auprc)
    assert back.timing == {"selection": 1.5, "fit": 0.25}
