"""Predictive-performance and calibration metrics."""

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from .domain import char_count
from .errors import AllBinsEmpty, LengthMismatch, NoPositives, UnequalLengths


def _pair(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.size} and {b.size} differ")
    return a, b


def mse(pred, truth):
    pred, truth = _pair(pred, truth)
    if pred.size == 0:
        raise LengthMismatch("mse needs at least one prediction")
    return float(np.mean((pred - truth) ** 2))


def auprc(scores, labels):
    """Area under the precision-recall curve, step-wise over recall.

    Tied scores form a single threshold, so the value does not depend on
    the input order.
    """
    scores, labels = _pair(scores, labels)
    n_pos = labels.sum()
    if n_pos <= 0:
        raise NoPositives("auprc needs at least one positive label")
    order = np.argsort(-scores, kind="mergesort")
    s, l = scores[order], labels[order]
    # last position of each group of tied scores
    ends = np.r_[np.nonzero(np.diff(s))[0], len(s) - 1]
    tp = np.cumsum(l)[ends]
    precision = tp / (ends + 1)
    recall = tp / n_pos
    d_recall = np.diff(np.r_[0.0, recall])
    return float(np.sum(d_recall * precision))


@dataclass
class CalibrationCurve:
    edges: np.ndarray
    mean_pred: np.ndarray  # NaN in empty bins
    frac_pos: np.ndarray  # NaN in empty bins
    counts: np.ndarray

    @property
    def nonempty(self):
        return self.counts > 0

    def to_csv(self, path_or_file, extra=None):
        """Rows of ``bin_lo, bin_hi, mean_pred, frac_pos, count``.

        ``extra`` is an optional ordered mapping of leading columns
        repeated on every row (method name, repeat index, ...).
        """
        extra = dict(extra or {})
        own = not hasattr(path_or_file, "write")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            if own:
                w.writerow(list(extra) + ["bin_lo", "bin_hi", "mean_pred", "frac_pos", "count"])
            for i in range(len(self.counts)):
                w.writerow(list(extra.values()) + [
                    _fmt(self.edges[i]), _fmt(self.edges[i + 1]),
                    _fmt(self.mean_pred[i]), _fmt(self.frac_pos[i]), int(self.counts[i]),
                ])
        finally:
            if own:
                fh.close()


def _fmt(x):
    x = float(x)
    return "" if np.isnan(x) else repr(x)


def calibration(probs, labels, bins=10):
    probs, labels = _pair(probs, labels)
    if np.any((probs < 0) | (probs > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    idx = np.minimum(np.floor(probs * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_pred = np.bincount(idx, weights=probs, minlength=bins) / counts
        frac_pos = np.bincount(idx, weights=labels, minlength=bins) / counts
    return CalibrationCurve(np.linspace(0.0, 1.0, bins + 1), mean_pred, frac_pos, counts)


def calibration_ad(curve):
    """Unweighted mean |empirical fraction - mean prediction| over occupied bins."""
    ok = curve.nonempty
    if not ok.any():
        raise AllBinsEmpty("calibration curve has no occupied bins")
    return float(np.mean(np.abs(curve.frac_pos[ok] - curve.mean_pred[ok])))


def test_log_likelihood(post, lik, truth):
    """Summed log predictive density of ``truth`` under the latent posterior."""
    mean, truth = _pair(post.mean, truth)
    return float(np.sum(lik.predictive_log_density(truth, mean, post.var)))


# keep pytest from collecting the metric as a test
test_log_likelihood.__test__ = False


def ones_histogram(z, c="1"):
    """Counts of inducing strings by number of occurrences of ``c``."""
    lengths = {len(s) for s in z}
    if len(lengths) > 1:
        raise UnequalLengths(f"inducing strings have lengths {sorted(lengths)}")
    L = lengths.pop() if lengths else 0
    return np.bincount([char_count(s, c) for s in z], minlength=L + 1)[: L + 1]


@dataclass
class EvalReport:
    mse: float = float("nan")
    auprc: float = float("nan")
    test_log_likelihood: float = float("nan")
    calibration_ad: float = float("nan")
    timing: dict = field(default_factory=dict)

    COLUMNS = ("mse", "auprc", "test_log_likelihood", "calibration_ad")

    def row(self):
        return {k: getattr(self, k) for k in self.COLUMNS}

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(self.COLUMNS) + [f"time_{k}" for k in self.timing])
            w.writerow([_fmt(getattr(self, k)) for k in self.COLUMNS]
                       + [_fmt(v) for v in self.timing.values()])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, values = rows[0], rows[1]
        kw, timing = {}, {}
        for k, v in zip(header, values):
            x = float(v) if v else float("nan")
            if k.startswith("time_"):
                timing[k[5:]] = x
            else:
                kw[k] = x
        return cls(timing=timing, **kw)

    def as_dict(self):
        return asdict(self)
