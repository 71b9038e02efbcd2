"""Calibration metrics, confusion matrices, and reliability-diagram data.

Binned metrics use equal-width confidence bins on [0, 1], half-open
[lo, hi) with the final bin closed so that confidence 1.0 lands in a bin.
Empty bins contribute nothing to the weighted sums and are skipped by the
max in the worst-case metric. The adaptive metrics instead cut each
class's sorted probabilities into equal-count ranges (remainder samples
go one-per-range from the first range onward; ties are broken by stable
sort on original index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalBatchStats",
    "CalibrationReport",
    "ece",
    "mce",
    "adaptive_calibration_error",
    "sce",
    "brier",
    "confusion_matrix",
    "batch_density",
    "reliability_bins",
    "evaluate_predictions",
]

DEFAULT_BINS = 15
DEFAULT_TACE_THRESHOLD = 1e-3


def _check_inputs(preds, labels):
    p = np.asarray(preds, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.ndim != 2 or p.shape[0] == 0:
        raise ValueError("predictions must be a nonempty N x C matrix")
    if y.shape != (p.shape[0],):
        raise ValueError("labels must be a vector matching the prediction rows")
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("predictions must lie in [0, 1]")
    if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("prediction rows must sum to 1")
    if y.min() < 0 or y.max() >= p.shape[1]:
        raise ValueError("labels out of range for the prediction width")
    return p, y


def _bin_index(conf: np.ndarray, num_bins: int) -> np.ndarray:
    # [lo, hi) bins, except the last bin also contains 1.0
    return np.minimum((conf * num_bins).astype(np.int64), num_bins - 1)


def _binned_gaps(preds, labels, num_bins):
    p, y = _check_inputs(preds, labels)
    if num_bins < 1:
        raise ValueError("need at least one bin")
    conf = p.max(axis=1)
    correct = (p.argmax(axis=1) == y).astype(np.float64)
    idx = _bin_index(conf, num_bins)
    counts = np.bincount(idx, minlength=num_bins)
    acc_sum = np.bincount(idx, weights=correct, minlength=num_bins)
    conf_sum = np.bincount(idx, weights=conf, minlength=num_bins)
    return counts, acc_sum, conf_sum


def ece(preds, labels, num_bins: int = DEFAULT_BINS) -> float:
    """Expected calibration error: count-weighted mean |accuracy - confidence|."""
    counts, acc_sum, conf_sum = _binned_gaps(preds, labels, num_bins)
    nonempty = counts > 0
    gaps = np.abs(acc_sum[nonempty] - conf_sum[nonempty]) / counts[nonempty]
    return float((counts[nonempty] / counts.sum()) @ gaps)


def mce(preds, labels, num_bins: int = DEFAULT_BINS) -> float:
    """Maximum calibration error: worst bin gap |accuracy - confidence|."""
    counts, acc_sum, conf_sum = _binned_gaps(preds, labels, num_bins)
    nonempty = counts > 0
    gaps = np.abs(acc_sum[nonempty] - conf_sum[nonempty]) / counts[nonempty]
    return float(gaps.max())


def reliability_bins(preds, labels, num_bins: int = DEFAULT_BINS):
    """Per-bin (lo, hi, count, accuracy, confidence); empty bins report zeros."""
    counts, acc_sum, conf_sum = _binned_gaps(preds, labels, num_bins)
    rows = []
    for b in range(num_bins):
        n = int(counts[b])
        acc = acc_sum[b] / n if n else 0.0
        conf = conf_sum[b] / n if n else 0.0
        rows.append((b / num_bins, (b + 1) / num_bins, n, float(acc), float(conf)))
    return rows


def _ranges(m: int, num_ranges: int):
    base, extra = divmod(m, num_ranges)
    sizes = [base + (1 if r < extra else 0) for r in range(num_ranges)]
    stop = np.cumsum(sizes)
    return zip(stop - sizes, stop)


def adaptive_calibration_error(preds, labels, num_ranges: int = DEFAULT_BINS,
                               threshold: float = 0.0) -> float:
    """Equal-count per-class calibration error over all class probabilities.

    Probabilities below `threshold` are discarded first; threshold 0 keeps
    everything. The result averages |accuracy - confidence| over the
    C x R (class, range) grid, with empty ranges counting zero.
    """
    p, y = _check_inputs(preds, labels)
    if num_ranges < 1:
        raise ValueError("need at least one range")
    n, c = p.shape
    total_survivors = 0
    gap_sum = 0.0
    for k in range(c):
        probs = p[:, k]
        keep = np.flatnonzero(probs >= threshold)
        if keep.size == 0:
            continue
        total_survivors += keep.size
        order = keep[np.argsort(probs[keep], kind="stable")]
        hits = (y[order] == k).astype(np.float64)
        sorted_probs = probs[order]
        for lo, hi in _ranges(order.size, num_ranges):
            if hi > lo:
                gap_sum += abs(hits[lo:hi].mean() - sorted_probs[lo:hi].mean())
    if total_survivors == 0:
        raise ValueError(f"threshold {threshold} discarded every probability")
    return gap_sum / (c * num_ranges)


def sce(preds, labels, num_bins: int = DEFAULT_BINS) -> float:
    """Static calibration error: the binned gap computed per class probability."""
    p, y = _check_inputs(preds, labels)
    if num_bins < 1:
        raise ValueError("need at least one bin")
    n, c = p.shape
    total = 0.0
    for k in range(c):
        idx = _bin_index(p[:, k], num_bins)
        counts = np.bincount(idx, minlength=num_bins)
        acc_sum = np.bincount(idx, weights=(y == k).astype(np.float64), minlength=num_bins)
        conf_sum = np.bincount(idx, weights=p[:, k], minlength=num_bins)
        nonempty = counts > 0
        gaps = np.abs(acc_sum[nonempty] - conf_sum[nonempty]) / counts[nonempty]
        total += (counts[nonempty] / n) @ gaps
    return float(total / c)


def brier(preds, labels) -> float:
    """Mean squared gap between the one-hot truth and every class probability."""
    p, y = _check_inputs(preds, labels)
    onehot = np.zeros_like(p)
    onehot[np.arange(p.shape[0]), y] = 1.0
    return float(((onehot - p) ** 2).mean())


def confusion_matrix(preds, labels):
    """(counts, ln(1 + counts)) with rows indexed by true label, columns by prediction."""
    p, y = _check_inputs(preds, labels)
    c = p.shape[1]
    pred = p.argmax(axis=1)
    counts = np.zeros((c, c), dtype=np.int64)
    np.add.at(counts, (y, pred), 1)
    return counts, np.log1p(counts.astype(np.float64))


@dataclass(frozen=True)
class EvalBatchStats:
    """Accuracy and mean winning score of one evaluation chunk."""

    accuracy: float
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.accuracy <= 1.0 and 0.0 <= self.confidence <= 1.0):
            raise ValueError("accuracy and confidence must lie in [0, 1]")


def batch_density(preds, labels, batch_size: int) -> list[EvalBatchStats]:
    """Joint accuracy/confidence points over sequential chunks of `batch_size`."""
    p, y = _check_inputs(preds, labels)
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    conf = p.max(axis=1)
    correct = (p.argmax(axis=1) == y).astype(np.float64)
    out = []
    for start in range(0, p.shape[0], batch_size):
        chunk = slice(start, start + batch_size)
        out.append(EvalBatchStats(float(correct[chunk].mean()), float(conf[chunk].mean())))
    return out


@dataclass(eq=False)
class CalibrationReport:
    accuracy: float
    ece: float
    mce: float
    ace: float
    tace: float
    sce: float
    brier: float
    reliability: list[tuple[float, float, int, float, float]]
    confusion: np.ndarray
    confusion_log: np.ndarray
    density: list[EvalBatchStats]

    def scalars(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy,
            "ece": self.ece,
            "mce": self.mce,
            "ace": self.ace,
            "tace": self.tace,
            "sce": self.sce,
            "brier": self.brier,
        }


def evaluate_predictions(preds, labels, num_bins: int = DEFAULT_BINS,
                         num_ranges: int = DEFAULT_BINS,
                         tace_threshold: float = DEFAULT_TACE_THRESHOLD,
                         density_batch: int = 100) -> CalibrationReport:
    """Full metric suite over one prediction matrix."""
    p, y = _check_inputs(preds, labels)
    counts, counts_log = confusion_matrix(p, y)
    return CalibrationReport(
        accuracy=float((p.argmax(axis=1) == y).mean()),
        ece=ece(p, y, num_bins),
        mce=mce(p, y, num_bins),
        ace=adaptive_calibration_error(p, y, num_ranges, threshold=0.0),
        tace=adaptive_calibration_error(p, y, num_ranges, threshold=tace_threshold),
        sce=sce(p, y, num_bins),
        brier=brier(p, y),
        reliability=reliability_bins(p, y, num_bins),
        confusion=counts,
        confusion_log=counts_log,
        density=batch_density(p, y, density_batch),
    )
