"""Pixel-level evaluation: confusion counts, accuracy, precision, ROC and batch statistics."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    degenerate: bool = False

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def auc(self) -> float:
        """Trapezoidal area under the curve."""
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2.0))


def _binary(a, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return a.astype(bool)


def confusion(mask, truth) -> ConfusionCounts:
    """Count agreements between a predicted and a reference mask (1 = oil)."""
    mask = _binary(mask, "mask")
    truth = _binary(truth, "truth")
    if mask.shape != truth.shape:
        raise ValueError(f"shape mismatch: mask {mask.shape} vs truth {truth.shape}")
    tp = int(np.count_nonzero(mask & truth))
    fp = int(np.count_nonzero(mask & ~truth))
    fn = int(np.count_nonzero(~mask & truth))
    tn = int(mask.size - tp - fp - fn)
    return ConfusionCounts(tp, fp, tn, fn)


def accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise ValueError("accuracy of an empty confusion matrix is undefined")
    return (c.tp + c.tn) / c.total


def precision(c: ConfusionCounts) -> float:
    """``tp / (tp + fp)``.

    With nothing segmented the result is 1.0 if there was nothing to find
    and 0.0 otherwise.
    """
    detected = c.tp + c.fp
    if detected == 0:
        log.info("no pixel segmented as oil; precision set by convention")
        return 1.0 if c.fn == 0 else 0.0
    return c.tp / detected


def roc_sweep(phi, truth, oil_sign: int = -1, n_thresholds: int = 64) -> RocCurve:
    """ROC of the score ``oil_sign * phi`` against *truth*.

    A pixel is called oil when its score is at least the threshold.
    Thresholds run from the score maximum down to its minimum, so both
    rates grow monotonically; ``(0, 0)`` and ``(1, 1)`` are always included.
    """
    if n_thresholds < 2:
        raise ValueError("n_thresholds must be at least 2")
    if oil_sign not in (-1, 1):
        raise ValueError("oil_sign must be +1 or -1")
    score = oil_sign * np.asarray(phi, dtype=np.float64)
    truth = _binary(truth, "truth")
    if score.shape != truth.shape:
        raise ValueError(f"shape mismatch: phi {score.shape} vs truth {truth.shape}")
    lo, hi = float(score.min()), float(score.max())
    degenerate = lo == hi
    if degenerate:
        log.warning("constant score field; ROC reduces to its end points")
        thresholds = np.array([np.inf, -np.inf])
    else:
        thresholds = np.concatenate(([np.inf], np.linspace(hi, lo, n_thresholds), [-np.inf]))

    pos = max(int(truth.sum()), 1)
    neg = max(int((~truth).sum()), 1)
    flat_score = score.ravel()
    flat_truth = truth.ravel()
    order = np.argsort(-flat_score, kind="stable")
    sorted_score = flat_score[order]
    cum_tp = np.concatenate(([0], np.cumsum(flat_truth[order])))
    # number of pixels with score >= t, per threshold
    called = np.searchsorted(-sorted_score, -thresholds, side="right")
    tp = cum_tp[called]
    fp = called - tp
    return RocCurve(fpr=fp / neg, tpr=tp / pos, thresholds=thresholds, degenerate=degenerate)


@dataclass(frozen=True)
class BatchStats:
    mean: float
    sd: float
    min: float
    max: float
    quartiles: tuple[float, float, float]
    n: int


def batch_stats(values) -> BatchStats:
    """Summary statistics with population standard deviation."""
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise ValueError("batch_stats needs at least one value")
    q1, q2, q3 = np.percentile(v, [25, 50, 75])
    return BatchStats(float(v.mean()), float(v.std()), float(v.min()), float(v.max()),
                      (float(q1), float(q2), float(q3)), int(v.size))
