"""ROC curves with grouped ties, AUC, operating points and thresholded maps."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import Mask, ScoreMap


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # first vertex is +inf (nothing flagged)
    auc: float

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))


def _scores_of(scores) -> np.ndarray:
    return np.asarray(getattr(scores, "scores", scores), dtype=np.float64).ravel()


def _labels_of(truth) -> np.ndarray:
    return np.asarray(getattr(truth, "data", truth)).astype(bool).ravel()


def roc(scores, truth) -> RocCurve:
    """ROC curve sweeping every unique score from high to low.

    Pixels with equal scores enter together, one vertex per unique score,
    which makes the trapezoidal AUC equal to the Mann-Whitney statistic.
    """
    s, y = _scores_of(scores), _labels_of(truth)
    if s.size != y.size:
        raise ValueError(f"{s.size} scores but {y.size} labels")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError(f"degenerate truth: {n_pos} positives, {n_neg} negatives")

    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s_sorted) != 0), s.size - 1]
    tp = np.cumsum(y_sorted)[ends]
    fp = (ends + 1) - tp
    tp = np.r_[0, tp]
    fp = np.r_[0, fp]

    # trapezoids on integer counts, divided once
    area2 = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    auc = area2 / (2.0 * n_pos * n_neg)
    thresholds = np.r_[np.inf, s_sorted[ends]]
    return RocCurve(fp / n_neg, tp / n_pos, thresholds, auc)


def mann_whitney_auc(scores, truth) -> float:
    """``P(s+ > s-) + P(s+ = s-)/2`` by direct pair counting."""
    s, y = _scores_of(scores), _labels_of(truth)
    pos, neg = s[y], s[~y]
    diff = pos[:, None] - neg[None, :]
    wins = np.count_nonzero(diff > 0) + 0.5 * np.count_nonzero(diff == 0)
    return wins / (pos.size * neg.size)


def best_operating_point(r: RocCurve) -> tuple[float, float, float]:
    """Vertex nearest to (0, 1); ties go to lower fpr, then higher threshold."""
    dist2 = r.fpr ** 2 + (1.0 - r.tpr) ** 2
    best = np.lexsort((-r.thresholds, r.fpr, dist2))[0]
    return float(r.thresholds[best]), float(r.fpr[best]), float(r.tpr[best])


def apply_threshold(scores, t: float) -> Mask:
    """Flag pixels with ``score >= t``."""
    s = _scores_of(scores)
    flags = s >= t
    if isinstance(scores, ScoreMap):
        return Mask(flags, scores.rows, scores.cols)
    return Mask(flags, s.size, 1)


def roc_csv_text(r: RocCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["fpr", "tpr", "threshold"])
    for fpr, tpr, thr in r.points:
        writer.writerow([repr(fpr), repr(tpr), repr(thr)])
    writer.writerow([f"auc={r.auc!r}"])
    return buf.getvalue()


def export_roc_csv(r: RocCurve, path) -> None:
    """Write ``fpr,tpr,threshold`` rows and a closing ``auc=<value>`` row."""
    with open(path, "w", newline="") as fh:
        fh.write(roc_csv_text(r))


def read_roc_csv(path) -> RocCurve:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["fpr", "tpr", "threshold"]:
        raise ValueError(f"{path}: missing fpr,tpr,threshold header")
    if len(rows[-1]) != 1 or not rows[-1][0].startswith("auc="):
        raise ValueError(f"{path}: missing trailing auc= row")
    body = np.array([[float(v) for v in row] for row in rows[1:-1]])
    return RocCurve(body[:, 0], body[:, 1], body[:, 2], float(rows[-1][0][4:]))
