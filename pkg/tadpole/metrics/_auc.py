from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray


class UndefinedMetricError(ValueError):
    """The labels contain a single class, so there is no ROC curve."""


@dataclass(frozen=True)
class RocCurve:
    """ROC curve as integer counts at each distinct threshold.

    `fps[i]`/`tps[i]` count the negatives/positives scored at or above
    `thresholds[i]`. Index 0 is the origin (threshold +inf).
    """

    fps: NDArray[np.int64]
    tps: NDArray[np.int64]
    thresholds: NDArray[np.float64]

    @property
    def n_neg(self) -> int:
        return int(self.fps[-1])

    @property
    def n_pos(self) -> int:
        return int(self.tps[-1])

    @property
    def fpr(self) -> NDArray[np.float64]:
        return self.fps / self.n_neg

    @property
    def tpr(self) -> NDArray[np.float64]:
        return self.tps / self.n_pos

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), strict=True))


def roc_curve(scores: ArrayLike, labels: ArrayLike) -> RocCurve:
    """Sweep the threshold over the distinct scores, highest first."""
    score = np.asarray(scores, dtype=np.float64).reshape(-1)
    label = np.asarray(labels).reshape(-1)
    if score.shape != label.shape:
        raise ValueError(
            f"{score.size} scores and {label.size} labels. They must match."
        )
    if not np.isin(label, (0, 1)).all():
        raise ValueError("Labels must be 0 or 1")
    positive = label.astype(bool)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"AUC needs both classes. We got {n_pos} positive and {n_neg} negative"
        )
    order = np.argsort(-score, kind="stable")
    score = score[order]
    positive = positive[order]
    # Last index of each run of equal scores
    distinct = np.flatnonzero(np.diff(score))
    ends = np.append(distinct, score.size - 1)
    tps = np.cumsum(positive, dtype=np.int64)[ends]
    fps = (ends + 1) - tps
    return RocCurve(
        fps=np.concatenate([[0], fps]).astype(np.int64),
        tps=np.concatenate([[0], tps]).astype(np.int64),
        thresholds=np.concatenate([[np.inf], score[ends]]),
    )


def auc(scores: ArrayLike, labels: ArrayLike) -> float:
    """Area under the ROC curve.

    Equals P(score of a positive > score of a negative) with ties counting
    one half. The trapezoid sum is accumulated in integers, so the result is
    `(2 * wins + ties) / (2 * n_pos * n_neg)` up to one rounding.
    """
    return curve_auc(roc_curve(scores, labels))


def curve_auc(curve: RocCurve) -> float:
    widths = np.diff(curve.fps)
    heights = curve.tps[1:] + curve.tps[:-1]
    doubled_area = int(np.dot(widths, heights))
    return doubled_area / (2 * curve.n_pos * curve.n_neg)
