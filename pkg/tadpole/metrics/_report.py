from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from pydantic import Field, NonNegativeInt, TypeAdapter

from ..model import DatasetError, FrozenModel
from ._auc import auc, curve_auc, roc_curve

_LOGGER = logging.getLogger(__name__)

CSV_COLUMNS = ("category", "image_auc", "pixel_auc", "n_pos", "n_neg")


@dataclass(frozen=True)
class ScoredItem:
    """Scores of one test image together with its ground truth."""

    name: str
    anomalous: bool
    image_score: float
    score_map: NDArray[np.floating]
    mask: NDArray[np.floating] | None = None


class EvalReport(FrozenModel):
    """Image- and pixel-level AUC of one category."""

    category: str
    image_auc: float = Field(ge=0.0, le=1.0)
    pixel_auc: float = Field(ge=0.0, le=1.0)
    # Image-level ROC as (fpr, tpr) from (0, 0) to (1, 1)
    roc_points: tuple[tuple[float, float], ...]
    n_pos: NonNegativeInt
    n_neg: NonNegativeInt
    n_pos_pixels: NonNegativeInt
    n_neg_pixels: NonNegativeInt


_REPORT_LIST = TypeAdapter(list[EvalReport])


def evaluate(category: str, items: Sequence[ScoredItem]) -> EvalReport:
    """AUC over image scores and over all test pixels pooled together.

    Normal images count as all-negative pixels. Every anomalous image needs
    a mask of the same shape as its score map.
    """
    if not items:
        raise DatasetError(f"No test images to evaluate for '{category}'")
    labels = np.array([item.anomalous for item in items], dtype=np.int64)
    scores = np.array([item.image_score for item in items], dtype=np.float64)
    curve = roc_curve(scores, labels)
    pixel_scores: list[NDArray[np.float64]] = []
    pixel_labels: list[NDArray[np.int64]] = []
    for item in items:
        score_map = np.asarray(item.score_map, dtype=np.float64)
        if item.mask is None:
            if item.anomalous:
                raise DatasetError(f"Anomalous test image '{item.name}' has no mask")
            mask = np.zeros(score_map.shape, dtype=np.int64)
        else:
            mask = (np.asarray(item.mask) >= 0.5).astype(np.int64)  # noqa: PLR2004
        if mask.shape != score_map.shape:
            raise DatasetError(
                f"Mask of '{item.name}' has shape {mask.shape}, "
                f"but its score map has shape {score_map.shape}"
            )
        pixel_scores.append(score_map.reshape(-1))
        pixel_labels.append(mask.reshape(-1))
    all_labels = np.concatenate(pixel_labels)
    pixel_auc = auc(np.concatenate(pixel_scores), all_labels)
    n_pos_pixels = int(all_labels.sum())
    report = EvalReport(
        category=category,
        image_auc=curve_auc(curve),
        pixel_auc=pixel_auc,
        roc_points=tuple(curve.points()),
        n_pos=curve.n_pos,
        n_neg=curve.n_neg,
        n_pos_pixels=n_pos_pixels,
        n_neg_pixels=all_labels.size - n_pos_pixels,
    )
    _LOGGER.info(
        "%s: image AUC %.4f, pixel AUC %.4f", category, report.image_auc, pixel_auc
    )
    return report


def reports_to_csv(reports: Iterable[EvalReport]) -> str:
    """`category,image_auc,pixel_auc,n_pos,n_neg` with a header line."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        writer.writerow(
            (
                report.category,
                repr(report.image_auc),
                repr(report.pixel_auc),
                report.n_pos,
                report.n_neg,
            )
        )
    return buffer.getvalue()


def reports_to_json(reports: Sequence[EvalReport]) -> str:
    return _REPORT_LIST.dump_json(list(reports), indent=2).decode() + "\n"
