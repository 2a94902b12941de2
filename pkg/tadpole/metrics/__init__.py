"""ROC curves and AUC for image-level detection and pixel-level localization."""

from ._auc import RocCurve, UndefinedMetricError, auc, curve_auc, roc_curve
from ._report import (
    CSV_COLUMNS,
    EvalReport,
    ScoredItem,
    evaluate,
    reports_to_csv,
    reports_to_json,
)

__all__ = (
    "CSV_COLUMNS",
    "EvalReport",
    "RocCurve",
    "ScoredItem",
    "UndefinedMetricError",
    "auc",
    "curve_auc",
    "evaluate",
    "reports_to_csv",
    "reports_to_json",
)
