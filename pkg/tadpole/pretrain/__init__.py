"""Stage 1: masked-patch reconstruction training."""

from ._loss import masked_mse
from ._mask import MaskPlan, sample_mask
from ._train import (
    PROGRESS_COLUMNS,
    EpochStats,
    PretrainConfig,
    check_loss_curve,
    make_optimizer,
    masked_reconstruction_loss,
    pretrain,
    pretrain_epoch,
)

__all__ = (
    "PROGRESS_COLUMNS",
    "EpochStats",
    "MaskPlan",
    "PretrainConfig",
    "check_loss_curve",
    "make_optimizer",
    "masked_mse",
    "masked_reconstruction_loss",
    "pretrain",
    "pretrain_epoch",
    "sample_mask",
)
