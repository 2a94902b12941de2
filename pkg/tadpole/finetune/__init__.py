"""Stage 2: frozen encoder, decoder and dual-head training on corrupted images."""

from ._losses import (
    LossBreakdown,
    LossConfig,
    gaussian_blur,
    mse_full,
    ssim_loss,
    ssim_map,
    total_loss,
    weighted_bce,
)
from ._train import (
    PROGRESS_COLUMNS,
    InputMode,
    Stage2Config,
    Stage2Stats,
    TrainTarget,
    epoch_targets,
    sample_loss,
    stage2_epoch,
    stage2_train,
    trainable_names,
)

__all__ = (
    "PROGRESS_COLUMNS",
    "InputMode",
    "LossBreakdown",
    "LossConfig",
    "Stage2Config",
    "Stage2Stats",
    "TrainTarget",
    "epoch_targets",
    "gaussian_blur",
    "mse_full",
    "sample_loss",
    "ssim_loss",
    "ssim_map",
    "stage2_epoch",
    "stage2_train",
    "total_loss",
    "trainable_names",
    "weighted_bce",
)
