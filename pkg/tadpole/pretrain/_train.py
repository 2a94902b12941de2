from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from pydantic import Field, NonNegativeFloat, PositiveFloat, PositiveInt

from ..logging import CsvProgress, log_duration
from ..model import DatasetError, FrozenModel
from ..nn import ModelParams, decode, encode, image_patches, linear
from ..tensor import (
    AdamW,
    GradTape,
    HalfCycleSchedule,
    OptimizerConfig,
    Tensor,
    cosine_lr,
    scaled_lr,
)
from ._loss import masked_mse
from ._mask import sample_mask

_LOGGER = logging.getLogger(__name__)

PROGRESS_COLUMNS = ("epoch", "loss", "lr")


class PretrainConfig(FrozenModel):
    """Stage-1 (masked reconstruction) training parameters."""

    epochs: PositiveInt = 120
    batch_size: PositiveInt = 20
    # The step size is `lr_base * batch_size / 256`
    lr_base: PositiveFloat = 1e-3
    min_lr: NonNegativeFloat = 0.0
    warmup_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)
    optimizer: OptimizerConfig = OptimizerConfig()

    def steps_per_epoch(self, dataset_size: int) -> int:
        return math.ceil(dataset_size / self.batch_size)

    def schedule(self, dataset_size: int) -> HalfCycleSchedule:
        total = self.epochs * self.steps_per_epoch(dataset_size)
        return HalfCycleSchedule(
            base_lr=scaled_lr(self.lr_base, self.batch_size),
            min_lr=self.min_lr,
            total_steps=total,
            warmup_steps=min(int(self.warmup_fraction * total), total - 1),
        )


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    lr: float


def make_optimizer(
    params: ModelParams, names: Sequence[str], config: OptimizerConfig
) -> AdamW:
    """AdamW over `names`. Biases, norms and the mask token skip weight decay."""
    params.set_trainable(names)
    return config.build(no_decay=params.no_decay_names() & set(names))


def masked_reconstruction_loss(
    params: ModelParams, image: NDArray[np.floating], rng: np.random.Generator
) -> Tensor:
    """Mask one image, reconstruct it and return the masked-patch loss."""
    config = params.config
    patches = image_patches(params, image)
    plan = sample_mask(config.num_tokens, config.mask_ratio, rng)
    # Input patches are constants, so slicing needs no tape entry
    visible = Tensor(patches.data[plan.visible_indices], dtype=patches.dtype)
    encoded = encode(params, visible, plan.visible_indices)
    dec_out = decode(params, encoded, plan.visible_indices)
    return masked_mse(patches, linear(params, "head_r", dec_out), plan)


def pretrain_epoch(
    params: ModelParams,
    dataset: NDArray[np.floating],
    config: PretrainConfig,
    optimizer: AdamW,
    rng: np.random.Generator,
    *,
    epoch: int,
) -> EpochStats:
    """Run one epoch of masked reconstruction training.

    Updates `params` and `optimizer` in place. Each image gets its own mask.
    The batch loss is the mean over the images of the batch.
    """
    size = len(dataset)
    if size == 0:
        raise DatasetError("Can not pretrain on an empty dataset")
    schedule = config.schedule(size)
    steps = config.steps_per_epoch(size)
    trainable = {name: params[name] for name in params if params[name].requires_grad}
    order = rng.permutation(size)
    total_loss = 0.0
    lr = 0.0
    for step in range(steps):
        batch = order[step * config.batch_size : (step + 1) * config.batch_size]
        lr = cosine_lr(epoch * steps + step, schedule)
        with GradTape() as tape:
            losses = [
                masked_reconstruction_loss(params, dataset[i], rng) for i in batch
            ]
            loss = losses[0]
            for other in losses[1:]:
                loss = loss + other
            loss = loss * (1.0 / len(batch))
        value = loss.item()
        if not math.isfinite(value):
            raise FloatingPointError(f"Non-finite loss {value} in epoch {epoch}")
        tape.backward(loss)
        optimizer.step(trainable, lr)
        total_loss += value * len(batch)
    return EpochStats(epoch=epoch, loss=total_loss / size, lr=lr)


def pretrain(
    params: ModelParams,
    dataset: NDArray[np.floating],
    config: PretrainConfig,
    rng: np.random.Generator,
    *,
    progress: CsvProgress | None = None,
) -> list[EpochStats]:
    """Train encoder, decoder and reconstruction head for `config.epochs`."""
    if len(dataset) == 0:
        raise DatasetError("Can not pretrain on an empty dataset")
    optimizer = make_optimizer(params, params.parameter_names(), config.optimizer)
    history: list[EpochStats] = []
    for epoch in range(config.epochs):
        with log_duration(f"Stage-1 epoch {epoch}"):
            stats = pretrain_epoch(params, dataset, config, optimizer, rng, epoch=epoch)
        history.append(stats)
        if progress is not None:
            progress.emit(stats.epoch, stats.loss, stats.lr)
    params.set_trainable(())
    check_loss_curve([stats.loss for stats in history])
    return history


def check_loss_curve(losses: Sequence[float], window: int = 5) -> bool:
    """Log a warning if the moving average of the loss ever goes up.

    Returns True if the moving average is non-increasing. Never raises.
    """
    if len(losses) < window + 1:
        return True
    averages = np.convolve(np.asarray(losses), np.ones(window) / window, mode="valid")
    rises = np.flatnonzero(np.diff(averages) > 0)
    if rises.size:
        _LOGGER.warning(
            "The %d-epoch moving average of the stage-1 loss rose %d time(s), "
            "first after epoch %d",
            window,
            rises.size,
            int(rises[0]) + window,
        )
        return False
    return True
