from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, assert_never

import numpy as np
from numpy.typing import NDArray
from pydantic import PositiveInt

from ..augment import (
    AugmentedSample,
    CorruptionConfig,
    identity_sample,
    make_epoch_stream,
)
from ..logging import CsvProgress, log_duration
from ..model import DatasetError, FrozenModel
from ..nn import ModelParams, forward_full
from ..tensor import (
    AdamW,
    GradTape,
    OptimizerConfig,
    PeriodicSchedule,
    Tensor,
    cosine_lr,
)
from ._losses import LossConfig, total_loss

_LOGGER = logging.getLogger(__name__)

PROGRESS_COLUMNS = ("epoch", "total", "mse", "ssim", "ce", "lr")

InputMode = Literal["clean", "corrupted"]


class Stage2Config(FrozenModel):
    """Stage-2 (decoder and heads) training parameters.

    The schedule advances once per epoch.
    """

    epochs: PositiveInt = 200
    batch_size: PositiveInt = 16
    schedule: PeriodicSchedule = PeriodicSchedule()
    optimizer: OptimizerConfig = OptimizerConfig()
    loss: LossConfig = LossConfig()
    corruption: CorruptionConfig = CorruptionConfig()
    # "clean" feeds the original images, "corrupted" the augmentation stream
    input_mode: InputMode = "corrupted"
    freeze_encoder: bool = True
    # Keep the parameters of the epoch with the lowest total training loss
    keep_best: bool = False


@dataclass(frozen=True)
class TrainTarget:
    """Network input and both training targets of one sample.

    The reconstruction target is always the uncorrupted image.
    """

    input: NDArray[np.floating]
    target: NDArray[np.floating]
    label: NDArray[np.float32]

    @classmethod
    def from_sample(cls, sample: AugmentedSample) -> TrainTarget:
        return cls(input=sample.corrupted, target=sample.original, label=sample.label)


@dataclass(frozen=True)
class Stage2Stats:
    epoch: int
    total: float
    mse: float
    ssim: float
    ce: float
    lr: float

    def row(self) -> tuple[float, ...]:
        return (self.epoch, self.total, self.mse, self.ssim, self.ce, self.lr)


def trainable_names(params: ModelParams, config: Stage2Config) -> list[str]:
    if config.freeze_encoder:
        encoder = set(params.encoder_names())
        return [name for name in params.parameter_names() if name not in encoder]
    return params.parameter_names()


def epoch_targets(
    dataset: NDArray[np.floating],
    config: Stage2Config,
    epoch: int,
    base_seed: int,
) -> list[TrainTarget]:
    match config.input_mode:
        case "corrupted":
            stream = make_epoch_stream(dataset, config.corruption, epoch, base_seed)
        case "clean":
            rng = np.random.default_rng(np.random.SeedSequence([base_seed, epoch]))
            order = rng.permutation(len(dataset)).tolist()
            stream = [identity_sample(np.asarray(dataset[i]), i) for i in order]
        case _:
            assert_never(config.input_mode)
    return [TrainTarget.from_sample(sample) for sample in stream]


def sample_loss(
    params: ModelParams, target: TrainTarget, config: LossConfig
) -> tuple[Tensor, tuple[float, float, float]]:
    outputs = forward_full(params, target.input)
    breakdown = total_loss(
        Tensor(target.target),
        outputs["reconstruct"],
        Tensor(target.label),
        outputs["logits"],
        config,
    )
    return breakdown.total, (breakdown.mse, breakdown.ssim, breakdown.ce)


def stage2_epoch(
    params: ModelParams,
    dataset: NDArray[np.floating],
    config: Stage2Config,
    optimizer: AdamW,
    *,
    epoch: int,
    base_seed: int,
) -> Stage2Stats:
    """Train the decoder and both heads for one epoch.

    Updates `params` and `optimizer` in place. With `freeze_encoder` the
    encoder parameters are bit-identical before and after.
    """
    size = len(dataset)
    if size == 0:
        raise DatasetError("Can not train on an empty dataset")
    lr = cosine_lr(epoch, config.schedule)
    trainable = {name: params[name] for name in params if params[name].requires_grad}
    encoder_checksum = params.checksum("encoder.") if config.freeze_encoder else None
    targets = epoch_targets(dataset, config, epoch, base_seed)
    sums = np.zeros(4)
    for start in range(0, size, config.batch_size):
        batch = targets[start : start + config.batch_size]
        with GradTape() as tape:
            loss: Tensor | None = None
            for target in batch:
                sample_total, parts = sample_loss(params, target, config.loss)
                loss = sample_total if loss is None else loss + sample_total
                sums += (sample_total.item(), *parts)
            assert loss is not None
            loss = loss * (1.0 / len(batch))
        if not math.isfinite(loss.item()):
            raise FloatingPointError(f"Non-finite loss {loss.item()} in epoch {epoch}")
        tape.backward(loss)
        optimizer.step(trainable, lr)
    unchanged = encoder_checksum in (None, params.checksum("encoder."))
    if not unchanged:
        raise RuntimeError("The frozen encoder changed during stage-2 training")
    total, mse, ssim, ce = (sums / size).tolist()
    return Stage2Stats(epoch=epoch, total=total, mse=mse, ssim=ssim, ce=ce, lr=lr)


def stage2_train(
    params: ModelParams,
    dataset: NDArray[np.floating],
    config: Stage2Config,
    *,
    base_seed: int,
    progress: CsvProgress | None = None,
) -> list[Stage2Stats]:
    """Run all stage-2 epochs. Updates `params` in place."""
    if len(dataset) == 0:
        raise DatasetError("Can not train on an empty dataset")
    names = trainable_names(params, config)
    params.set_trainable(names)
    no_decay = params.no_decay_names() & set(names)
    optimizer = config.optimizer.build(no_decay=no_decay)
    history: list[Stage2Stats] = []
    best: tuple[float, dict[str, NDArray[np.floating]]] | None = None
    for epoch in range(config.epochs):
        with log_duration(f"Stage-2 epoch {epoch}"):
            stats = stage2_epoch(
                params, dataset, config, optimizer, epoch=epoch, base_seed=base_seed
            )
        history.append(stats)
        if progress is not None:
            progress.emit(*stats.row())
        if config.keep_best and (best is None or stats.total < best[0]):
            best = (stats.total, {k: v.copy() for k, v in params.arrays().items()})
    params.set_trainable(())
    if best is not None:
        _LOGGER.info("Keeping the parameters with the lowest loss (%.6g)", best[0])
        params.load_arrays(best[1])
    return history
