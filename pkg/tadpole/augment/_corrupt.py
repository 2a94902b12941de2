from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..model import DatasetError
from ._config import CorruptionConfig, CorruptionOp

_LOGGER = logging.getLogger(__name__)

ImageArray = NDArray[np.floating]
LabelArray = NDArray[np.float32]


@dataclass(frozen=True)
class Block:
    """Axis-aligned rectangle `[top, top + height) × [left, left + width)`."""

    top: int
    left: int
    height: int
    width: int

    @property
    def rows(self) -> slice:
        return slice(self.top, self.top + self.height)

    @property
    def cols(self) -> slice:
        return slice(self.left, self.left + self.width)


@dataclass(frozen=True)
class AugmentedSample:
    """A (possibly) corrupted image with its pixel label matrix.

    `label` is 1 exactly on the union of the corrupted blocks. Everywhere
    else `corrupted` equals `original` bit for bit.
    """

    original: ImageArray
    corrupted: ImageArray
    label: LabelArray
    blocks: tuple[Block, ...] = ()
    index: int | None = None

    @property
    def is_corrupted(self) -> bool:
        return bool(self.blocks)


def identity_sample(image: ImageArray, index: int | None = None) -> AugmentedSample:
    return AugmentedSample(
        original=image,
        corrupted=image.copy(),
        label=np.zeros(image.shape[1:], dtype=np.float32),
        index=index,
    )


def corrupt(
    image: ImageArray, config: CorruptionConfig, rng: np.random.Generator
) -> AugmentedSample:
    """Corrupt `image` with probability `config.corrupt_probability`."""
    if rng.random() >= config.corrupt_probability:
        return identity_sample(image)
    return corrupt_blocks(image, config, rng)


def corrupt_blocks(
    image: ImageArray,
    config: CorruptionConfig,
    rng: np.random.Generator,
    *,
    index: int | None = None,
) -> AugmentedSample:
    """Unconditionally corrupt between `block_count` random blocks of `image`.

    Blocks may overlap. Each block gets one operation and, with probability
    `stack_probability`, a second different one. Only the block content is
    clamped to [0, 1].
    """
    _, height, width = image.shape
    corrupted = image.copy()
    label = np.zeros((height, width), dtype=np.float32)
    count = int(rng.integers(config.block_count.lower, config.block_count.upper + 1))
    blocks = tuple(_draw_block(height, width, config, rng) for _ in range(count))
    for block in blocks:
        ops = _draw_ops(config, rng)
        region = corrupted[:, block.rows, block.cols].astype(np.float64)
        for op in ops:
            region = apply_op(op, region, config, rng)
        corrupted[:, block.rows, block.cols] = np.clip(region, 0.0, 1.0)
        label[block.rows, block.cols] = 1.0
    return AugmentedSample(
        original=image, corrupted=corrupted, label=label, blocks=blocks, index=index
    )


def _draw_block(
    height: int, width: int, config: CorruptionConfig, rng: np.random.Generator
) -> Block:
    low, high = config.block_size.lower, config.block_size.upper
    block_h = min(height, max(1, round(rng.uniform(low, high) * height)))
    block_w = min(width, max(1, round(rng.uniform(low, high) * width)))
    top = int(rng.integers(0, height - block_h + 1))
    left = int(rng.integers(0, width - block_w + 1))
    return Block(top, left, block_h, block_w)


def _draw_ops(
    config: CorruptionConfig, rng: np.random.Generator
) -> list[CorruptionOp]:
    first = config.ops[int(rng.integers(len(config.ops)))]
    ops = [first]
    others = [op for op in config.ops if op != first]
    if others and rng.random() < config.stack_probability:
        ops.append(others[int(rng.integers(len(others)))])
    return ops


def apply_op(
    op: CorruptionOp,
    region: NDArray[np.float64],
    config: CorruptionConfig,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """Apply one operation to a `[C, h, w]` block and return the new content."""
    channels, block_h, block_w = region.shape
    match op:
        case "gaussian_noise":
            return region + rng.normal(0.0, config.noise_sigma, region.shape)
        case "channel_shuffle":
            return region[rng.permutation(channels)]
        case "channel_shift":
            low, high = config.shift_magnitude.lower, config.shift_magnitude.upper
            magnitude = rng.uniform(low, high, channels)
            sign = rng.choice((-1.0, 1.0), channels)
            return region + (sign * magnitude)[:, None, None]
        case "flip_h":
            return region[:, :, ::-1]
        case "flip_v":
            return region[:, ::-1, :]
        case "rotate90":
            # A quarter turn only keeps a square block in place
            turns = 1 if block_h == block_w else 2
            return np.rot90(region, k=turns, axes=(1, 2))
        case "rotate180":
            return np.rot90(region, k=2, axes=(1, 2))
    raise ValueError(f"Unknown corruption operation: '{op}'")


def corrupted_count(config: CorruptionConfig, dataset_size: int) -> int:
    """Number of samples corrupted per epoch (round half up)."""
    return math.floor(config.corrupt_probability * dataset_size + 0.5)


def make_epoch_stream(
    dataset: Sequence[ImageArray] | ImageArray,
    config: CorruptionConfig,
    epoch_index: int,
    base_seed: int,
) -> list[AugmentedSample]:
    """All samples of one epoch in shuffled order.

    Exactly `corrupted_count` of them are corrupted, chosen without
    replacement. The stream depends only on the arguments; every sample has
    its own generator seeded by `(base_seed, epoch_index, index)`.
    """
    size = len(dataset)
    if size == 0:
        raise DatasetError("Can not build an augmentation stream from an empty dataset")
    epoch_rng = np.random.default_rng(np.random.SeedSequence([base_seed, epoch_index]))
    count = corrupted_count(config, size)
    selected = set(epoch_rng.choice(size, size=count, replace=False).tolist())
    order = epoch_rng.permutation(size)
    samples: list[AugmentedSample] = []
    for index in order.tolist():
        image = np.asarray(dataset[index])
        if index in selected:
            rng = np.random.default_rng(
                np.random.SeedSequence([base_seed, epoch_index, index])
            )
            samples.append(corrupt_blocks(image, config, rng, index=index))
        else:
            samples.append(identity_sample(image, index))
    _LOGGER.debug(
        "Epoch %d stream: %d of %d samples corrupted", epoch_index, count, size
    )
    return samples
