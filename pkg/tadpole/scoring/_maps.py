from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cache
from typing import Literal, assert_never

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..finetune import gaussian_blur
from ..tensor import ShapeError, Tensor

Pooling = Literal["mean", "max"]
Normalize = Literal["none", "minmax"]

MapArray = NDArray[np.float64]

_LOGGER = logging.getLogger(__name__)

_RGB = 3


@dataclass(frozen=True)
class ScoreMaps:
    """Per-pixel maps and the image score of one image.

    `error` is E, `probability` is P and `score` is S = E ⊙ P. The image
    score pools S (the mean by default).
    """

    error: MapArray
    probability: MapArray
    score: MapArray
    image_score: float


def reconstruction_error(image: ArrayLike, recon: ArrayLike) -> MapArray:
    """Squared error averaged over the channels (`[C, H, W]` -> `[H, W]`)."""
    original = np.asarray(image, dtype=np.float64)
    reconstructed = np.asarray(recon, dtype=np.float64)
    if original.shape != reconstructed.shape or original.ndim != 3:  # noqa: PLR2004
        raise ShapeError(
            f"reconstruction_error: expected two [C, H, W] images. "
            f"Got {original.shape} and {reconstructed.shape}"
        )
    diff = original - reconstructed
    if original.shape[0] != _RGB:
        _note_channel_mean(original.shape[0])
    return (diff * diff).mean(axis=0)  # type: ignore[no-any-return]


@cache
def _note_channel_mean(channels: int) -> None:
    _LOGGER.debug("Averaging the reconstruction error over %d channels", channels)


def fuse(error: ArrayLike, probability: ArrayLike) -> MapArray:
    """Elementwise product of the error and probability maps."""
    e = np.asarray(error, dtype=np.float64)
    p = np.asarray(probability, dtype=np.float64)
    if e.shape != p.shape:
        raise ShapeError(f"fuse: error {e.shape} and probability {p.shape} differ")
    return e * p


def image_score(score: ArrayLike, pool: Pooling = "mean") -> float:
    values = np.asarray(score, dtype=np.float64)
    match pool:
        case "mean":
            return float(values.mean())
        case "max":
            return float(values.max())
        case _:
            assert_never(pool)


def smooth(score: MapArray, sigma: float) -> MapArray:
    """Gaussian smoothing with a window of `2 * ceil(3 * sigma) + 1`.

    The window shrinks to the largest odd size that fits the map.
    """
    side = min(score.shape)
    window = min(2 * math.ceil(3 * sigma) + 1, side if side % 2 else side - 1)
    blurred = gaussian_blur(Tensor(score[None], dtype=np.float64), window, sigma)
    return blurred.data[0]


def normalize(score: MapArray, mode: Normalize) -> MapArray:
    match mode:
        case "none":
            return score
        case "minmax":
            low, high = float(score.min()), float(score.max())
            if high == low:
                return np.zeros_like(score)
            return (score - low) / (high - low)
        case _:
            assert_never(mode)
