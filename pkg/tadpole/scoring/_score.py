from __future__ import annotations

import logging
from typing import Literal, assert_never

import numpy as np
from numpy.typing import NDArray
from pydantic import NonNegativeFloat, PositiveInt

from ..model import FrozenModel
from ..nn import (
    ModelParams,
    decode,
    encode,
    forward_full,
    image_patches,
    linear,
    unpatchify,
)
from ..pretrain import sample_mask
from ..tensor import Tensor, no_grad
from ._maps import (
    MapArray,
    Normalize,
    Pooling,
    ScoreMaps,
    fuse,
    image_score,
    normalize,
    reconstruction_error,
    smooth,
)

_LOGGER = logging.getLogger(__name__)

ScoreVariant = Literal["fusion", "e_only", "p_only", "masked_e"]


class ScoreOptions(FrozenModel):
    """How the maps of an image are computed and pooled."""

    pooling: Pooling = "mean"
    # Gaussian smoothing of S; `None` disables it
    smoothing_sigma: NonNegativeFloat | None = None
    normalize: Normalize = "none"
    # Mask draws averaged by the "masked_e" variant
    masked_draws: PositiveInt = 8


def score_image(
    params: ModelParams,
    image: NDArray[np.floating],
    variant: ScoreVariant = "fusion",
    *,
    seed: int = 0,
    options: ScoreOptions | None = None,
) -> ScoreMaps:
    """Score maps of one `[C, H, W]` image.

    Pure function of its arguments. `seed` only matters for "masked_e".
    Smoothing and normalization (both off by default) act on S only.
    """
    if options is None:
        options = ScoreOptions()
    with no_grad():
        match variant:
            case "fusion":
                heads = ("reconstruct", "probability")
                outputs = forward_full(params, image, heads=heads)
                error = reconstruction_error(image, outputs["reconstruct"].data)
                probability = outputs["probability"].data.astype(np.float64)
            case "e_only":
                outputs = forward_full(params, image, heads=("reconstruct",))
                error = reconstruction_error(image, outputs["reconstruct"].data)
                probability = np.ones_like(error)
            case "p_only":
                outputs = forward_full(params, image, heads=("probability",))
                probability = outputs["probability"].data.astype(np.float64)
                error = np.ones_like(probability)
            case "masked_e":
                error = masked_error(params, image, seed, options.masked_draws)
                probability = np.ones_like(error)
            case _:
                assert_never(variant)
    score = fuse(error, probability)
    if options.smoothing_sigma:
        score = smooth(score, options.smoothing_sigma)
    score = normalize(score, options.normalize)
    return ScoreMaps(
        error=error,
        probability=probability,
        score=score,
        image_score=image_score(score, options.pooling),
    )


def masked_error(
    params: ModelParams, image: NDArray[np.floating], seed: int, draws: int
) -> MapArray:
    """Reconstruction error averaged over random masks.

    Each pixel averages only the draws in which its patch was masked. Pixels
    whose patch was never masked get 0.
    """
    config = params.config
    rng = np.random.default_rng(seed)
    patches = image_patches(params, image)
    side = config.image_size
    total = np.zeros((side, side))
    count = np.zeros((side, side))
    pixel_block = np.ones((config.patch_size, config.patch_size))
    for _ in range(draws):
        plan = sample_mask(config.num_tokens, config.mask_ratio, rng)
        visible = Tensor(patches.data[plan.visible_indices], dtype=patches.dtype)
        encoded = encode(params, visible, plan.visible_indices)
        dec_out = decode(params, encoded, plan.visible_indices)
        recon = linear(params, "head_r", dec_out).data
        error = reconstruction_error(
            _to_image(patches.data, config.patch_size, config.channels),
            _to_image(recon, config.patch_size, config.channels),
        )
        token_mask = np.zeros(config.num_tokens)
        token_mask[plan.masked_indices] = 1.0
        pixel_mask = np.kron(
            token_mask.reshape(config.grid_size, config.grid_size), pixel_block
        )
        total += error * pixel_mask
        count += pixel_mask
    uncovered = int((count == 0).sum())
    if uncovered:
        _LOGGER.debug("%d pixels were never masked in %d draws", uncovered, draws)
    return np.divide(total, count, out=np.zeros_like(total), where=count > 0)


def _to_image(
    patches: NDArray[np.floating], patch_size: int, channels: int
) -> MapArray:
    return unpatchify(Tensor(patches), patch_size, channels).data.astype(np.float64)
