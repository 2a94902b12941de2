"""Stage-2 losses: full-image MSE, SSIM and pixel-weighted cross-entropy."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from typing import Self

import numpy as np
from numpy.typing import NDArray
from pydantic import NonNegativeFloat, PositiveFloat, PositiveInt, model_validator

from ..model import ConfigError, FrozenModel
from ..tensor import (
    ShapeError,
    Tensor,
    mean,
    no_grad,
    reshape,
    softplus,
    transpose,
)


class LossConfig(FrozenModel):
    """Weights of the three loss terms and the SSIM window parameters."""

    lambda0: NonNegativeFloat = 1.0
    lambda1: NonNegativeFloat = 0.5
    lambda2: NonNegativeFloat = 1.0
    # Weight of the positive (corrupted pixel) term of the cross-entropy
    omega: PositiveFloat = 3.0
    ssim_window: PositiveInt = 11
    ssim_sigma: PositiveFloat = 1.5
    ssim_k1: NonNegativeFloat = 0.01
    ssim_k2: NonNegativeFloat = 0.03

    @model_validator(mode="after")
    def _odd_window(self) -> Self:
        if self.ssim_window % 2 == 0:
            raise ValueError(f"ssim_window must be odd. We got {self.ssim_window}")
        return self

    @property
    def active_terms(self) -> frozenset[str]:
        weights = {"mse": self.lambda0, "ssim": self.lambda1, "ce": self.lambda2}
        return frozenset(name for name, weight in weights.items() if weight > 0)


def _check_same(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def mse_full(image: Tensor, recon: Tensor) -> Tensor:
    """Mean squared error over every element of the image."""
    _check_same("mse_full", image, recon)
    diff = recon - image
    return mean(diff * diff)


@cache
def _blur_matrix(size: int, window: int, sigma: float) -> NDArray[np.float64]:
    """Gaussian filter with symmetric border padding as a `[size, size]` matrix.

    Row i holds the weights with which each input sample contributes to the
    filtered sample i. The padded samples are folded back onto the samples
    they mirror.
    """
    radius = window // 2
    offsets = np.arange(window) - radius
    weights = np.exp(-(offsets**2) / (2.0 * sigma**2))
    weights /= weights.sum()
    matrix = np.zeros((size, size))
    for i in range(size):
        for offset, weight in zip(offsets, weights, strict=True):
            j = i + offset
            # Symmetric padding: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ...
            if j < 0:
                j = -j - 1
            elif j >= size:
                j = 2 * size - j - 1
            matrix[i, j] += weight
    matrix.setflags(write=False)
    return matrix


def gaussian_blur(image: Tensor, window: int, sigma: float) -> Tensor:
    """Separable Gaussian filter of each channel of a `[C, H, W]` tensor."""
    channels, height, width = image.shape
    blur_w = Tensor(_blur_matrix(width, window, sigma).T, dtype=image.dtype)
    blur_h = Tensor(_blur_matrix(height, window, sigma).T, dtype=image.dtype)
    x = reshape(image, (channels * height, width)) @ blur_w
    x = transpose(reshape(x, (channels, height, width)), (0, 2, 1))
    x = reshape(x, (channels * width, height)) @ blur_h
    return transpose(reshape(x, (channels, width, height)), (0, 2, 1))


def ssim_map(image: Tensor, recon: Tensor, config: LossConfig) -> Tensor:
    """Per-pixel, per-channel SSIM of two `[C, H, W]` images (dynamic range 1)."""
    _check_same("ssim", image, recon)
    if image.ndim != 3:  # noqa: PLR2004
        raise ShapeError(f"ssim: expected [C, H, W]. Got {image.shape}")
    if config.ssim_window > min(image.shape[1:]):
        raise ConfigError(
            f"SSIM window {config.ssim_window} is larger than the "
            f"{image.shape[1]}×{image.shape[2]} image"
        )
    c1 = config.ssim_k1**2
    c2 = config.ssim_k2**2

    def blur(x: Tensor) -> Tensor:
        return gaussian_blur(x, config.ssim_window, config.ssim_sigma)

    mu_x, mu_y = blur(image), blur(recon)
    mu_xy = mu_x * mu_y
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    var_x = blur(image * image) - mu_xx
    var_y = blur(recon * recon) - mu_yy
    cov = blur(image * recon) - mu_xy
    # Written so that swapping the arguments gives bit-identical results
    numerator = (mu_xy * 2.0 + c1) * (cov * 2.0 + c2)
    denominator = (mu_xx + mu_yy + c1) * (var_x + var_y + c2)
    return numerator / denominator


def ssim_loss(image: Tensor, recon: Tensor, config: LossConfig) -> Tensor:
    """`1 - mean SSIM` over all pixel centers and channels."""
    return mean(1.0 - ssim_map(image, recon, config))


def weighted_bce(label: Tensor, logits: Tensor, omega: float) -> Tensor:
    """Pixel-weighted binary cross-entropy computed from logits.

    `mean(omega * m * -log(p) + (1 - m) * -log(1 - p))` with `p = sigmoid(x)`,
    evaluated as softplus terms so that it never takes `log(0)`.
    """
    _check_same("weighted_bce", label, logits)
    positive = label * softplus(-logits) * omega
    negative = (1.0 - label) * softplus(logits)
    return mean(positive + negative)


@dataclass(frozen=True)
class LossBreakdown:
    total: Tensor
    mse: float
    ssim: float
    ce: float


def total_loss(
    image: Tensor,
    recon: Tensor,
    label: Tensor,
    logits: Tensor,
    config: LossConfig,
) -> LossBreakdown:
    """`lambda0 * mse + lambda1 * ssim + lambda2 * ce` and its components.

    Terms with zero weight are evaluated for the breakdown only and stay off
    the tape.
    """
    terms = (
        ("mse", config.lambda0, lambda: mse_full(image, recon)),
        ("ssim", config.lambda1, lambda: ssim_loss(image, recon, config)),
        ("ce", config.lambda2, lambda: weighted_bce(label, logits, config.omega)),
    )
    total: Tensor | None = None
    values: dict[str, float] = {}
    for name, weight, compute in terms:
        if weight == 0.0:
            with no_grad():
                values[name] = compute().item()
            continue
        component = compute()
        values[name] = component.item()
        weighted = component * weight
        total = weighted if total is None else total + weighted
    if total is None:
        total = Tensor(0.0, dtype=image.dtype)
    return LossBreakdown(
        total=total, mse=values["mse"], ssim=values["ssim"], ce=values["ce"]
    )
