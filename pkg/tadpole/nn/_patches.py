from __future__ import annotations

from ..model import ConfigError
from ..tensor import ShapeError, Tensor, reshape, transpose

# [C, gh, p, gw, p] -> [gh, gw, p, p, C] and back
_TO_PATCHES = (1, 3, 2, 4, 0)
_FROM_PATCHES = (4, 0, 2, 1, 3)


def patchify(image: Tensor, patch_size: int) -> Tensor:
    """Split a `[C, H, W]` image into `[n, p*p*C]` rows in raster order.

    Row k is patch k flattened with the channel axis innermost.
    """
    if image.ndim != 3:  # noqa: PLR2004
        raise ShapeError(f"patchify: expected [C, H, W]. Got {image.shape}")
    channels, height, width = image.shape
    if height % patch_size or width % patch_size:
        raise ConfigError(
            f"Image of size {height}×{width} is not divisible into "
            f"{patch_size}×{patch_size} patches"
        )
    gh, gw = height // patch_size, width // patch_size
    x = reshape(image, (channels, gh, patch_size, gw, patch_size))
    x = transpose(x, _TO_PATCHES)
    return reshape(x, (gh * gw, patch_size * patch_size * channels))


def unpatchify(patches: Tensor, patch_size: int, channels: int) -> Tensor:
    """Inverse of `patchify` for a square image."""
    if patches.shape[1:] != (patch_size * patch_size * channels,):
        raise ShapeError(
            f"unpatchify: rows of {patches.shape} do not hold "
            f"{patch_size}×{patch_size}×{channels} patches"
        )
    n = patches.shape[0]
    grid = round(n**0.5)
    if grid * grid != n:
        raise ShapeError(f"unpatchify: {n} patches do not form a square grid")
    x = reshape(patches, (grid, grid, patch_size, patch_size, channels))
    x = transpose(x, _FROM_PATCHES)
    side = grid * patch_size
    return reshape(x, (channels, side, side))
