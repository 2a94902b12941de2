"""PNG and PGM codecs on top of Pillow.

Images are `[C, H, W]` float arrays in [0, 1]; masks and maps are `[H, W]`.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from PIL import Image, UnidentifiedImageError

from ..checkpoint import atomic_output

_LOGGER = logging.getLogger(__name__)

_MAX_8BIT = 255
_MAX_16BIT = 65535

FloatImage = NDArray[np.float32]


class ImageDecodeError(ValueError):
    """An image file could not be decoded."""

    def __init__(self, path: Path, reason: str) -> None:
        super().__init__(f"Can not decode '{path}': {reason}")
        self.path = path


def to_unit_range(
    pixels: NDArray[np.integer], max_value: int = _MAX_8BIT
) -> FloatImage:
    """Integer samples to floats in [0, 1]."""
    scaled = np.asarray(pixels, dtype=np.float32) / np.float32(max_value)
    return scaled.astype(np.float32)


def from_unit_range(
    values: NDArray[np.floating], max_value: int = _MAX_8BIT
) -> NDArray[np.int64]:
    """Floats to integer samples. Clips to [0, 1] and rounds half to even."""
    clipped = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.rint(clipped * max_value).astype(np.int64)


def _open(path: Path) -> Image.Image:
    try:
        with Image.open(path) as image:
            image.load()
            return image
    except (OSError, UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise ImageDecodeError(path, str(exc)) from exc


def _samples(image: Image.Image) -> tuple[NDArray[np.integer], int]:
    """Raw samples and their full-scale value."""
    if image.mode in ("I", "I;16", "I;16B", "I;16L"):
        return np.asarray(image, dtype=np.int64), _MAX_16BIT
    if image.mode == "F":
        raise ValueError("Floating-point images are not supported")
    return np.asarray(image), _MAX_8BIT


def read_image(path: Path, *, image_size: int | None = None) -> FloatImage:
    """Read a PNG or PPM/PGM file as `[3, H, W]` floats in [0, 1].

    Gray files are expanded to three channels. With `image_size`, the image
    is area-resized to `image_size`×`image_size`.
    """
    image = _open(path)
    if image.mode in ("I", "I;16", "I;16B", "I;16L"):
        samples, max_value = _samples(image)
        gray = to_unit_range(samples, max_value)
        array = np.repeat(gray[None], 3, axis=0)
    else:
        rgb = np.asarray(image.convert("RGB"))
        array = to_unit_range(rgb).transpose(2, 0, 1)
    array = np.ascontiguousarray(array)
    if image_size is not None and array.shape[1:] != (image_size, image_size):
        array = resize_area(array, image_size)
    return array


def write_image(path: Path, image: NDArray[np.floating]) -> None:
    """Write a `[3, H, W]` image in [0, 1] as 8-bit RGB (PNG or PPM)."""
    samples = from_unit_range(image).astype(np.uint8).transpose(1, 2, 0)
    with atomic_output(path) as temp:
        Image.fromarray(np.ascontiguousarray(samples)).save(temp, format=_format(path))


def read_mask(path: Path, *, image_size: int | None = None) -> NDArray[np.float32]:
    """Read a ground-truth mask as `[H, W]` with values in {0, 1}.

    Binarized at half of the full-scale value (after any resizing).
    """
    image = _open(path)
    if not image.mode.startswith("I"):
        image = image.convert("L")
    try:
        samples, max_value = _samples(image)
    except ValueError as exc:
        raise ImageDecodeError(path, str(exc)) from exc
    values = to_unit_range(samples, max_value)
    if image_size is not None and values.shape != (image_size, image_size):
        values = resize_area(values[None], image_size)[0]
    return (values >= 0.5).astype(np.float32)  # noqa: PLR2004


def write_mask(path: Path, mask: NDArray[np.floating]) -> None:
    """Write a {0, 1} mask as an 8-bit gray image (0 or 255)."""
    binary = np.asarray(mask) >= 0.5  # noqa: PLR2004
    samples = np.where(binary, _MAX_8BIT, 0).astype(np.uint8)
    with atomic_output(path) as temp:
        Image.fromarray(samples).save(temp, format=_format(path))


def write_heatmap(
    path: Path, values: NDArray[np.floating], *, png: bool = False
) -> None:
    """Write a map as a 16-bit PGM after per-map min-max normalization.

    With `png`, an 8-bit PNG with the same stem is written alongside.
    """
    values = np.asarray(values, dtype=np.float64)
    low, high = float(values.min()), float(values.max())
    scaled = np.zeros_like(values) if high == low else (values - low) / (high - low)
    samples = from_unit_range(scaled, _MAX_16BIT).astype(np.int32)
    with atomic_output(path) as temp:
        Image.fromarray(samples).save(temp, format="PPM")
    if png:
        preview = from_unit_range(scaled).astype(np.uint8)
        with atomic_output(path.with_suffix(".png")) as temp:
            Image.fromarray(preview).save(temp, format="PNG")


def resize_area(image: NDArray[np.floating], size: int) -> FloatImage:
    """Area-average resize of a `[C, H, W]` image to `[C, size, size]`.

    Integer downscale factors average exact blocks. Everything else goes
    through Pillow's box filter per channel.
    """
    channels, height, width = image.shape
    if height % size == 0 and width % size == 0:
        fh, fw = height // size, width // size
        blocks = np.asarray(image, dtype=np.float64)
        blocks = blocks.reshape(channels, size, fh, size, fw)
        return blocks.mean(axis=(2, 4)).astype(np.float32)
    resized = [
        np.asarray(
            Image.fromarray(np.asarray(plane, dtype=np.float32)).resize(
                (size, size), Image.Resampling.BOX
            )
        )
        for plane in image
    ]
    _LOGGER.debug("Box-resized %d×%d to %d×%d", height, width, size, size)
    return np.clip(np.stack(resized), 0.0, 1.0).astype(np.float32)


def _format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".png":
        return "PNG"
    if suffix in (".pgm", ".ppm", ".pnm"):
        return "PPM"
    raise ValueError(f"Unsupported image extension: '{path.suffix}'")
