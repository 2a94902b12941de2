"""Procedural stand-in for MVTec-style categories with planted defects."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Annotated, Literal, assert_never

import numpy as np
from numpy.typing import NDArray
from pydantic import Field, NonNegativeInt, PositiveInt

from ..model import FrozenModel
from ._corpus import NORMAL_DIR, Corpus, TestItem
from ._images import from_unit_range, to_unit_range, write_image, write_mask

_LOGGER = logging.getLogger(__name__)

Category = Literal["stripes", "checker", "blobs"]
DefectKind = Literal["color_blob", "noise_patch", "scratch_line"]

_CATEGORY_CODES: dict[str, int] = {"stripes": 0, "checker": 1, "blobs": 2}
_MAX_DEFECT_TRIES = 100


class SynthSpec(FrozenModel):
    category: Category
    image_size: PositiveInt = 64
    n_train: PositiveInt = 60
    n_test_normal: PositiveInt = 10
    n_test_anomalous: PositiveInt = 10
    defects: Annotated[tuple[DefectKind, ...], Field(min_length=1)] = (
        "color_blob",
        "noise_patch",
        "scratch_line",
    )
    seed: NonNegativeInt = 0


def generate_synthetic(spec: SynthSpec, root: Path | None = None) -> Corpus:
    """Generate (and, given `root`, write) one category.

    Files go to `root/<category>/...` in MVTec layout. Every anomalous image
    differs from its defect-free base exactly on its mask. Images are
    quantized to 8 bits, so the returned corpus equals what a later
    `load_corpus` reads back.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence([spec.seed, _CATEGORY_CODES[spec.category]])
    )
    texture = _Texture(spec.category, spec.image_size, rng)
    train = [texture.sample(rng) for _ in range(spec.n_train)]
    test = [
        TestItem(
            name=f"{NORMAL_DIR}/{i:03d}", image=texture.sample(rng), anomalous=False
        )
        for i in range(spec.n_test_normal)
    ]
    counters = dict.fromkeys(spec.defects, 0)
    for i in range(spec.n_test_anomalous):
        defect = spec.defects[i % len(spec.defects)]
        base = texture.sample(rng)
        image, mask = plant_defect(base, defect, rng)
        index = counters[defect]
        counters[defect] += 1
        test.append(
            TestItem(
                name=f"{defect}/{index:03d}",
                image=image,
                anomalous=True,
                mask=mask,
                defect=defect,
            )
        )
    corpus = Corpus(name=spec.category, train=train, test=test)
    if root is not None:
        write_corpus(corpus, root / spec.category)
    return corpus


def write_corpus(corpus: Corpus, directory: Path) -> None:
    for index, image in enumerate(corpus.train):
        write_image(directory / "train" / NORMAL_DIR / f"{index:03d}.png", image)
    for item in corpus.test:
        stem = item.name.rsplit("/", 1)[1]
        write_image(directory / "test" / item.defect / f"{stem}.png", item.image)
        if item.mask is not None:
            mask_path = directory / "ground_truth" / item.defect / f"{stem}_mask.pgm"
            write_mask(mask_path, item.mask)
    _LOGGER.info(
        "Wrote '%s' with %d training and %d test images",
        directory,
        len(corpus.train),
        len(corpus.test),
    )


def _quantize(image: NDArray[np.floating]) -> NDArray[np.float32]:
    return to_unit_range(from_unit_range(image))


class _Texture:
    """Category-wide texture parameters; `sample` adds per-image variation."""

    def __init__(
        self, category: Category, size: int, rng: np.random.Generator
    ) -> None:
        self.category = category
        self.size = size
        self.colors = rng.uniform(0.15, 0.85, size=(2, 3))
        self.period = size / rng.uniform(4.0, 8.0)
        self.angle = rng.uniform(0.0, np.pi)
        self.cell = max(2, size // 8)

    def sample(self, rng: np.random.Generator) -> NDArray[np.float32]:
        rows, cols = np.mgrid[0 : self.size, 0 : self.size].astype(np.float64)
        match self.category:
            case "stripes":
                phase = rng.uniform(0.0, 2 * np.pi)
                coord = rows * np.sin(self.angle) + cols * np.cos(self.angle)
                weight = 0.5 + 0.5 * np.sin(2 * np.pi * coord / self.period + phase)
            case "checker":
                dr, dc = rng.integers(0, self.cell, size=2)
                cells = (rows + dr) // self.cell + (cols + dc) // self.cell
                weight = cells % 2
            case "blobs":
                weight = np.zeros((self.size, self.size))
                for _ in range(int(rng.integers(3, 7))):
                    center = rng.uniform(0, self.size, size=2)
                    radius = rng.uniform(0.08, 0.2) * self.size
                    dist2 = (rows - center[0]) ** 2 + (cols - center[1]) ** 2
                    weight = np.maximum(weight, np.exp(-dist2 / (2 * radius**2)))
            case _:
                assert_never(self.category)
        low, high = self.colors
        image = low[:, None, None] * (1 - weight) + high[:, None, None] * weight
        image += rng.normal(0.0, 0.01, image.shape)
        return _quantize(image)


def plant_defect(
    base: NDArray[np.float32], defect: DefectKind, rng: np.random.Generator
) -> tuple[NDArray[np.float32], NDArray[np.float32]]:
    """Return the defective image and its mask.

    The mask is 1 exactly where the quantized image differs from `base`.
    """
    for _ in range(_MAX_DEFECT_TRIES):
        region = _defect_region(base.shape[1], defect, rng)
        altered = base.astype(np.float64).copy()
        match defect:
            case "color_blob":
                color = rng.uniform(0.0, 1.0, size=3)
                altered[:, region] = color[:, None]
            case "noise_patch":
                altered[:, region] += rng.normal(0.0, 0.35, size=(3, int(region.sum())))
            case "scratch_line":
                shade = 0.0 if base[:, region].mean() > 0.5 else 1.0  # noqa: PLR2004
                altered[:, region] = shade
        image = _quantize(np.clip(altered, 0.0, 1.0))
        mask = (image != base).any(axis=0).astype(np.float32)
        if mask.any():
            return image, mask
    raise RuntimeError(f"Could not plant a visible '{defect}' defect")


def _defect_region(
    size: int, defect: DefectKind, rng: np.random.Generator
) -> NDArray[np.bool_]:
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    if defect == "scratch_line":
        start, end = rng.uniform(0, size, size=(2, 2))
        direction = end - start
        length = max(float(np.hypot(*direction)), 1.0)
        # Distance of every pixel to the segment
        dr, dc = rows - start[0], cols - start[1]
        t = np.clip((dr * direction[0] + dc * direction[1]) / length**2, 0.0, 1.0)
        dist = np.hypot(dr - t * direction[0], dc - t * direction[1])
        return dist <= rng.uniform(0.6, 1.5)
    center = rng.uniform(0.2 * size, 0.8 * size, size=2)
    radius = rng.uniform(0.06, 0.15) * size
    return (rows - center[0]) ** 2 + (cols - center[1]) ** 2 <= radius**2
