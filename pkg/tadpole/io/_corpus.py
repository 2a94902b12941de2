from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ..model import DatasetError
from ._images import read_image, read_mask

_LOGGER = logging.getLogger(__name__)

NORMAL_DIR = "good"
_IMAGE_SUFFIXES = (".png", ".ppm", ".pgm")
_MASK_SUFFIXES = (".png", ".pgm")


@dataclass(frozen=True)
class TestItem:
    """One test image. Anomalous items always carry a mask."""

    __test__ = False  # Not a pytest test class

    name: str
    image: NDArray[np.float32]
    anomalous: bool
    mask: NDArray[np.float32] | None = None
    defect: str = NORMAL_DIR


@dataclass(frozen=True)
class Corpus:
    """Normal training images and labelled test images of one category."""

    name: str
    train: list[NDArray[np.float32]] = field(default_factory=list)
    test: list[TestItem] = field(default_factory=list)

    def train_array(self) -> NDArray[np.float32]:
        """The training images stacked as `[N, C, H, W]`."""
        if not self.train:
            raise DatasetError(f"Corpus '{self.name}' has no training images")
        return np.stack(self.train).astype(np.float32)


def list_categories(root: Path) -> list[Path]:
    """Category directories (those with a `train` subdirectory) under `root`.

    `root` itself counts if it is a category directory.
    """
    if (root / "train").is_dir():
        return [root]
    return sorted(path for path in root.iterdir() if (path / "train").is_dir())


def _image_files(directory: Path) -> list[Path]:
    return sorted(
        path
        for path in directory.iterdir()
        if path.is_file() and path.suffix.lower() in _IMAGE_SUFFIXES
    )


def _find_mask(root: Path, defect: str, stem: str) -> Path | None:
    for suffix in _MASK_SUFFIXES:
        candidate = root / "ground_truth" / defect / f"{stem}_mask{suffix}"
        if candidate.is_file():
            return candidate
    return None


def load_corpus(path: Path, *, image_size: int | None = None) -> Corpus:
    """Load one category directory in MVTec layout.

        <category>/train/good/*.png
        <category>/test/good/*.png
        <category>/test/<defect>/*.png
        <category>/ground_truth/<defect>/<stem>_mask.{png,pgm}

    Only `train/good` feeds the training set. With `image_size`, images and
    masks are area-resized to that size.
    """
    train_dir = path / "train" / NORMAL_DIR
    if not train_dir.is_dir():
        raise DatasetError(f"'{path}' has no '{train_dir.relative_to(path)}' directory")
    train = [read_image(f, image_size=image_size) for f in _image_files(train_dir)]
    if not train:
        raise DatasetError(f"'{train_dir}' contains no images")
    test: list[TestItem] = []
    test_dir = path / "test"
    defect_dirs = (
        sorted(p for p in test_dir.iterdir() if p.is_dir()) if test_dir.is_dir() else []
    )
    for defect_dir in defect_dirs:
        defect = defect_dir.name
        anomalous = defect != NORMAL_DIR
        for file in _image_files(defect_dir):
            mask = None
            if anomalous:
                mask_path = _find_mask(path, defect, file.stem)
                if mask_path is None:
                    raise DatasetError(f"Anomalous test image '{file}' has no mask")
                mask = read_mask(mask_path, image_size=image_size)
            test.append(
                TestItem(
                    name=f"{defect}/{file.stem}",
                    image=read_image(file, image_size=image_size),
                    anomalous=anomalous,
                    mask=mask,
                    defect=defect,
                )
            )
    _LOGGER.info(
        "Loaded '%s': %d training and %d test images", path.name, len(train), len(test)
    )
    return Corpus(name=path.name, train=train, test=test)
