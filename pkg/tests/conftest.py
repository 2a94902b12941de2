import sys
from typing import Any

import numpy as np
import pytest

from tadpole.nn import ModelConfig, ModelParams, init_params


class Argv:
    def __init__(self, monkeypatch: Any) -> None:
        self._monkeypatch = monkeypatch
        self._sys_argv_first = sys.argv[0]
        self.clear()

    def assign(self, *args: Any) -> None:
        """Clear existing arguments first and append the given ones."""
        self.clear()
        self.append(*args)

    def clear(self) -> None:
        self._argv = [self._sys_argv_first]
        self._update()

    def append(self, *args: Any) -> None:
        self._argv += [str(arg) for arg in args]
        self._update()

    def _update(self) -> None:
        self._monkeypatch.setattr(sys, "argv", self._argv)


@pytest.fixture(autouse=True)
def argv(monkeypatch: Any) -> Argv:
    """Clear process arguments and return a helper object to add other args."""
    return Argv(monkeypatch)


# 16×16 images in 4×4 patches: 16 tokens, 12 of them masked
TINY_CONFIG = ModelConfig(
    image_size=16,
    patch_size=4,
    encoder_dim=16,
    encoder_depth=1,
    encoder_heads=2,
    decoder_dim=16,
    decoder_depth=1,
    decoder_heads=2,
    mlp_ratio=2.0,
    mask_ratio=0.75,
)


@pytest.fixture
def tiny_config() -> ModelConfig:
    return TINY_CONFIG


@pytest.fixture
def tiny_params() -> ModelParams:
    return init_params(TINY_CONFIG, seed=0)


def random_images(count: int, *, size: int = 16, seed: int = 0) -> np.ndarray:
    """Smooth-ish random images in [0, 1] as `[N, 3, size, size]` float32."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.2, 0.8, size=(count, 3, 1, 1))
    noise = rng.normal(0.0, 0.05, size=(count, 3, size, size))
    return np.clip(base + noise, 0.0, 1.0).astype(np.float32)


@pytest.fixture
def tiny_dataset() -> np.ndarray:
    return random_images(6)
