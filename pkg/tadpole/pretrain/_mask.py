from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..model import ConfigError


@dataclass(frozen=True)
class MaskPlan:
    """Split of the `n` token positions into masked and visible sets.

    Both index arrays are sorted, disjoint and together cover `range(n)`.
    """

    n: int
    masked_indices: NDArray[np.intp]
    visible_indices: NDArray[np.intp]

    @classmethod
    def from_masked(cls, n: int, masked: NDArray[np.integer]) -> MaskPlan:
        masked_indices = np.unique(np.asarray(masked, dtype=np.intp))
        visible_indices = np.setdiff1d(np.arange(n, dtype=np.intp), masked_indices)
        return cls(n, masked_indices, visible_indices)

    @property
    def num_masked(self) -> int:
        return int(self.masked_indices.size)


def sample_mask(n: int, mask_ratio: float, rng: np.random.Generator) -> MaskPlan:
    """Mask `floor(mask_ratio * n)` positions drawn uniformly without replacement."""
    num_masked = math.floor(mask_ratio * n)
    if not 0 < num_masked < n:
        raise ConfigError(
            f"mask_ratio {mask_ratio} masks {num_masked} of {n} tokens. "
            "Need at least one masked and one visible."
        )
    masked = rng.permutation(n)[:num_masked]
    return MaskPlan.from_masked(n, masked)
