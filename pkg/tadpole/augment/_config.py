from __future__ import annotations

from typing import Annotated, Literal, Self

from pydantic import Field, NonNegativeFloat, model_validator

from ..model import FloatRange, FrozenModel, IntRange

CorruptionOp = Literal[
    "gaussian_noise",
    "channel_shuffle",
    "channel_shift",
    "flip_h",
    "flip_v",
    "rotate90",
    "rotate180",
]

ALL_OPS: tuple[CorruptionOp, ...] = (
    "gaussian_noise",
    "channel_shuffle",
    "channel_shift",
    "flip_h",
    "flip_v",
    "rotate90",
    "rotate180",
)

Probability = Annotated[float, Field(ge=0.0, le=1.0)]


class CorruptionConfig(FrozenModel):
    """How normal images are corrupted into labelled training samples.

    Block sizes are fractions of the image side, drawn independently for the
    height and width of each block.
    """

    corrupt_probability: Probability = 5 / 6
    block_count: IntRange = IntRange(lower=1, upper=12)
    block_size: FloatRange = FloatRange(lower=0.05, upper=0.35)
    ops: Annotated[tuple[CorruptionOp, ...], Field(min_length=1)] = ALL_OPS
    noise_sigma: NonNegativeFloat = 0.2
    shift_magnitude: FloatRange = FloatRange(lower=0.2, upper=0.6)
    # Chance that a block gets a second, different operation on top
    stack_probability: Probability = 0.5

    @model_validator(mode="after")
    def _check_ranges(self) -> Self:
        if self.block_count.lower < 1:
            raise ValueError("block_count must start at 1 or more")
        if not 0.0 < self.block_size.lower <= self.block_size.upper <= 1.0:
            raise ValueError("block_size must lie in (0, 1]")
        if self.shift_magnitude.lower < 0.0:
            raise ValueError("shift_magnitude must be non-negative")
        return self
