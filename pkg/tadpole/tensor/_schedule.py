from __future__ import annotations

import math
from typing import Annotated, Literal, Self, assert_never

from pydantic import (
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveInt,
    model_validator,
)

from ..model import FrozenModel


class HalfCycleSchedule(FrozenModel):
    """Linear warmup, then one half cosine from `base_lr` down to `min_lr`.

    Steps are zero-based. Warmup step `i` uses `base_lr * (i + 1) / warmup_steps`,
    so no step has a zero rate from warmup alone. The first step after warmup is
    at `base_lr` and the last step (`total_steps - 1`) lands on `min_lr`, except
    when the cosine part is a single step: that step uses `base_lr`.
    """

    kind: Literal["half_cycle"] = "half_cycle"
    base_lr: NonNegativeFloat
    min_lr: NonNegativeFloat = 0.0
    total_steps: PositiveInt
    warmup_steps: NonNegativeInt = 0

    @model_validator(mode="after")
    def _warmup_fits(self) -> Self:
        if self.warmup_steps >= self.total_steps:
            raise ValueError("warmup_steps must be smaller than total_steps")
        return self


class PeriodicSchedule(FrozenModel):
    """Cosine annealing that restarts at `max_lr` every `period` steps."""

    kind: Literal["periodic"] = "periodic"
    max_lr: NonNegativeFloat = 1e-3
    min_lr: NonNegativeFloat = 1e-9
    period: PositiveInt = 60


Schedule = Annotated[HalfCycleSchedule | PeriodicSchedule, Field(discriminator="kind")]


def cosine_lr(step: int, schedule: Schedule) -> float:
    if step < 0:
        raise ValueError(f"step must be non-negative. We got {step}")
    match schedule:
        case HalfCycleSchedule():
            if step < schedule.warmup_steps:
                return schedule.base_lr * (step + 1) / schedule.warmup_steps
            span = schedule.total_steps - 1 - schedule.warmup_steps
            done = step - schedule.warmup_steps
            if span == 0:
                return schedule.base_lr if done == 0 else schedule.min_lr
            return _cosine(schedule.base_lr, schedule.min_lr, min(1.0, done / span))
        case PeriodicSchedule():
            progress = (step % schedule.period) / schedule.period
            return _cosine(schedule.max_lr, schedule.min_lr, progress)
        case _:
            assert_never(schedule)


def _cosine(high: float, low: float, progress: float) -> float:
    return low + (high - low) * 0.5 * (1.0 + math.cos(math.pi * progress))


def scaled_lr(lr_base: float, batch_size: int) -> float:
    """Linear scaling rule: `lr_base * batch_size / 256`."""
    return lr_base * batch_size / 256
