from __future__ import annotations

from collections.abc import Sequence
from typing import Any, Self

from pydantic import model_validator

from ._frozen_model import FrozenModel


def _from_pair(data: Any) -> Any:
    # Accept the `[lower, upper]` shorthand in JSON configs
    if isinstance(data, Sequence) and not isinstance(data, str | bytes):
        if len(data) != 2:  # noqa: PLR2004
            raise ValueError(f"A range needs exactly two items. We got: {data}")
        return {"lower": data[0], "upper": data[1]}
    return data


class IntRange(FrozenModel):
    """Closed integer range `[lower, upper]`."""

    lower: int
    upper: int

    @model_validator(mode="before")
    @classmethod
    def _validate_pair(cls, data: Any) -> Any:
        return _from_pair(data)

    @model_validator(mode="after")
    def _lower_before_upper(self) -> Self:
        if self.lower > self.upper:
            raise ValueError('"lower" must not exceed "upper"')
        return self

    def __contains__(self, value: int) -> bool:
        return self.lower <= value <= self.upper


class FloatRange(FrozenModel):
    """Closed float range `[lower, upper]`."""

    lower: float
    upper: float

    @model_validator(mode="before")
    @classmethod
    def _validate_pair(cls, data: Any) -> Any:
        return _from_pair(data)

    @model_validator(mode="after")
    def _lower_before_upper(self) -> Self:
        if self.lower > self.upper:
            raise ValueError('"lower" must not exceed "upper"')
        return self

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper
