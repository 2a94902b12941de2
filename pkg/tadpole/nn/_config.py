from __future__ import annotations

import math
from typing import Self

from pydantic import Field, PositiveFloat, PositiveInt, model_validator

from ..model import FrozenModel


class ModelConfig(FrozenModel):
    """Architecture of the encoder, decoder and both heads.

    The defaults are the desk-scale model: 64×64 RGB images in 8×8 patches
    (64 tokens), a 4-block encoder and a 2-block decoder.
    """

    image_size: PositiveInt = 64
    channels: PositiveInt = 3
    patch_size: PositiveInt = 8
    encoder_dim: PositiveInt = 128
    encoder_depth: PositiveInt = 4
    encoder_heads: PositiveInt = 4
    decoder_dim: PositiveInt = 64
    decoder_depth: PositiveInt = 2
    decoder_heads: PositiveInt = 4
    mlp_ratio: PositiveFloat = 4.0
    mask_ratio: float = Field(default=0.75, gt=0.0, lt=1.0)
    layernorm_eps: PositiveFloat = 1e-6

    @model_validator(mode="after")
    def _check_shapes(self) -> Self:
        if self.image_size % self.patch_size:
            raise ValueError(
                f"image_size {self.image_size} is not divisible by "
                f"patch_size {self.patch_size}"
            )
        for part in ("encoder", "decoder"):
            dim = getattr(self, f"{part}_dim")
            heads = getattr(self, f"{part}_heads")
            if dim % heads:
                raise ValueError(f"{part}_dim {dim} is not divisible by {heads} heads")
            # The 2-d sin-cos embedding splits the width into 4 equal parts
            if dim % 4:
                raise ValueError(f"{part}_dim {dim} must be divisible by 4")
        if not 0 < self.num_masked < self.num_tokens:
            raise ValueError(
                f"mask_ratio {self.mask_ratio} masks {self.num_masked} of "
                f"{self.num_tokens} tokens. Need at least one masked and one visible."
            )
        return self

    @property
    def grid_size(self) -> int:
        return self.image_size // self.patch_size

    @property
    def num_tokens(self) -> int:
        return self.grid_size**2

    @property
    def patch_dim(self) -> int:
        return self.patch_size**2 * self.channels

    @property
    def num_masked(self) -> int:
        return math.floor(self.mask_ratio * self.num_tokens)

    def hidden_dim(self, dim: int) -> int:
        return int(dim * self.mlp_ratio)
