"""Vision-transformer encoder, mask-token decoder and the two output heads."""

from ._config import ModelConfig
from ._model import (
    attention,
    block,
    decode,
    encode,
    forward_full,
    head_classify,
    head_logits,
    head_reconstruct,
    image_patches,
    linear,
)
from ._params import BUFFER_NAMES, ModelParams, init_params
from ._patches import patchify, unpatchify
from ._pos_embed import sincos_pos_embed_2d

__all__ = (
    "BUFFER_NAMES",
    "ModelConfig",
    "ModelParams",
    "attention",
    "block",
    "decode",
    "encode",
    "forward_full",
    "head_classify",
    "head_logits",
    "head_reconstruct",
    "image_patches",
    "init_params",
    "linear",
    "patchify",
    "sincos_pos_embed_2d",
    "unpatchify",
)
