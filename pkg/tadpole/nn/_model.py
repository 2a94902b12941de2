"""Forward passes of the encoder, the decoder and the two heads.

Everything here is a function of (params, inputs). Nothing is cached between
calls, so concurrent read-only forward passes may share one `ModelParams`.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..tensor import (
    ShapeError,
    Tensor,
    TokenIndexError,
    gather_rows,
    gelu,
    layernorm,
    matmul,
    reshape,
    scatter_rows,
    sigmoid,
    softmax,
    transpose,
)
from ._params import ModelParams
from ._patches import patchify, unpatchify


def linear(params: ModelParams, prefix: str, x: Tensor) -> Tensor:
    return x @ params[f"{prefix}.weight"] + params[f"{prefix}.bias"]


def _norm(params: ModelParams, prefix: str, x: Tensor) -> Tensor:
    return layernorm(
        x,
        params[f"{prefix}.weight"],
        params[f"{prefix}.bias"],
        params.config.layernorm_eps,
    )


def attention(params: ModelParams, prefix: str, x: Tensor, heads: int) -> Tensor:
    """Multi-head self-attention over the rows of `x` (`[n, d]`)."""
    n, dim = x.shape
    head_dim = dim // heads

    def split(name: str) -> Tensor:
        # [n, d] -> [h, n, d/h]
        projected = linear(params, f"{prefix}.{name}", x)
        return transpose(reshape(projected, (n, heads, head_dim)), (1, 0, 2))

    q, k, v = split("q"), split("k"), split("v")
    scores = matmul(q, transpose(k, (0, 2, 1))) * (head_dim**-0.5)
    mixed = matmul(softmax(scores, axis=-1), v)
    merged = reshape(transpose(mixed, (1, 0, 2)), (n, dim))
    return linear(params, f"{prefix}.proj", merged)


def block(params: ModelParams, prefix: str, x: Tensor, heads: int) -> Tensor:
    """Pre-norm transformer block: attention and MLP, each with a residual."""
    normed = _norm(params, f"{prefix}.norm1", x)
    x = x + attention(params, f"{prefix}.attn", normed, heads)
    normed = _norm(params, f"{prefix}.norm2", x)
    hidden = gelu(linear(params, f"{prefix}.mlp.fc1", normed))
    return x + linear(params, f"{prefix}.mlp.fc2", hidden)


def _positions(positions: ArrayLike, num_tokens: int) -> NDArray[np.intp]:
    idx = np.asarray(positions, dtype=np.intp).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= num_tokens):
        raise TokenIndexError(
            f"Token positions must lie in [0, {num_tokens}). Got {idx.tolist()}"
        )
    if np.unique(idx).size != idx.size:
        raise TokenIndexError(f"Token positions must be distinct. Got {idx.tolist()}")
    return idx


def encode(
    params: ModelParams, visible_patches: Tensor, visible_positions: ArrayLike
) -> Tensor:
    """Encode the given patches (`[v, p*p*C]`) at the given token positions.

    Returns `[v, encoder_dim]` in input row order. Only the visible tokens
    enter the encoder.
    """
    config = params.config
    idx = _positions(visible_positions, config.num_tokens)
    if visible_patches.shape[1:] != (config.patch_dim,):
        raise ShapeError(
            f"encode: expected [v, {config.patch_dim}] patches. "
            f"Got {visible_patches.shape}"
        )
    if visible_patches.shape[0] != idx.size or idx.size == 0:
        raise ShapeError(
            f"encode: {visible_patches.shape[0]} patches for {idx.size} positions"
        )
    x = linear(params, "encoder.patch_embed", visible_patches)
    x = x + gather_rows(params["encoder.pos_embed"], idx)
    for index in range(config.encoder_depth):
        x = block(params, f"encoder.blocks.{index}", x, config.encoder_heads)
    x = _norm(params, "encoder.norm", x)
    assert x.shape == (idx.size, config.encoder_dim)
    return x


def decode(
    params: ModelParams, encoded: Tensor, visible_positions: ArrayLike
) -> Tensor:
    """Decode to all `n` token states (`[n, decoder_dim]`) in raster order.

    Every position not in `visible_positions` gets the learned mask token.
    """
    config = params.config
    n = config.num_tokens
    idx = _positions(visible_positions, n)
    if encoded.shape != (idx.size, config.encoder_dim):
        raise ShapeError(
            f"decode: expected [{idx.size}, {config.encoder_dim}]. "
            f"Got {encoded.shape}"
        )
    embedded = linear(params, "decoder.embed", encoded)
    x = scatter_rows(embedded, idx, n)
    masked = np.setdiff1d(np.arange(n), idx)
    if masked.size:
        token = reshape(params["decoder.mask_token"], (1, config.decoder_dim))
        tokens = Tensor.ones((masked.size, 1), dtype=token.dtype) @ token
        x = x + scatter_rows(tokens, masked, n)
    x = x + params["decoder.pos_embed"]
    for index in range(config.decoder_depth):
        x = block(params, f"decoder.blocks.{index}", x, config.decoder_heads)
    return _norm(params, "decoder.norm", x)


def head_reconstruct(params: ModelParams, dec_out: Tensor) -> Tensor:
    """Reconstructed image `[C, H, W]` from the decoder output."""
    config = params.config
    patches = linear(params, "head_r", dec_out)
    return unpatchify(patches, config.patch_size, config.channels)


def head_logits(params: ModelParams, dec_out: Tensor) -> Tensor:
    """Per-pixel anomaly logits `[H, W]` from the decoder output."""
    config = params.config
    patches = linear(params, "head_m", dec_out)
    logits = unpatchify(patches, config.patch_size, 1)
    return reshape(logits, (config.image_size, config.image_size))


def head_classify(params: ModelParams, dec_out: Tensor) -> Tensor:
    """Per-pixel anomaly probabilities `[H, W]` in [0, 1]."""
    return sigmoid(head_logits(params, dec_out))


def image_patches(params: ModelParams, image: Tensor | NDArray[np.floating]) -> Tensor:
    image = image if isinstance(image, Tensor) else Tensor(image)
    config = params.config
    expected = (config.channels, config.image_size, config.image_size)
    if image.shape != expected:
        raise ShapeError(f"Expected an image of shape {expected}. Got {image.shape}")
    return patchify(image, config.patch_size)


def forward_full(
    params: ModelParams,
    image: Tensor | NDArray[np.floating],
    *,
    heads: Sequence[str] = ("reconstruct", "logits"),
) -> dict[str, Tensor]:
    """Unmasked forward pass of a whole image.

    Returns the requested head outputs by name: "reconstruct" (`[C, H, W]`),
    "logits" and "probability" (`[H, W]`).
    """
    patches = image_patches(params, image)
    positions = np.arange(params.config.num_tokens)
    dec_out = decode(params, encode(params, patches, positions), positions)
    outputs: dict[str, Tensor] = {}
    for head in heads:
        match head:
            case "reconstruct":
                outputs[head] = head_reconstruct(params, dec_out)
            case "logits":
                outputs[head] = head_logits(params, dec_out)
            case "probability":
                outputs[head] = head_classify(params, dec_out)
            case _:
                raise ValueError(f"Unknown head: '{head}'")
    return outputs
