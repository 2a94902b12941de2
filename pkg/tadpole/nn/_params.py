from __future__ import annotations

import hashlib
import logging
from collections.abc import Iterable, Iterator, Mapping

import numpy as np

from ..tensor import FloatArray, Tensor
from ._config import ModelConfig
from ._pos_embed import sincos_pos_embed_2d

_LOGGER = logging.getLogger(__name__)

_INIT_STD = 0.02

# Fixed (never trained) tensors that still travel with the parameters
BUFFER_NAMES = frozenset({"encoder.pos_embed", "decoder.pos_embed"})


class ModelParams(Mapping[str, Tensor]):
    """Named tensors of the encoder, decoder and both heads.

    Names are dotted paths, e.g. "encoder.blocks.0.attn.q.weight". Linear
    weights are stored as `[in, out]` so a layer is `x @ weight + bias`.
    """

    def __init__(self, config: ModelConfig, tensors: Mapping[str, Tensor]) -> None:
        self._config = config
        self._tensors = dict(tensors)

    @property
    def config(self) -> ModelConfig:
        return self._config

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def parameter_names(self) -> list[str]:
        """All trainable names (everything except the fixed buffers)."""
        return [name for name in self._tensors if name not in BUFFER_NAMES]

    def encoder_names(self) -> list[str]:
        return [name for name in self.parameter_names() if name.startswith("encoder.")]

    def no_decay_names(self) -> frozenset[str]:
        """Biases, norm parameters and the mask token (MAE convention)."""
        return frozenset(
            name
            for name in self.parameter_names()
            if self._tensors[name].ndim < 2  # noqa: PLR2004
        )

    def set_trainable(self, names: Iterable[str]) -> None:
        """Make exactly `names` require gradients and clear all gradients."""
        wanted = set(names)
        unknown = wanted - set(self._tensors)
        if unknown:
            raise KeyError(f"Unknown parameter name(s): {sorted(unknown)}")
        for name, tensor in self._tensors.items():
            tensor.requires_grad = name in wanted and name not in BUFFER_NAMES
            tensor.grad = None

    def arrays(self) -> dict[str, FloatArray]:
        return {name: tensor.data for name, tensor in self._tensors.items()}

    def copy(self) -> ModelParams:
        tensors = {
            name: Tensor(tensor.data.copy(), dtype=tensor.dtype)
            for name, tensor in self._tensors.items()
        }
        return ModelParams(self._config, tensors)

    def load_arrays(self, arrays: Mapping[str, FloatArray]) -> None:
        """Overwrite values in place. Names and shapes must match exactly."""
        if set(arrays) != set(self._tensors):
            missing = sorted(set(self._tensors) - set(arrays))
            extra = sorted(set(arrays) - set(self._tensors))
            raise KeyError(f"Parameter names differ. Missing: {missing} Extra: {extra}")
        for name, array in arrays.items():
            tensor = self._tensors[name]
            if array.shape != tensor.shape:
                raise ValueError(
                    f"'{name}' has shape {array.shape}, expected {tensor.shape}"
                )
            tensor.data = np.require(array, dtype=tensor.dtype, requirements="C")
            tensor.grad = None

    def checksum(self, prefix: str = "") -> str:
        """SHA-256 over the names and raw bytes of all tensors under `prefix`."""
        digest = hashlib.sha256()
        for name in sorted(self._tensors):
            if not name.startswith(prefix):
                continue
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(self._tensors[name].data).tobytes())
        return digest.hexdigest()


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """Initialize parameters. Bit-reproducible for a fixed (config, seed)."""
    rng = np.random.default_rng(seed)
    arrays: dict[str, FloatArray] = {}

    def linear(prefix: str, fan_in: int, fan_out: int) -> None:
        arrays[f"{prefix}.weight"] = _trunc_normal(rng, (fan_in, fan_out))
        arrays[f"{prefix}.bias"] = np.zeros(fan_out, dtype=np.float32)

    def norm(prefix: str, dim: int) -> None:
        arrays[f"{prefix}.weight"] = np.ones(dim, dtype=np.float32)
        arrays[f"{prefix}.bias"] = np.zeros(dim, dtype=np.float32)

    def block(prefix: str, dim: int) -> None:
        hidden = config.hidden_dim(dim)
        norm(f"{prefix}.norm1", dim)
        for proj in ("q", "k", "v", "proj"):
            linear(f"{prefix}.attn.{proj}", dim, dim)
        norm(f"{prefix}.norm2", dim)
        linear(f"{prefix}.mlp.fc1", dim, hidden)
        linear(f"{prefix}.mlp.fc2", hidden, dim)

    enc, dec = config.encoder_dim, config.decoder_dim
    linear("encoder.patch_embed", config.patch_dim, enc)
    arrays["encoder.pos_embed"] = sincos_pos_embed_2d(enc, config.grid_size)
    for index in range(config.encoder_depth):
        block(f"encoder.blocks.{index}", enc)
    norm("encoder.norm", enc)

    linear("decoder.embed", enc, dec)
    arrays["decoder.mask_token"] = _trunc_normal(rng, (dec,))
    arrays["decoder.pos_embed"] = sincos_pos_embed_2d(dec, config.grid_size)
    for index in range(config.decoder_depth):
        block(f"decoder.blocks.{index}", dec)
    norm("decoder.norm", dec)

    linear("head_r", dec, config.patch_dim)
    linear("head_m", dec, config.patch_size**2)

    tensors = {name: Tensor(array) for name, array in arrays.items()}
    params = ModelParams(config, tensors)
    _LOGGER.debug(
        "Initialized %d tensors (%d values) with seed %d",
        len(params),
        sum(t.size for t in tensors.values()),
        seed,
    )
    return params


def _trunc_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> FloatArray:
    """Normal(0, 0.02) truncated to ±2σ by redrawing the outliers."""
    values = rng.standard_normal(shape)
    outside = np.abs(values) > 2.0  # noqa: PLR2004
    while outside.any():
        values[outside] = rng.standard_normal(int(outside.sum()))
        outside = np.abs(values) > 2.0  # noqa: PLR2004
    return (values * _INIT_STD).astype(np.float32)
