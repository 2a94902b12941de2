"""Self-describing container for named 32-bit float tensors.

Layout (all integers little-endian u32):

    b"TADC" | version | header length | header (JSON) | tensor data | CRC-32

The tensor data is the concatenation of every tensor as raw little-endian
32-bit floats in header order. The CRC covers every byte before it.
"""

from __future__ import annotations

import logging
import math
import zlib
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import NonNegativeInt, ValidationError

from ..model import FrozenModel
from ..nn import ModelConfig, ModelParams, init_params
from ._atomic import atomic_write_bytes

_LOGGER = logging.getLogger(__name__)

MAGIC = b"TADC"
FORMAT_VERSION = 1
_U32 = np.dtype("<u4")
_F32 = np.dtype("<f4")

Stage = Literal["stage1", "stage2", "maps"]


class CheckpointError(ValueError):
    """A tensor container is unreadable or does not fit the expected model."""


class TensorEntry(FrozenModel):
    name: str
    dtype: Literal["<f4"] = "<f4"
    shape: tuple[NonNegativeInt, ...]

    @property
    def size(self) -> int:
        return math.prod(self.shape)


class ContainerHeader(FrozenModel):
    """JSON header of a tensor container."""

    stage: Stage
    seed: int
    # Architecture snapshot. Absent for plain map dumps.
    config: ModelConfig | None = None
    # Stages the parameters went through, oldest first (e.g. stage1, stage2)
    lineage: tuple[Stage, ...] = ()
    meta: dict[str, Any] = {}
    tensors: tuple[TensorEntry, ...] = ()


def encode_tensors(
    tensors: Mapping[str, NDArray[np.floating]], header: ContainerHeader
) -> bytes:
    """Serialize `tensors`. The header's tensor table is filled in here."""
    arrays = {name: np.asarray(array, dtype=_F32) for name, array in tensors.items()}
    entries = tuple(
        TensorEntry(name=name, shape=array.shape) for name, array in arrays.items()
    )
    header_bytes = header.model_copy(update={"tensors": entries}).model_dump_json()
    encoded_header = header_bytes.encode("utf8")
    prefix = MAGIC + np.array([FORMAT_VERSION, len(encoded_header)], _U32).tobytes()
    body = b"".join(np.ascontiguousarray(array).tobytes() for array in arrays.values())
    content = prefix + encoded_header + body
    return content + np.array([zlib.crc32(content)], _U32).tobytes()


def decode_tensors(
    data: bytes, *, source: str = "<bytes>"
) -> tuple[ContainerHeader, dict[str, NDArray[np.float32]]]:
    """Inverse of `encode_tensors`. Never returns partial results."""
    fixed = len(MAGIC) + 2 * _U32.itemsize
    if len(data) < fixed + _U32.itemsize:
        raise CheckpointError(f"'{source}' is truncated ({len(data)} bytes)")
    if data[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"'{source}' is not a tadpole tensor file (bad magic)")
    version, header_len = np.frombuffer(data, _U32, count=2, offset=len(MAGIC))
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"'{source}' has format version {version}. We only read {FORMAT_VERSION}."
        )
    content, (crc,) = data[:-4], np.frombuffer(data[-4:], _U32)
    if fixed + int(header_len) > len(content):
        raise CheckpointError(f"'{source}' is truncated inside the header")
    if zlib.crc32(content) != crc:
        raise CheckpointError(f"'{source}' is corrupt or truncated (CRC mismatch)")
    try:
        header = ContainerHeader.model_validate_json(
            content[fixed : fixed + int(header_len)]
        )
    except ValidationError as exc:
        raise CheckpointError(f"'{source}' has an invalid header: {exc}") from exc
    offset = fixed + int(header_len)
    expected = offset + sum(entry.size for entry in header.tensors) * _F32.itemsize
    if expected != len(content):
        raise CheckpointError(
            f"'{source}' holds {len(content) - offset} data bytes "
            f"but its header describes {expected - offset}"
        )
    tensors: dict[str, NDArray[np.float32]] = {}
    for entry in header.tensors:
        array = np.frombuffer(content, _F32, count=entry.size, offset=offset)
        tensors[entry.name] = array.reshape(entry.shape).astype(np.float32)
        offset += entry.size * _F32.itemsize
    return header, tensors


def save_tensors(
    path: Path, tensors: Mapping[str, NDArray[np.floating]], header: ContainerHeader
) -> None:
    atomic_write_bytes(path, encode_tensors(tensors, header))


def load_tensors(
    path: Path,
) -> tuple[ContainerHeader, dict[str, NDArray[np.float32]]]:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"Can not read '{path}': {exc}") from exc
    return decode_tensors(data, source=str(path))


def save_checkpoint(
    path: Path,
    params: ModelParams,
    *,
    stage: Literal["stage1", "stage2"],
    seed: int,
    lineage: tuple[Stage, ...] = (),
    meta: Mapping[str, Any] | None = None,
) -> ContainerHeader:
    """Write all parameters (buffers included) of `params`.

    `lineage` lists the stages the parameters went through before this one.
    """
    header = ContainerHeader(
        stage=stage,
        seed=seed,
        config=params.config,
        lineage=(*lineage, stage),
        meta=dict(meta or {}),
    )
    save_tensors(path, params.arrays(), header)
    _LOGGER.info(
        "Saved %s checkpoint '%s' (encoder checksum %s)",
        stage,
        path,
        params.checksum("encoder.")[:12],
    )
    return header


def load_checkpoint(
    path: Path,
    *,
    expect_config: ModelConfig | None = None,
    expect_stage: Literal["stage1", "stage2"] | None = None,
    require_stage1: bool = False,
) -> tuple[ModelParams, ContainerHeader]:
    """Read a checkpoint back into `ModelParams`.

    Rejects map dumps, an architecture other than `expect_config`, a stage
    other than `expect_stage` and, with `require_stage1`, parameters that
    never went through stage 1.
    """
    header, arrays = load_tensors(path)
    if header.stage == "maps" or header.config is None:
        raise CheckpointError(f"'{path}' holds score maps, not model parameters")
    if expect_config is not None and header.config != expect_config:
        raise CheckpointError(
            f"'{path}' was saved for a different architecture. "
            f"File: {header.config.model_dump()} Expected: {expect_config.model_dump()}"
        )
    if expect_stage is not None and header.stage != expect_stage:
        raise CheckpointError(
            f"'{path}' is a {header.stage} checkpoint. We need {expect_stage}."
        )
    if require_stage1 and "stage1" not in header.lineage:
        raise CheckpointError(
            f"'{path}' was not pretrained (lineage: {list(header.lineage)})"
        )
    params = init_params(header.config, seed=0)
    try:
        params.load_arrays(arrays)
    except (KeyError, ValueError) as exc:
        msg = f"'{path}' does not match its architecture: {exc}"
        raise CheckpointError(msg) from exc
    return params, header

