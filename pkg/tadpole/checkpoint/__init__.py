"""Tensor container files and atomic file writes. Needs no extras."""

from ._atomic import atomic_output, atomic_write_bytes, atomic_write_text
from ._container import (
    FORMAT_VERSION,
    MAGIC,
    CheckpointError,
    ContainerHeader,
    Stage,
    TensorEntry,
    decode_tensors,
    encode_tensors,
    load_checkpoint,
    load_tensors,
    save_checkpoint,
    save_tensors,
)

__all__ = (
    "FORMAT_VERSION",
    "MAGIC",
    "CheckpointError",
    "ContainerHeader",
    "Stage",
    "TensorEntry",
    "atomic_output",
    "atomic_write_bytes",
    "atomic_write_text",
    "decode_tensors",
    "encode_tensors",
    "load_checkpoint",
    "load_tensors",
    "save_checkpoint",
    "save_tensors",
)
