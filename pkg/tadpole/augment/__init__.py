"""Stage-2 augmentation: corrupt random blocks and label them pixel by pixel."""

from ._config import ALL_OPS, CorruptionConfig, CorruptionOp
from ._corrupt import (
    AugmentedSample,
    Block,
    apply_op,
    corrupt,
    corrupt_blocks,
    corrupted_count,
    identity_sample,
    make_epoch_stream,
)

__all__ = (
    "ALL_OPS",
    "AugmentedSample",
    "Block",
    "CorruptionConfig",
    "CorruptionOp",
    "apply_op",
    "corrupt",
    "corrupt_blocks",
    "corrupted_count",
    "identity_sample",
    "make_epoch_stream",
)
