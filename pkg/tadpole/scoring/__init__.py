"""Score maps (E, P, S) and image-level anomaly scores."""

from ._maps import (
    MapArray,
    Normalize,
    Pooling,
    ScoreMaps,
    fuse,
    image_score,
    normalize,
    reconstruction_error,
    smooth,
)
from ._score import ScoreOptions, ScoreVariant, masked_error, score_image

__all__ = (
    "MapArray",
    "Normalize",
    "Pooling",
    "ScoreMaps",
    "ScoreOptions",
    "ScoreVariant",
    "fuse",
    "image_score",
    "masked_error",
    "normalize",
    "reconstruction_error",
    "score_image",
    "smooth",
)
