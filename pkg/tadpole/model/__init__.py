from ._errors import ConfigError, DatasetError
from ._frozen_model import FrozenModel, PatchError
from ._range import FloatRange, IntRange

__all__ = (
    "ConfigError",
    "DatasetError",
    "FloatRange",
    "FrozenModel",
    "IntRange",
    "PatchError",
)
