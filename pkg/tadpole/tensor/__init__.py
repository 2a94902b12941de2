"""Dense tensors with reverse-mode autodiff, AdamW and learning-rate schedules."""

from ._gradcheck import gradcheck
from ._ops import (
    add,
    div,
    gather_rows,
    gelu,
    layernorm,
    matmul,
    mean,
    mul,
    reshape,
    scatter_rows,
    sigmoid,
    softmax,
    softplus,
    sub,
    sum_,
    transpose,
)
from ._optim import AdamW, AdamWState, OptimizerConfig, adamw_step, clip_grad_norm
from ._schedule import (
    HalfCycleSchedule,
    PeriodicSchedule,
    Schedule,
    cosine_lr,
    scaled_lr,
)
from ._tensor import (
    FloatArray,
    GradTape,
    ShapeError,
    TapeEntry,
    Tensor,
    TokenIndexError,
    no_grad,
)

__all__ = (
    "AdamW",
    "AdamWState",
    "FloatArray",
    "GradTape",
    "HalfCycleSchedule",
    "OptimizerConfig",
    "PeriodicSchedule",
    "Schedule",
    "ShapeError",
    "TapeEntry",
    "Tensor",
    "TokenIndexError",
    "adamw_step",
    "add",
    "clip_grad_norm",
    "cosine_lr",
    "div",
    "gather_rows",
    "gelu",
    "gradcheck",
    "layernorm",
    "matmul",
    "mean",
    "mul",
    "no_grad",
    "reshape",
    "scaled_lr",
    "scatter_rows",
    "sigmoid",
    "softmax",
    "softplus",
    "sub",
    "sum_",
    "transpose",
)
