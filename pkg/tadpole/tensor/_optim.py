from __future__ import annotations

import logging
import math
from collections.abc import Collection, Mapping
from dataclasses import dataclass, field, replace

import numpy as np
from pydantic import Field, NonNegativeFloat, PositiveFloat

from ..model import FrozenModel
from ._tensor import FloatArray, ShapeError, Tensor

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdamWState:
    """Moment buffers and hyperparameters of AdamW."""

    beta1: float = 0.9
    beta2: float = 0.95
    eps: float = 1e-8
    weight_decay: float = 0.05
    step: int = 0
    first_moment: Mapping[str, FloatArray] = field(default_factory=dict)
    second_moment: Mapping[str, FloatArray] = field(default_factory=dict)


def adamw_step(
    params: Mapping[str, FloatArray],
    grads: Mapping[str, FloatArray],
    state: AdamWState,
    lr: float,
    *,
    no_decay: Collection[str] = (),
) -> tuple[dict[str, FloatArray], AdamWState]:
    """Return updated parameters and state after one AdamW step.

    Parameters without an entry in `grads` are passed through untouched. The
    weight decay is decoupled: it subtracts `lr * weight_decay * param` and
    never goes through the moment estimates. Names in `no_decay` skip it.

    Pure function: the inputs are not modified.
    """
    if lr < 0:
        raise ValueError(f"Learning rate must be non-negative. We got {lr}")
    step = state.step + 1
    correction1 = 1.0 - state.beta1**step
    correction2 = 1.0 - state.beta2**step
    new_params = dict(params)
    first = dict(state.first_moment)
    second = dict(state.second_moment)
    for name, grad in grads.items():
        param = params[name]
        if grad.shape != param.shape:
            raise ShapeError(
                f"adamw_step: gradient {grad.shape} does not match "
                f"parameter '{name}' {param.shape}"
            )
        m = first.get(name, np.zeros_like(param))
        v = second.get(name, np.zeros_like(param))
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        decay = 0.0 if name in no_decay else lr * state.weight_decay
        updated = param - decay * param - lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_params[name] = updated.astype(param.dtype, copy=False)
        first[name] = m.astype(param.dtype, copy=False)
        second[name] = v.astype(param.dtype, copy=False)
    new_state = replace(state, step=step, first_moment=first, second_moment=second)
    return new_params, new_state


def clip_grad_norm(
    grads: Mapping[str, FloatArray], max_norm: float
) -> tuple[dict[str, FloatArray], float]:
    """Scale all gradients so their global L2 norm is at most `max_norm`.

    Returns the (possibly scaled) gradients and the norm before clipping.
    """
    total = math.sqrt(
        sum(float(np.sum(g.astype(np.float64) ** 2)) for g in grads.values())
    )
    if total <= max_norm or total == 0.0:
        return dict(grads), total
    scale = max_norm / total
    return {name: (g * scale).astype(g.dtype) for name, g in grads.items()}, total


class AdamW:
    """Stateful wrapper around `adamw_step` for the training loops."""

    def __init__(
        self,
        *,
        beta1: float = 0.9,
        beta2: float = 0.95,
        eps: float = 1e-8,
        weight_decay: float = 0.05,
        clip_norm: float | None = None,
        no_decay: Collection[str] = (),
    ) -> None:
        self.state = AdamWState(
            beta1=beta1, beta2=beta2, eps=eps, weight_decay=weight_decay
        )
        self._clip_norm = clip_norm
        self._no_decay = frozenset(no_decay)

    def step(self, params: Mapping[str, Tensor], lr: float) -> None:
        """Apply one update to every tensor that has a gradient, then clear it."""
        grads = {
            name: tensor.grad
            for name, tensor in params.items()
            if tensor.grad is not None
        }
        if self._clip_norm is not None:
            grads, norm = clip_grad_norm(grads, self._clip_norm)
            _LOGGER.debug("Gradient norm %.4g (clip at %.4g)", norm, self._clip_norm)
        arrays = {name: params[name].data for name in grads}
        updated, self.state = adamw_step(
            arrays, grads, self.state, lr, no_decay=self._no_decay
        )
        for name in grads:
            params[name].data = updated[name]
            params[name].grad = None


class OptimizerConfig(FrozenModel):
    """AdamW hyperparameters as they appear in run configs."""

    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.95, ge=0.0, lt=1.0)
    eps: PositiveFloat = 1e-8
    weight_decay: NonNegativeFloat = 0.05
    clip_norm: PositiveFloat | None = None

    def build(self, *, no_decay: Collection[str] = ()) -> AdamW:
        return AdamW(
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            weight_decay=self.weight_decay,
            clip_norm=self.clip_norm,
            no_decay=no_decay,
        )
