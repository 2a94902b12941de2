from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from ._tensor import FloatArray, GradTape, Tensor


def gradcheck(
    func: Callable[..., Tensor],
    inputs: Sequence[FloatArray],
    *,
    eps: float = 1e-6,
) -> float:
    """Compare tape gradients of `func` to central finite differences.

    `func` maps tensors to a scalar tensor. Everything runs in 64-bit.
    Returns the worst relative error over all inputs, measured as
    `max|analytic - numeric| / max(max|analytic|, max|numeric|)`.
    """
    arrays = [np.asarray(x, dtype=np.float64) for x in inputs]

    leaves = [Tensor(x, requires_grad=True, dtype=np.float64) for x in arrays]
    with GradTape() as tape:
        out = func(*leaves)
    tape.backward(out)

    worst = 0.0
    for index, leaf in enumerate(leaves):
        analytic = leaf.grad if leaf.grad is not None else np.zeros_like(arrays[index])
        numeric = _numeric_grad(func, arrays, index, eps)
        scale = max(float(np.abs(analytic).max()), float(np.abs(numeric).max()), 1e-12)
        worst = max(worst, float(np.abs(analytic - numeric).max()) / scale)
    return worst


def _numeric_grad(
    func: Callable[..., Tensor],
    arrays: list[FloatArray],
    index: int,
    eps: float,
) -> FloatArray:
    base = arrays[index]
    grad = np.zeros_like(base)
    for position in np.ndindex(base.shape):
        values = []
        for sign in (1.0, -1.0):
            shifted = base.copy()
            shifted[position] += sign * eps
            tensors = [
                Tensor(shifted if i == index else x, dtype=np.float64)
                for i, x in enumerate(arrays)
            ]
            values.append(func(*tensors).item())
        grad[position] = (values[0] - values[1]) / (2.0 * eps)
    return grad
