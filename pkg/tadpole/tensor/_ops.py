"""Differentiable operations.

Broadcasting is deliberately narrow. Binary elementwise operations accept:

 * two tensors of identical shape,
 * a tensor and a scalar (Python number or 0-d tensor), or
 * a tensor and a 1-d tensor whose length equals the tensor's last axis.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._tensor import FloatArray, ShapeError, Tensor, TokenIndexError, record

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_GELU_COEFF = 0.044715


def _as_tensor(value: Tensor | float, like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=like.dtype)


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape == b.shape:
        return
    for small, big in ((a, b), (b, a)):
        if small.ndim == 0:
            return
        if small.ndim == 1 and big.ndim >= 1 and small.shape[0] == big.shape[-1]:
            return
    raise ShapeError(f"{op}: can not combine shapes {a.shape} and {b.shape}")


def _reduce_to(grad: FloatArray, shape: tuple[int, ...]) -> FloatArray:
    """Sum `grad` down to `shape` (the inverse of our limited broadcasting)."""
    if grad.shape == shape:
        return grad
    if shape == ():
        return np.asarray(grad.sum(), dtype=grad.dtype)
    assert len(shape) == 1
    return grad.reshape(-1, shape[0]).sum(axis=0)


def add(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = _binary_operands(a, b)
    _check_broadcast("add", a, b)

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return _reduce_to(grad, a.shape), _reduce_to(grad, b.shape)

    return record("add", (a, b), a.data + b.data, backward)


def sub(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = _binary_operands(a, b)
    _check_broadcast("sub", a, b)

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return _reduce_to(grad, a.shape), _reduce_to(-grad, b.shape)

    return record("sub", (a, b), a.data - b.data, backward)


def mul(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = _binary_operands(a, b)
    _check_broadcast("mul", a, b)

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (
            _reduce_to(grad * b.data, a.shape),
            _reduce_to(grad * a.data, b.shape),
        )

    return record("mul", (a, b), a.data * b.data, backward)


def div(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = _binary_operands(a, b)
    _check_broadcast("div", a, b)
    out = a.data / b.data

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (
            _reduce_to(grad / b.data, a.shape),
            _reduce_to(-grad * out / b.data, b.shape),
        )

    return record("div", (a, b), out, backward)


def _binary_operands(a: Tensor | float, b: Tensor | float) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, _as_tensor(b, a)
    if isinstance(b, Tensor):
        return _as_tensor(a, b), b
    raise TypeError("At least one operand must be a Tensor")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of 2-d tensors, or batched over one equal leading axis."""
    batched = a.ndim == 3 and b.ndim == 3 and a.shape[0] == b.shape[0]  # noqa: PLR2004
    plain = a.ndim == 2 and b.ndim == 2  # noqa: PLR2004
    if not (plain or batched) or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: can not multiply shapes {a.shape} and {b.shape}")

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        grad_a = np.matmul(grad, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), grad)
        return grad_a, grad_b

    return record("matmul", (a, b), np.matmul(a.data, b.data), backward)


def transpose(x: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    """Materialized transpose. Reverses the axes if `axes` is omitted."""
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError(f"transpose: {axes} is not a permutation for {x.shape}")
    inverse = tuple(int(i) for i in np.argsort(axes))

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (np.ascontiguousarray(np.transpose(grad, inverse)),)

    out = np.ascontiguousarray(np.transpose(x.data, axes))
    return record("transpose", (x,), out, backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    if math.prod(shape) != x.size:
        raise ShapeError(f"reshape: can not reshape {x.shape} into {shape}")

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (grad.reshape(x.shape),)

    return record("reshape", (x,), x.data.reshape(shape), backward)


def sum_(x: Tensor, axis: int | None = None) -> Tensor:
    """Sum over all elements or over a single axis."""
    if axis is None:

        def backward_all(grad: FloatArray) -> Sequence[FloatArray | None]:
            return (np.broadcast_to(grad, x.shape).copy(),)

        return record("sum", (x,), np.asarray(x.data.sum(), x.dtype), backward_all)

    def backward_axis(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (np.broadcast_to(np.expand_dims(grad, axis), x.shape).copy(),)

    return record("sum", (x,), x.data.sum(axis=axis), backward_axis)


def mean(x: Tensor, axis: int | None = None) -> Tensor:
    count = x.size if axis is None else x.shape[axis]
    return mul(sum_(x, axis), 1.0 / count)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    if not -x.ndim <= axis < x.ndim:
        raise ShapeError(f"softmax: axis {axis} is invalid for shape {x.shape}")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    exps = np.exp(shifted)
    out = exps / exps.sum(axis=axis, keepdims=True)

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        dot = (grad * out).sum(axis=axis, keepdims=True)
        return (out * (grad - dot),)

    return record("softmax", (x,), out, backward)


def layernorm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    """Normalize the last axis to zero mean and unit variance, then scale/shift."""
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeError(
            f"layernorm: gamma {gamma.shape} and beta {beta.shape} must be ({d},)"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        d_hat = grad * gamma.data
        d_x = inv_std * (
            d_hat
            - d_hat.mean(axis=-1, keepdims=True)
            - x_hat * (d_hat * x_hat).mean(axis=-1, keepdims=True)
        )
        d_gamma = (grad * x_hat).reshape(-1, d).sum(axis=0)
        d_beta = grad.reshape(-1, d).sum(axis=0)
        return d_x, d_gamma, d_beta

    out = x_hat * gamma.data + beta.data
    return record("layernorm", (x, gamma, beta), out, backward)


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh approximation."""
    inner = _SQRT_2_OVER_PI * (x.data + _GELU_COEFF * x.data**3)
    tanh = np.tanh(inner)

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        d_inner = _SQRT_2_OVER_PI * (1.0 + 3.0 * _GELU_COEFF * x.data**2)
        local = 0.5 * (1.0 + tanh) + 0.5 * x.data * (1.0 - tanh**2) * d_inner
        return (grad * local,)

    return record("gelu", (x,), 0.5 * x.data * (1.0 + tanh), backward)


def _sigmoid(values: NDArray[Any]) -> NDArray[Any]:
    # The tanh form is overflow-free and gives exactly 0.5 at zero.
    return 0.5 * (1.0 + np.tanh(0.5 * values))  # type: ignore[no-any-return]


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid(x.data)

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (grad * out * (1.0 - out),)

    return record("sigmoid", (x,), out, backward)


def softplus(x: Tensor) -> Tensor:
    """log(1 + exp(x)) without overflow."""
    out = np.maximum(x.data, 0.0) + np.log1p(np.exp(-np.abs(x.data)))

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (grad * _sigmoid(x.data),)

    return record("softplus", (x,), out, backward)


def _check_indices(
    op: str, indices: ArrayLike, size: int, *, unique: bool
) -> NDArray[np.intp]:
    idx = np.asarray(indices, dtype=np.intp).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise TokenIndexError(f"{op}: indices must lie in [0, {size}). Got {idx}")
    if unique and np.unique(idx).size != idx.size:
        raise TokenIndexError(f"{op}: indices must be distinct. Got {idx}")
    return idx


def gather_rows(x: Tensor, indices: ArrayLike) -> Tensor:
    """Select rows (first axis) of `x` in the given order."""
    idx = _check_indices("gather_rows", indices, x.shape[0], unique=False)

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        grad_x = np.zeros_like(x.data)
        np.add.at(grad_x, idx, grad)
        return (grad_x,)

    return record("gather_rows", (x,), x.data[idx], backward)


def scatter_rows(x: Tensor, indices: ArrayLike, size: int) -> Tensor:
    """Place row k of `x` at row `indices[k]` of a zero tensor with `size` rows."""
    idx = _check_indices("scatter_rows", indices, size, unique=True)
    if idx.size != x.shape[0]:
        raise ShapeError(
            f"scatter_rows: {idx.size} indices for {x.shape[0]} rows of {x.shape}"
        )
    out = np.zeros((size, *x.shape[1:]), dtype=x.dtype)
    out[idx] = x.data

    def backward(grad: FloatArray) -> Sequence[FloatArray | None]:
        return (grad[idx],)

    return record("scatter_rows", (x,), out, backward)
