from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Sequence
from contextlib import AbstractContextManager, contextmanager
from contextvars import ContextVar, Token
from dataclasses import dataclass
from types import TracebackType
from typing import Any, Self

import numpy as np
from numpy.typing import ArrayLike, DTypeLike, NDArray

_LOGGER = logging.getLogger(__name__)

FloatArray = NDArray[np.floating[Any]]

# Given the gradient w.r.t. the output, return the gradient w.r.t. each input.
# `None` means "no gradient for this input" (e.g., an index argument).
BackwardRule = Callable[[FloatArray], Sequence[FloatArray | None]]


class ShapeError(ValueError):
    """Tensor shapes are incompatible for the requested operation."""


class TokenIndexError(IndexError):
    """A row index is out of range or repeated where it must be unique."""


class Tensor:
    """Dense row-major array that optionally participates in a `GradTape`.

    Tensors are values: operations return new tensors and never modify their
    inputs. The optimizer is the only writer and it swaps `data` wholesale.
    """

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(
        self,
        data: ArrayLike,
        *,
        requires_grad: bool = False,
        dtype: DTypeLike = np.float32,
    ) -> None:
        self.data: FloatArray = np.require(
            np.asarray(data, dtype=dtype), requirements="C"
        )
        self.requires_grad = requires_grad
        self.grad: FloatArray | None = None

    @classmethod
    def _wrap(cls, data: FloatArray, *, requires_grad: bool) -> Tensor:
        # Keep the dtype of the computation (32-bit in training, 64-bit in
        # gradient checks).
        return cls(data, requires_grad=requires_grad, dtype=data.dtype)

    @classmethod
    def zeros(cls, shape: Sequence[int], *, dtype: DTypeLike = np.float32) -> Tensor:
        return cls(np.zeros(tuple(shape), dtype=dtype), dtype=dtype)

    @classmethod
    def ones(cls, shape: Sequence[int], *, dtype: DTypeLike = np.float32) -> Tensor:
        return cls(np.ones(tuple(shape), dtype=dtype), dtype=dtype)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype[Any]:
        return self.data.dtype

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single element. Shape is {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> FloatArray:
        """Return a copy of the underlying array."""
        return self.data.copy()

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    # Operator sugar. The implementations live in `_ops`.
    def __add__(self, other: Tensor | float) -> Tensor:
        from ._ops import add  # noqa: PLC0415

        return add(self, other)

    def __radd__(self, other: float) -> Tensor:
        from ._ops import add  # noqa: PLC0415

        return add(self, other)

    def __sub__(self, other: Tensor | float) -> Tensor:
        from ._ops import sub  # noqa: PLC0415

        return sub(self, other)

    def __rsub__(self, other: float) -> Tensor:
        from ._ops import sub  # noqa: PLC0415

        return sub(other, self)

    def __mul__(self, other: Tensor | float) -> Tensor:
        from ._ops import mul  # noqa: PLC0415

        return mul(self, other)

    def __rmul__(self, other: float) -> Tensor:
        from ._ops import mul  # noqa: PLC0415

        return mul(self, other)

    def __truediv__(self, other: Tensor | float) -> Tensor:
        from ._ops import div  # noqa: PLC0415

        return div(self, other)

    def __neg__(self) -> Tensor:
        from ._ops import mul  # noqa: PLC0415

        return mul(self, -1.0)

    def __matmul__(self, other: Tensor) -> Tensor:
        from ._ops import matmul  # noqa: PLC0415

        return matmul(self, other)


@dataclass(frozen=True, slots=True)
class TapeEntry:
    """One recorded operation."""

    name: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


_CURRENT_TAPE: ContextVar[GradTape | None] = ContextVar("tadpole_tape", default=None)


class GradTape(AbstractContextManager["GradTape"]):
    """Records operations for reverse-mode differentiation.

    Usage:

        with GradTape() as tape:
            loss = model_loss(params, batch)
        tape.backward(loss)

    Operations only record while a tape is active and at least one input
    requires a gradient. The tape is confined to the thread (context) that
    entered it.
    """

    def __init__(self) -> None:
        self._entries: list[TapeEntry] = []
        self._token: Token[GradTape | None] | None = None

    @property
    def entries(self) -> tuple[TapeEntry, ...]:
        return tuple(self._entries)

    def record(self, entry: TapeEntry) -> None:
        self._entries.append(entry)

    def __enter__(self) -> Self:
        if self._token is not None:
            raise RuntimeError("GradTape is not reentrant")
        self._token = _CURRENT_TAPE.set(self)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        assert self._token is not None
        _CURRENT_TAPE.reset(self._token)
        self._token = None

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into `grad` of every leaf on the tape.

        Entries are stored in creation order, which is a topological order,
        so a single reverse sweep visits each entry exactly once.
        """
        if loss.size != 1:
            raise ShapeError(f"backward() needs a scalar loss. Shape is {loss.shape}")
        if not loss.requires_grad:
            raise ValueError("The loss does not depend on any tensor that needs grad")
        grads: dict[int, FloatArray] = {id(loss): np.ones_like(loss.data)}
        nodes: dict[int, Tensor] = {id(loss): loss}
        for entry in reversed(self._entries):
            out_grad = grads.pop(id(entry.output), None)
            if out_grad is None:
                continue
            input_grads = entry.backward(out_grad)
            for tensor, grad in zip(entry.inputs, input_grads, strict=True):
                if grad is None or not tensor.requires_grad:
                    continue
                if grad.shape != tensor.data.shape:
                    raise ShapeError(
                        f"Backward rule of '{entry.name}' returned gradient of "
                        f"shape {grad.shape} for input of shape {tensor.shape}"
                    )
                key = id(tensor)
                grads[key] = grads[key] + grad if key in grads else grad
                nodes[key] = tensor
        # Whatever is left never showed up as an output, i.e., it's a leaf.
        for key, grad in grads.items():
            leaf = nodes[key]
            grad = grad.astype(leaf.dtype, copy=False)
            leaf.grad = grad if leaf.grad is None else leaf.grad + grad
        _LOGGER.debug("Backward pass over %d recorded operations", len(self._entries))


@contextmanager
def no_grad() -> Iterator[None]:
    """Suspend recording on the current tape (if any)."""
    token = _CURRENT_TAPE.set(None)
    try:
        yield
    finally:
        _CURRENT_TAPE.reset(token)


def record(
    name: str,
    inputs: Sequence[Tensor],
    output: FloatArray,
    backward: BackwardRule,
) -> Tensor:
    """Wrap `output` in a tensor and put the operation on the active tape."""
    tape = _CURRENT_TAPE.get()
    track = tape is not None and any(tensor.requires_grad for tensor in inputs)
    result = Tensor._wrap(output, requires_grad=track)  # noqa: SLF001
    if track:
        assert tape is not None
        tape.record(TapeEntry(name, tuple(inputs), result, backward))
    return result
