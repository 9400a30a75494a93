"""Minimal dense tensor kernel.

All feature maps, parameters, and intermediate results in this package are
carried by :class:`Tensor`: an immutable, row-major, float64 array with an
explicit shape.  The public operations below are the complete numerical
vocabulary used by the channel and fusion modules.

Conventions fixed here and relied on elsewhere:

* layout is row-major (C order); the on-disk format mirrors it,
* softmax subtracts the per-slice maximum before exponentiation,
* layer_norm adds ``eps`` (default 1e-5) inside the square root,
* convolutions are same-size with zero padding and odd kernels only.

Tensors are immutable after construction and every operation is a pure
function, so values may be shared freely across threads.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


class DomainError(ValueError):
    """Raised when a value is outside an operation's numeric domain."""


class Tensor:
    """Dense rank>=1 float64 tensor with immutable row-major storage."""

    __slots__ = ("_a",)

    def __init__(self, shape: Sequence[int], data: Iterable[float]) -> None:
        shape = tuple(int(s) for s in shape)
        if len(shape) == 0:
            raise DimensionError("tensor shape must have rank >= 1")
        if any(s <= 0 for s in shape):
            raise DimensionError(f"tensor dims must be positive, got {shape}")
        a = np.asarray(list(data), dtype=np.float64)
        n = math.prod(shape)
        if a.size != n:
            raise DimensionError(
                f"data length {a.size} does not match shape {shape} (need {n})"
            )
        if not np.all(np.isfinite(a)):
            raise DomainError("tensor data must be finite")
        a = a.reshape(shape)
        a.flags.writeable = False
        self._a = a

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_array(cls, arr: np.ndarray, check_finite: bool = True) -> "Tensor":
        """Wrap a numpy array (copied to contiguous float64 if needed)."""
        a = np.ascontiguousarray(arr, dtype=np.float64)
        if a.ndim == 0:
            raise DimensionError("tensor shape must have rank >= 1")
        if any(s <= 0 for s in a.shape):
            raise DimensionError(f"tensor dims must be positive, got {a.shape}")
        if check_finite and not np.all(np.isfinite(a)):
            raise DomainError("tensor data must be finite")
        if a is arr or a.base is arr:
            a = a.copy()
        a.flags.writeable = False
        t = object.__new__(cls)
        t._a = a
        return t

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        # Trusted internal path: arr is a fresh contiguous float64 array.
        arr.flags.writeable = False
        t = object.__new__(cls)
        t._a = arr
        return t

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "Tensor":
        return cls.full(shape, 0.0)

    @classmethod
    def full(cls, shape: Sequence[int], value: float) -> "Tensor":
        shape = tuple(int(s) for s in shape)
        if len(shape) == 0 or any(s <= 0 for s in shape):
            raise DimensionError(f"invalid tensor shape {shape}")
        return cls._wrap(np.full(shape, float(value), dtype=np.float64))

    # -- views ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self._a.shape

    @property
    def rank(self) -> int:
        return self._a.ndim

    @property
    def size(self) -> int:
        return self._a.size

    @property
    def array(self) -> np.ndarray:
        """Read-only numpy view of the underlying storage."""
        return self._a

    def tolist(self) -> list:
        return self._a.tolist()

    def ravel(self) -> np.ndarray:
        return self._a.reshape(-1)

    def item(self) -> float:
        if self._a.size != 1:
            raise DimensionError(f"item() needs a single-element tensor, got {self.shape}")
        return float(self._a.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Tensor)
            and self.shape == other.shape
            and bool(np.array_equal(self._a, other._a))
        )

    def __hash__(self) -> int:  # immutable value type
        return hash((self.shape, self._a.tobytes()))


def _axis(t: Tensor, axis: int) -> int:
    if not -t.rank <= axis < t.rank:
        raise DimensionError(f"axis {axis} invalid for shape {t.shape}")
    return axis % t.rank


# -- linear algebra ----------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over the trailing two axes."""
    if a.rank < 2 or b.rank < 2:
        raise DimensionError(f"matmul needs rank>=2 operands, got {a.shape} x {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul inner dims differ: {a.shape} x {b.shape}")
    try:
        out = np.matmul(a.array, b.array)
    except ValueError as exc:
        raise DimensionError(f"matmul batch dims incompatible: {a.shape} x {b.shape}") from exc
    return Tensor._wrap(np.ascontiguousarray(out))


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Softmax along ``axis``, computed with max subtraction."""
    ax = _axis(x, axis)
    a = x.array
    e = np.exp(a - np.max(a, axis=ax, keepdims=True))
    return Tensor._wrap(e / np.sum(e, axis=ax, keepdims=True))


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each trailing-axis vector to zero mean / unit variance, then affine."""
    c = x.shape[-1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise DimensionError(
            f"layer_norm affine shapes {gamma.shape}/{beta.shape} do not match last axis of {x.shape}"
        )
    a = x.array
    mean = a.mean(axis=-1, keepdims=True)
    var = a.var(axis=-1, keepdims=True)
    norm = (a - mean) / np.sqrt(var + eps)
    return Tensor._wrap(norm * gamma.array + beta.array)


def gelu(x: Tensor) -> Tensor:
    """Smooth gating nonlinearity (tanh formulation)."""
    a = x.array
    return Tensor._wrap(0.5 * a * (1.0 + np.tanh(0.7978845608028654 * (a + 0.044715 * a**3))))


# -- convolution -------------------------------------------------------------

_CONV_MODES = ("pointwise", "depthwise", "dense")


def conv2d(x: Tensor, kernel: Tensor, mode: str = "dense") -> Tensor:
    """Same-size zero-padded 2D convolution on an H x W x C map.

    Kernel layout is k x k x C_in x C_out; depthwise kernels use C_out = 1
    per group (shape k x k x C x 1) and produce H x W x C.
    """
    if mode not in _CONV_MODES:
        raise ValueError(f"unknown conv mode {mode!r}")
    if x.rank != 3:
        raise DimensionError(f"conv2d input must be H x W x C, got {x.shape}")
    if kernel.rank != 4:
        raise DimensionError(f"conv2d kernel must be k x k x C_in x C_out, got {kernel.shape}")
    kh, kw, c_in, c_out = kernel.shape
    if kh != kw or kh % 2 == 0:
        raise DimensionError(f"conv2d kernels must be square with odd size, got {kernel.shape}")
    c = x.shape[-1]
    if mode == "pointwise" and kh != 1:
        raise DimensionError(f"pointwise kernels must be 1x1, got {kernel.shape}")
    if mode == "depthwise":
        if c_in != c or c_out != 1:
            raise DimensionError(
                f"depthwise kernel {kernel.shape} inconsistent with {c} input channels"
            )
    elif c_in != c:
        raise DimensionError(f"kernel expects {c_in} input channels, feature map has {c}")

    a = x.array
    if kh == 1:
        if mode == "depthwise":
            out = a * kernel.array[0, 0, :, 0]
        else:
            out = a @ kernel.array[0, 0]
        return Tensor._wrap(np.ascontiguousarray(out))

    pad = kh // 2
    padded = np.pad(a, ((pad, pad), (pad, pad), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(padded, (kh, kw), axis=(0, 1))
    if mode == "depthwise":
        out = np.einsum("hwcij,ijc->hwc", win, kernel.array[:, :, :, 0], optimize=True)
    else:
        out = np.einsum("hwcij,ijcd->hwd", win, kernel.array, optimize=True)
    return Tensor._wrap(np.ascontiguousarray(out))


# -- layout ------------------------------------------------------------------


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0 or any(s <= 0 for s in shape):
        raise DimensionError(f"invalid reshape target {shape}")
    if math.prod(shape) != x.size:
        raise DimensionError(f"cannot reshape {x.shape} to {shape}")
    return Tensor._wrap(np.ascontiguousarray(x.array.reshape(shape)))


def permute(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(int(a) for a in axes)
    if sorted(axes) != list(range(x.rank)):
        raise DimensionError(f"permutation {axes} invalid for rank {x.rank}")
    return Tensor._wrap(np.ascontiguousarray(x.array.transpose(axes)))


def chunk(x: Tensor, parts: int) -> list[Tensor]:
    """Split the last axis into ``parts`` equal slices."""
    c = x.shape[-1]
    if parts <= 0 or c % parts != 0:
        raise DimensionError(f"cannot chunk last axis of {x.shape} into {parts} parts")
    step = c // parts
    return [
        Tensor._wrap(np.ascontiguousarray(x.array[..., i * step:(i + 1) * step]))
        for i in range(parts)
    ]


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise DimensionError("concat needs at least one tensor")
    ax = _axis(tensors[0], axis)
    base = tensors[0].shape
    for t in tensors[1:]:
        if t.rank != len(base) or any(
            i != ax and t.shape[i] != base[i] for i in range(t.rank)
        ):
            raise DimensionError(f"concat shapes incompatible: {base} vs {t.shape}")
    return Tensor._wrap(np.ascontiguousarray(np.concatenate([t.array for t in tensors], axis=ax)))


# -- elementwise and reductions -----------------------------------------------


def _same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op} needs matching shapes, got {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "add")
    return Tensor._wrap(a.array + b.array)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "mul")
    return Tensor._wrap(a.array * b.array)


def scale(x: Tensor, s: float) -> Tensor:
    return Tensor._wrap(x.array * float(s))


def _reduce(x: Tensor, axis: int | None, fn) -> Tensor | float:
    if axis is None:
        return float(fn(x.array))
    ax = _axis(x, axis)
    out = fn(x.array, axis=ax)
    if out.ndim == 0:
        return float(out)
    return Tensor._wrap(np.ascontiguousarray(out))


def reduce_sum(x: Tensor, axis: int | None = None) -> Tensor | float:
    return _reduce(x, axis, np.sum)


def reduce_mean(x: Tensor, axis: int | None = None) -> Tensor | float:
    return _reduce(x, axis, np.mean)


def reduce_min(x: Tensor, axis: int | None = None) -> Tensor | float:
    return _reduce(x, axis, np.min)


def reduce_max(x: Tensor, axis: int | None = None) -> Tensor | float:
    return _reduce(x, axis, np.max)
