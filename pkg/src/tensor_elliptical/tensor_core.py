"""Tensor shapes, vectorization and mode unfoldings.

A tensor with dimensions ``(p_1, ..., p_k)`` is stored as its vectorization
``vec X = sum x_{i_1...i_k} e_{i_1} (x) ... (x) e_{i_k}``.  Under the usual
Kronecker product the last index varies fastest, which is exactly numpy's
C order, so ``vec`` is ``X.reshape(-1)`` on an array indexed ``X[i_1, ..., i_k]``.

Multi-indices at the public surface are 1-based; linear positions are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "TensorShape",
    "DataTensor",
    "linear_index",
    "vec",
    "unvec",
    "mode_unfold",
    "mode_fold",
    "mode_multiply",
]


@dataclass(frozen=True)
class TensorShape:
    """Dimension vector ``(p_1, ..., p_k)`` of an order-k tensor."""

    dims: tuple[int, ...]

    def __init__(self, dims):
        if isinstance(dims, TensorShape):
            dims = dims.dims
        elif np.isscalar(dims):
            dims = (dims,)
        dims = tuple(int(d) for d in dims)
        if len(dims) < 1:
            raise DomainError("a tensor shape needs at least one mode")
        if any(d < 1 for d in dims):
            raise DomainError(f"all dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def pstar(self) -> int:
        """Total number of entries, the product of all dimensions."""
        return prod(self.dims)

    def p_complement(self, r: int) -> int:
        """``p* / p_r`` for the 1-based mode ``r``."""
        self._check_mode(r)
        return self.pstar // self.dims[r - 1]

    def partial_product(self, a: int, b: int) -> int:
        """Product ``p_a * ... * p_b`` over 1-based modes (empty product is 1)."""
        if b < a:
            return 1
        return prod(self.dims[a - 1 : b])

    def _check_mode(self, r: int) -> None:
        if not 1 <= r <= self.order:
            raise DomainError(f"mode {r} out of range 1..{self.order}")

    def __iter__(self):
        return iter(self.dims)

    def __len__(self):
        return len(self.dims)

    def __repr__(self):
        return f"TensorShape{self.dims}"


def as_shape(shape) -> TensorShape:
    return shape if isinstance(shape, TensorShape) else TensorShape(shape)


@dataclass(frozen=True)
class DataTensor:
    """A tensor stored by its vectorization.

    Parameters
    ----------
    shape : TensorShape
    values : ndarray
        Flat array of length ``p*`` in vec order.
    """

    shape: TensorShape
    values: np.ndarray

    def __init__(self, shape, values):
        shape = as_shape(shape)
        values = np.array(values, dtype=float).reshape(-1)
        if values.size != shape.pstar:
            raise DomainError(
                f"expected {shape.pstar} values for shape {shape.dims}, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("tensor values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, array) -> "DataTensor":
        """Build from an array indexed ``X[i_1 - 1, ..., i_k - 1]``."""
        array = np.asarray(array, dtype=float)
        return cls(TensorShape(array.shape or (1,)), array.reshape(-1))

    def to_array(self) -> np.ndarray:
        return self.values.reshape(self.shape.dims)

    def __getitem__(self, multi_index):
        return self.values[linear_index(multi_index, self.shape)]


def linear_index(multi_index: Sequence[int], shape) -> int:
    """0-based position of the 1-based ``multi_index`` inside ``vec X``."""
    shape = as_shape(shape)
    multi_index = tuple(int(i) for i in multi_index)
    if len(multi_index) != shape.order:
        raise DomainError(
            f"multi-index has {len(multi_index)} entries, shape has {shape.order} modes"
        )
    pos = 0
    for mode, (i, p) in enumerate(zip(multi_index, shape.dims), start=1):
        if not 1 <= i <= p:
            raise DomainError(f"index {i} out of range 1..{p} in mode {mode}")
        pos = pos * p + (i - 1)
    return pos


def vec(tensor: DataTensor) -> np.ndarray:
    """Vectorization of ``tensor``; storage already is vec order so this copies."""
    return np.array(tensor.values)


def unvec(vector, shape) -> DataTensor:
    """Inverse of :func:`vec`."""
    shape = as_shape(shape)
    vector = np.asarray(vector, dtype=float).reshape(-1)
    if vector.size != shape.pstar:
        raise DomainError(f"length {vector.size} does not match p* = {shape.pstar}")
    return DataTensor(shape, vector)


def mode_unfold(tensor, r: int, shape=None) -> np.ndarray:
    """Mode-``r`` unfolding, a ``p_r x (p*/p_r)`` matrix.

    Columns run over the remaining modes in ascending order with the last
    one varying fastest.  ``tensor`` may be a :class:`DataTensor` or a flat
    vec-order array together with ``shape``.
    """
    if isinstance(tensor, DataTensor):
        shape, values = tensor.shape, tensor.values
    else:
        if shape is None:
            raise DomainError("shape is required when unfolding a flat array")
        shape = as_shape(shape)
        values = np.asarray(tensor, dtype=float).reshape(-1)
        if values.size != shape.pstar:
            raise DomainError(f"length {values.size} does not match p* = {shape.pstar}")
    shape._check_mode(r)
    arr = values.reshape(shape.dims)
    return np.moveaxis(arr, r - 1, 0).reshape(shape.dims[r - 1], -1)


def mode_fold(matrix, r: int, shape) -> DataTensor:
    """Inverse of :func:`mode_unfold`."""
    shape = as_shape(shape)
    shape._check_mode(r)
    dims = shape.dims
    moved = (dims[r - 1],) + dims[: r - 1] + dims[r:]
    arr = np.asarray(matrix, dtype=float).reshape(moved)
    return DataTensor(shape, np.moveaxis(arr, 0, r - 1).reshape(-1))


def mode_multiply(x, matrices, shape) -> np.ndarray:
    """Apply ``M_1 (x) ... (x) M_k`` to vec-order rows without forming the product.

    Parameters
    ----------
    x : ndarray, shape (p*,) or (n, p*)
    matrices : sequence of k square matrices (``None`` entries act as identity)
    shape : TensorShape

    Returns
    -------
    ndarray with the same leading shape as ``x``.
    """
    shape = as_shape(shape)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    arr = x.reshape((-1,) + shape.dims)
    for axis, m in enumerate(matrices, start=1):
        if m is None:
            continue
        arr = np.moveaxis(np.tensordot(m, arr, axes=([1], [axis])), 0, axis)
    out = arr.reshape(-1, shape.pstar)
    return out[0] if single else out
