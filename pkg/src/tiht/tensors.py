"""Dense tensor values and the reshaping/multilinear algebra everything else builds on.

Tensors are plain :class:`numpy.ndarray` objects of dtype float64 ("real"
field) or complex128 ("complex" field).  A single linearization rule is used
everywhere: multi-indices map to flat offsets colexicographically, i.e. the
*first* index varies fastest.  This is numpy's Fortran order, so ``vec`` is
``reshape(-1, order="F")`` and every matricization below linearizes its row
and column index groups the same way.  Mode indices are 0-based.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

__all__ = [
    "check_shape",
    "as_tensor",
    "field_of",
    "common_field",
    "vec",
    "unvec",
    "check_modes",
    "complement_modes",
    "matricize",
    "tensorize",
    "mode_product",
    "inner_product",
    "frobenius_norm",
]

_REAL_DTYPE = np.float64
_COMPLEX_DTYPE = np.complex128


def check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    """Validate tensor extents: order >= 1 and every extent >= 1."""
    dims = tuple(int(n) for n in shape)
    if len(dims) < 1:
        raise ValueError("tensor order must be at least 1")
    if any(n < 1 for n in dims):
        raise ValueError(f"all extents must be >= 1, got {dims}")
    return dims


def field_of(X: np.ndarray) -> str:
    """Return "complex" for complex dtypes, "real" otherwise."""
    return "complex" if np.iscomplexobj(X) else "real"


def common_field(X: np.ndarray, Y: np.ndarray) -> str:
    """Fields of both operands; mixing real and complex is an error, not a coercion."""
    fx, fy = field_of(X), field_of(Y)
    if fx != fy:
        raise ValueError(f"mixed scalar fields: {fx} vs {fy}")
    return fx


def as_tensor(data, field: str | None = None) -> np.ndarray:
    """Coerce ``data`` to a dense tensor in the requested scalar field.

    ``field`` is "real", "complex" or None (keep the field of ``data``).
    """
    X = np.asarray(data)
    if field is None:
        field = field_of(X)
    if field == "real":
        if np.iscomplexobj(X):
            raise ValueError("complex data cannot be coerced to the real field")
        X = np.asarray(X, dtype=_REAL_DTYPE)
    elif field == "complex":
        X = np.asarray(X, dtype=_COMPLEX_DTYPE)
    else:
        raise ValueError(f"unknown field {field!r}")
    check_shape(X.shape)
    return X


def vec(X: np.ndarray) -> np.ndarray:
    """Flatten to the documented linear order (first index fastest)."""
    return np.reshape(X, -1, order="F")


def unvec(x: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec` for the given shape."""
    dims = check_shape(shape)
    x = np.asarray(x)
    if x.size != math.prod(dims):
        raise ValueError(f"vector of length {x.size} does not fill shape {dims}")
    return np.reshape(x, dims, order="F")


def check_modes(modes: Sequence[int], order: int) -> tuple[int, ...]:
    """Validate a mode set: strictly increasing, nonempty subset of range(order)."""
    S = tuple(int(k) for k in modes)
    if len(S) == 0:
        raise ValueError("mode set must be nonempty")
    if any(k < 0 or k >= order for k in S):
        raise ValueError(f"mode set {S} out of range for order {order}")
    if any(a >= b for a, b in zip(S, S[1:])):
        raise ValueError(f"mode set {S} must be strictly increasing")
    return S


def complement_modes(modes: Sequence[int], order: int) -> tuple[int, ...]:
    S = set(modes)
    return tuple(k for k in range(order) if k not in S)


def matricize(X: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    """S-matricization: rows indexed by ``modes``, columns by the complement.

    Row and column composite indices are both linearized colexicographically
    (first listed mode fastest).  The result is a
    (prod of row extents) x (prod of column extents) matrix.
    """
    X = np.asarray(X)
    S = check_modes(modes, X.ndim)
    Sc = complement_modes(S, X.ndim)
    rows = math.prod(X.shape[k] for k in S)
    cols = math.prod(X.shape[k] for k in Sc)
    return np.transpose(X, S + Sc).reshape(rows, cols, order="F")


def tensorize(M: np.ndarray, modes: Sequence[int], shape: Sequence[int]) -> np.ndarray:
    """Exact inverse of :func:`matricize` for the same mode set and shape."""
    dims = check_shape(shape)
    M = np.asarray(M)
    S = check_modes(modes, len(dims))
    Sc = complement_modes(S, len(dims))
    rows = math.prod(dims[k] for k in S)
    cols = math.prod(dims[k] for k in Sc)
    if M.shape != (rows, cols):
        raise ValueError(
            f"matrix of shape {M.shape} inconsistent with modes {S} of shape {dims}"
        )
    perm = S + Sc
    permuted = M.reshape([dims[k] for k in perm], order="F")
    return np.transpose(permuted, np.argsort(perm))


def mode_product(X: np.ndarray, A: np.ndarray, k: int) -> np.ndarray:
    """k-mode product: contract mode ``k`` of ``X`` with the columns of ``A``.

    ``A`` must have shape (J, n_k); the result replaces extent n_k by J.
    No conjugation is applied (plain linear contraction).
    """
    X = np.asarray(X)
    A = np.asarray(A)
    if not 0 <= k < X.ndim:
        raise ValueError(f"mode {k} out of range for order {X.ndim}")
    if A.ndim != 2 or A.shape[1] != X.shape[k]:
        raise ValueError(
            f"matrix of shape {A.shape} cannot contract mode {k} of extent {X.shape[k]}"
        )
    Y = np.tensordot(X, A, axes=([k], [1]))
    return np.moveaxis(Y, -1, k)


def inner_product(X: np.ndarray, Y: np.ndarray):
    """Entrywise inner product; the first argument is conjugated in the complex case."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    field = common_field(X, Y)
    value = np.vdot(X, Y)
    return value.real if field == "real" else value


def frobenius_norm(X: np.ndarray) -> float:
    """sqrt of the sum of squared entry magnitudes."""
    return float(np.linalg.norm(np.asarray(X)))
