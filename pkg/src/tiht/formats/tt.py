"""Tensor-train format: TT-SVD truncation and reconstruction.

Cores are G_1 (n_1 x r_1), G_k (r_{k-1} x n_k x r_k) for interior k, and
G_d (r_{d-1} x n_d); entries come from the chained matrix products
G_1(i_1) G_2(i_2) ... G_d(i_d).  After TT-SVD every core but the last is
left-orthogonal (its {1,2}-flattening has orthonormal columns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._linalg import numerical_rank, signed_svd
from ..tensors import as_tensor, check_shape, matricize

__all__ = ["TTDecomposition", "tt_truncate", "tt_rank", "clamp_tt_ranks"]


@dataclass(frozen=True)
class TTDecomposition:
    """Chain of TT cores; ``cores[0]`` is a matrix, interior cores are 3-way."""

    cores: tuple[np.ndarray, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        dims = [self.cores[0].shape[0]]
        dims += [G.shape[1] for G in self.cores[1:-1]]
        dims.append(self.cores[-1].shape[-1])
        return tuple(dims)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(G.shape[-1] for G in self.cores[:-1])

    def reconstruct(self) -> np.ndarray:
        X = self.cores[0]
        for G in self.cores[1:]:
            X = np.tensordot(X, G, axes=(X.ndim - 1, 0))
        return X


def clamp_tt_ranks(ranks, shape) -> tuple[int, ...]:
    """Clamp r_i to min(prod of the first i extents, prod of the rest)."""
    dims = check_shape(shape)
    d = len(dims)
    if d < 2:
        raise ValueError("TT format needs order >= 2")
    r = tuple(int(v) for v in ranks)
    if len(r) != d - 1:
        raise ValueError(f"TT rank tuple {r} must have length {d - 1}")
    if any(v < 1 for v in r):
        raise ValueError(f"ranks must be >= 1, got {r}")
    N = math.prod(dims)
    out = []
    left = 1
    for i in range(d - 1):
        left *= dims[i]
        out.append(min(r[i], left, N // left))
    return tuple(out)


def tt_truncate(X, ranks) -> TTDecomposition:
    """TT-SVD: successive truncated SVDs of the {1,2}-flattened remainders.

    The error is within sqrt(d-1) of the best TT rank-r approximation error.
    """
    X = as_tensor(X)
    dims = X.shape
    d = X.ndim
    r = clamp_tt_ranks(ranks, dims)

    cores = []
    M = matricize(X, (0,))  # n_1 x (n_2 ... n_d)
    prev = 1
    for k in range(d - 1):
        rows = prev * dims[k]
        A = M.reshape(rows, -1, order="F")
        U, s, Vt = signed_svd(A)
        rk = min(r[k], len(s))
        U = U[:, :rk]
        if k == 0:
            cores.append(U)
        else:
            cores.append(U.reshape(prev, dims[k], rk, order="F"))
        M = s[:rk, None] * Vt[:rk]
        prev = rk
    cores.append(M)
    return TTDecomposition(cores=tuple(cores))


def tt_rank(X) -> tuple[int, ...]:
    """Numerical ranks of the matricizations that split after mode i, i = 1..d-1."""
    X = as_tensor(X)
    if not np.any(X):
        from .hosvd import DegenerateTensorError

        raise DegenerateTensorError("rank of the zero tensor is undefined")
    d = X.ndim
    if d < 2:
        raise ValueError("TT format needs order >= 2")
    ranks = []
    for i in range(1, d):
        M = matricize(X, tuple(range(i)))
        s = np.linalg.svd(M, compute_uv=False)
        ranks.append(max(numerical_rank(s, M.shape), 1))
    return tuple(ranks)
