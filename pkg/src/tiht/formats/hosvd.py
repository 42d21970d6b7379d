"""Higher-order SVD: full decomposition, rank-r truncation, reconstruction.

The decomposition of X is ``core x_1 U_1 ... x_d U_d`` with the U_k holding
left singular vectors of the mode-k unfoldings.  By construction the core is
all-orthogonal and its mode-k subtensor norms equal the unfolding's singular
values, hence are nonincreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._linalg import numerical_rank, signed_svd, top_left_vectors
from ..tensors import as_tensor, check_shape, matricize, mode_product

__all__ = ["HosvdDecomposition", "hosvd_decompose", "hosvd_truncate", "hosvd_rank"]


class DegenerateTensorError(ValueError):
    """Raised when an operation needs a nonzero tensor and got the zero tensor."""


@dataclass(frozen=True)
class HosvdDecomposition:
    """Core tensor of shape (r_1, ..., r_d) plus per-mode factors (n_k x r_k)."""

    core: np.ndarray
    factors: tuple[np.ndarray, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(U.shape[0] for U in self.factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.core.shape

    def reconstruct(self) -> np.ndarray:
        X = self.core
        for k, U in enumerate(self.factors):
            X = mode_product(X, U, k)
        return X


def _project_core(X: np.ndarray, factors) -> np.ndarray:
    core = X
    for k, U in enumerate(factors):
        core = mode_product(core, U.conj().T, k)
    return core


def hosvd_decompose(X) -> HosvdDecomposition:
    """Full HOSVD at the numerical ranks of all unfoldings.

    Raises :class:`DegenerateTensorError` for the zero tensor.  The
    reconstruction equals X up to roundoff.
    """
    X = as_tensor(X)
    if not np.any(X):
        raise DegenerateTensorError("HOSVD of the zero tensor is undefined")
    factors = []
    for k in range(X.ndim):
        M = matricize(X, (k,))
        U, s, _ = signed_svd(M)
        r = max(numerical_rank(s, M.shape), 1)
        factors.append(U[:, :r])
    core = _project_core(X, factors)
    return HosvdDecomposition(core=core, factors=tuple(factors))


def clamp_hosvd_ranks(ranks, shape) -> tuple[int, ...]:
    """Clamp requested ranks to each unfolding's row and column dimensions."""
    dims = check_shape(shape)
    r = tuple(int(v) for v in ranks)
    if len(r) != len(dims):
        raise ValueError(f"rank tuple {r} does not match order {len(dims)}")
    if any(v < 1 for v in r):
        raise ValueError(f"ranks must be >= 1, got {r}")
    N = math.prod(dims)
    return tuple(min(v, n, N // n) for v, n in zip(r, dims))


def hosvd_truncate(X, ranks) -> HosvdDecomposition:
    """The truncation operator H_r: keep the top r_k left singular vectors per mode.

    Quasi-optimal: the error is within sqrt(d) of the best rank-r
    approximation error.
    """
    X = as_tensor(X)
    r = clamp_hosvd_ranks(ranks, X.shape)
    factors = tuple(
        top_left_vectors(matricize(X, (k,)), r[k]) for k in range(X.ndim)
    )
    core = _project_core(X, factors)
    return HosvdDecomposition(core=core, factors=factors)


def hosvd_rank(X) -> tuple[int, ...]:
    """Numerical ranks of all mode-k unfoldings."""
    X = as_tensor(X)
    if not np.any(X):
        raise DegenerateTensorError("rank of the zero tensor is undefined")
    ranks = []
    for k in range(X.ndim):
        M = matricize(X, (k,))
        s = np.linalg.svd(M, compute_uv=False)
        ranks.append(max(numerical_rank(s, M.shape), 1))
    return tuple(ranks)
