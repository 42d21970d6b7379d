"""Low-rank tensor formats (HOSVD, TT, HT): truncation operators and ranks.

Each format exposes a ``*_truncate`` operator computing a quasi-best rank-r
approximation via successive SVDs, a rank probe, and a decomposition record
that reconstructs back to a dense tensor.
"""

from __future__ import annotations

from .hosvd import (
    DegenerateTensorError,
    HosvdDecomposition,
    clamp_hosvd_ranks,
    hosvd_decompose,
    hosvd_rank,
    hosvd_truncate,
)
from .ht import (
    DimensionTree,
    HTDecomposition,
    ht_rank,
    ht_right_orthogonalize,
    ht_truncate,
    normalize_ht_ranks,
)
from .tt import TTDecomposition, clamp_tt_ranks, tt_rank, tt_truncate

__all__ = [
    "DegenerateTensorError",
    "HosvdDecomposition",
    "TTDecomposition",
    "DimensionTree",
    "HTDecomposition",
    "hosvd_decompose",
    "hosvd_truncate",
    "hosvd_rank",
    "tt_truncate",
    "tt_rank",
    "ht_truncate",
    "ht_right_orthogonalize",
    "ht_rank",
    "normalize_ht_ranks",
    "clamp_hosvd_ranks",
    "clamp_tt_ranks",
    "reconstruct",
    "truncate",
    "rank_of",
]

FORMATS = ("hosvd", "tt", "ht")


def reconstruct(decomposition):
    """Dense tensor represented by any of the three decomposition records."""
    return decomposition.reconstruct()


def truncate(X, fmt: str, ranks, tree: DimensionTree | None = None):
    """Dispatch to the format's rank-r truncation operator H_r."""
    if fmt == "hosvd":
        return hosvd_truncate(X, ranks)
    if fmt == "tt":
        return tt_truncate(X, ranks)
    if fmt == "ht":
        import numpy as np

        if tree is None:
            tree = DimensionTree.balanced(np.ndim(X))
        return ht_truncate(X, tree, ranks)
    raise ValueError(f"unknown tensor format {fmt!r}")


def rank_of(X, fmt: str, tree: DimensionTree | None = None):
    """Format rank of a dense tensor: per-mode, per-split, or per-tree-node."""
    if fmt == "hosvd":
        return hosvd_rank(X)
    if fmt == "tt":
        return tt_rank(X)
    if fmt == "ht":
        import numpy as np

        if tree is None:
            tree = DimensionTree.balanced(np.ndim(X))
        return ht_rank(X, tree)
    raise ValueError(f"unknown tensor format {fmt!r}")
