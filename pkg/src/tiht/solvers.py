"""CTIHT and NTIHT iterations over any format/ensemble pair.

The iteration alternates a gradient step ``Y = X + mu * A*(y - A(X))`` with a
format truncation ``X <- H_r(Y)``.  CTIHT uses mu = 1.  NTIHT starts from the
normalized ratio ||M(A*(r))||_F^2 / ||A(M(A*(r)))||_2^2 built on the rank
projector of the current iterate and, in the spirit of the normalized IHT
line of algorithms, stabilizes it: a step is kept when it does not increase
the residual, otherwise it is backed off geometrically until it does, never
below the stability bound mu <= ||dX||_F^2 / ||A(dX)||_2^2 of the
changed-subspace test.  Stopping follows the experimental protocol: a
Frobenius step below ``conv_tol`` (converged) or ``max_iters`` iterations;
iterates leaving the representable range end the run as diverged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .formats import (
    DimensionTree,
    clamp_hosvd_ranks,
    clamp_tt_ranks,
    normalize_ht_ranks,
    truncate,
)
from .measurements import MeasurementEnsemble
from ._linalg import top_left_vectors
from .tensors import frobenius_norm, matricize, tensorize, vec

__all__ = [
    "SolverConfig",
    "IterateState",
    "RecoveryResult",
    "RankProjector",
    "build_Mj",
    "ctiht_step_size",
    "ntiht_step_size",
    "tiht_run",
    "monitor_eps_condition",
    "export_trace_csv",
]


@dataclass
class SolverConfig:
    """Variant, format, target rank and stopping parameters for one run."""

    rank: object
    variant: str = "ntiht"
    format: str = "hosvd"
    tree: DimensionTree | None = None
    max_iters: int = 5000
    conv_tol: float = 1e-4
    initial: np.ndarray | None = None
    keep_iterates: bool = False
    safeguard: bool = True  # NTIHT step-size stabilizer; CTIHT ignores it

    def __post_init__(self):
        if self.variant not in ("ctiht", "ntiht"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.format not in ("hosvd", "tt", "ht"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")


@dataclass
class IterateState:
    """Per-iteration trace row."""

    iteration: int
    mu: float
    residual: float
    step_norm: float
    eps_ratio: float | None = None
    mu_fallback: bool = False
    X: np.ndarray | None = None


@dataclass
class RecoveryResult:
    """Final iterate plus the per-iteration trace and success bookkeeping."""

    tensor: np.ndarray
    iterations: int
    converged: bool
    trace: list[IterateState] = field(default_factory=list)
    final_error: float | None = None
    success: bool | None = None
    diverged: bool = False  # iterates left the representable range

    @property
    def residuals(self) -> np.ndarray:
        return np.array([s.residual for s in self.trace])

    @property
    def step_norms(self) -> np.ndarray:
        return np.array([s.step_norm for s in self.trace])

    @property
    def mus(self) -> np.ndarray:
        return np.array([s.mu for s in self.trace])

    @property
    def eps_ratios(self) -> np.ndarray:
        return np.array(
            [np.nan if s.eps_ratio is None else s.eps_ratio for s in self.trace]
        )


class RankProjector:
    """Composition of row-space projections onto fixed matricization subspaces.

    Applied to tensors of the stored shape; idempotent, and the image consists
    of tensors whose format rank is at most the building rank when the bases
    come from a tensor of that exact rank.
    """

    def __init__(self, shape: tuple[int, ...], blocks):
        self.shape = tuple(shape)
        self.blocks = list(blocks)  # (modes, orthonormal basis) pairs, in order

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z)
        if Z.shape != self.shape:
            raise ValueError(f"tensor of shape {Z.shape} does not match projector shape {self.shape}")
        for modes, U in self.blocks:
            M = matricize(Z, modes)
            Z = tensorize(U @ (U.conj().T @ M), modes, self.shape)
        return Z


def build_Mj(fmt: str, X_j: np.ndarray, rank, tree: DimensionTree | None = None) -> RankProjector:
    """Projector M^j onto the rank-r format subspaces of the current iterate.

    Bases are the top left singular vectors of the iterate's defining
    matricizations (per mode for HOSVD, leading splits for TT, tree nodes for
    HT).  When an unfolding has fewer nonzero singular values than requested
    the basis is padded with the orthonormal complement the SVD returns.
    """
    X_j = np.asarray(X_j)
    d = X_j.ndim
    shape = X_j.shape
    blocks = []
    if fmt == "hosvd":
        r = clamp_hosvd_ranks(rank, shape)
        for k in range(d):
            blocks.append(((k,), top_left_vectors(matricize(X_j, (k,)), r[k])))
    elif fmt == "tt":
        r = clamp_tt_ranks(rank, shape)
        for i in range(1, d):
            modes = tuple(range(i))
            blocks.append((modes, top_left_vectors(matricize(X_j, modes), r[i - 1])))
    elif fmt == "ht":
        if tree is None:
            tree = DimensionTree.balanced(d)
        r = normalize_ht_ranks(tree, rank, shape)
        nodes = [n for n in tree.nodes() if n != tree.root]
        nodes.sort(key=lambda n: (-tree.level(n), n))  # sons before fathers
        for node in nodes:
            modes = tree.modes(node)
            blocks.append((modes, top_left_vectors(matricize(X_j, modes), r[node])))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return RankProjector(shape, blocks)


def ctiht_step_size() -> float:
    """Classical variant: the step size is always 1."""
    return 1.0


def _mu_from_direction(A: MeasurementEnsemble, t: np.ndarray) -> tuple[float, bool]:
    tv = vec(t)
    num = float(np.vdot(tv, tv).real)
    At = A.apply(t)
    den = float(np.vdot(At, At).real)
    if den == 0.0:
        return 1.0, True
    return num / den, False


def ntiht_step_size(
    A: MeasurementEnsemble, X_j: np.ndarray, y: np.ndarray, projector: RankProjector
) -> tuple[float, bool]:
    """Normalized step ||M(A*(r))||_F^2 / ||A(M(A*(r)))||_2^2 for r = y - A(X_j).

    Returns (mu, fallback) where fallback marks a zero denominator, in which
    case mu = 1 (the residual direction is in the kernel only at convergence).
    """
    g = A.adjoint(y - A.apply(X_j))
    return _mu_from_direction(A, projector(g))


def tiht_run(
    A: MeasurementEnsemble,
    y: np.ndarray,
    config: SolverConfig,
    X_ref: np.ndarray | None = None,
    success_threshold: float | None = None,
) -> RecoveryResult:
    """Run CTIHT/NTIHT until the step norm drops below conv_tol or max_iters.

    When ``X_ref`` is given, the per-iteration ratio
    ||Y^j - X^{j+1}||_F / ||Y^j - X_ref||_F is recorded (diagnostic only) and
    the final error/success flag are filled in.
    """
    y = np.asarray(y)
    if y.shape != (A.m,):
        raise ValueError(f"measurement vector of shape {y.shape}, expected ({A.m},)")
    dtype = np.complex128 if A.field == "complex" else np.float64
    if config.initial is not None:
        X = np.asarray(config.initial, dtype=dtype)
        if X.shape != A.shape:
            raise ValueError(f"initial tensor shape {X.shape} does not match {A.shape}")
    else:
        X = np.zeros(A.shape, dtype=dtype)

    tree = config.tree
    if config.format == "ht" and tree is None:
        tree = DimensionTree.balanced(len(A.shape))

    trace: list[IterateState] = []
    converged = False
    diverged = False
    # overflow along a diverging trajectory is detected and recorded below, so
    # the intermediate inf/nan arithmetic is expected and not worth warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(config.max_iters):
            resid = y - A.apply(X)
            resid_norm = float(np.linalg.norm(resid))
            if not np.isfinite(resid_norm):
                diverged = True  # recorded outcome, not an error
                break
            g = A.adjoint(resid)
            fallback = False
            if config.variant == "ntiht":
                projector = build_Mj(config.format, X, config.rank, tree)
                mu, fallback = _mu_from_direction(A, projector(g))
            else:
                mu = ctiht_step_size()
            Y = X + mu * g
            if not np.all(np.isfinite(Y)):
                diverged = True
                break
            X_next = truncate(Y, config.format, config.rank, tree).reconstruct()
            if config.variant == "ntiht" and config.safeguard:
                # keep the normalized step when it does not increase the
                # residual; otherwise back the step off geometrically until it
                # does, with the stability bound mu <= ||dX||^2 / ||A(dX)||^2
                # of the changed-subspace test as the floor
                cand_resid = float(np.linalg.norm(y - A.apply(X_next)))
                if not cand_resid <= resid_norm:
                    for _ in range(60):
                        dv = vec(X_next - X)
                        step_sq = float(np.vdot(dv, dv).real)
                        if step_sq == 0.0:
                            break
                        Ad = A.apply(X_next - X)
                        omega = step_sq / float(np.vdot(Ad, Ad).real)
                        if not np.isfinite(omega) or mu <= omega:
                            break
                        mu = mu / 1.3
                        if mu <= omega:
                            mu = 0.99 * omega
                        Y = X + mu * g
                        X_next = truncate(Y, config.format, config.rank, tree).reconstruct()
                        cand_resid = float(np.linalg.norm(y - A.apply(X_next)))
                        if cand_resid <= resid_norm:
                            break
            step_norm = frobenius_norm(X_next - X)
            eps_ratio = None
            if X_ref is not None:
                den = frobenius_norm(Y - X_ref)
                num = frobenius_norm(Y - X_next)
                if den > 0:
                    eps_ratio = num / den
                else:
                    # gradient step landed exactly on the reference; the ratio
                    # is 0 when the truncation kept it, else unbounded
                    eps_ratio = (
                        0.0
                        if num <= 1e-10 * max(frobenius_norm(Y), 1.0)
                        else float("inf")
                    )
            trace.append(
                IterateState(
                    iteration=j,
                    mu=mu,
                    residual=resid_norm,
                    step_norm=step_norm,
                    eps_ratio=eps_ratio,
                    mu_fallback=fallback,
                    X=X.copy() if config.keep_iterates else None,
                )
            )
            X = X_next
            if step_norm < config.conv_tol:
                converged = True
                break

    final_error = None
    success = None
    if X_ref is not None:
        diff_norm = frobenius_norm(X - X_ref)
        final_error = diff_norm if np.isfinite(diff_norm) else float("inf")
        if success_threshold is not None:
            success = bool(final_error < success_threshold)
    return RecoveryResult(
        tensor=X,
        iterations=len(trace),
        converged=converged,
        trace=trace,
        final_error=final_error,
        success=success,
        diverged=diverged,
    )


def monitor_eps_condition(result: RecoveryResult) -> np.ndarray:
    """Per-iteration values of ||Y - X^{j+1}|| / ||Y - X_ref|| - 1.

    Diagnostic only: negative or small values indicate the truncation was
    nearly as good an approximation of Y as the reference tensor.
    """
    if not result.trace or result.trace[0].eps_ratio is None:
        raise ValueError("run was traced without a reference tensor")
    return result.eps_ratios - 1.0


def export_trace_csv(result: RecoveryResult, path) -> None:
    """Write the trace as CSV: iteration, residual, step_norm, mu, eps_ratio."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "residual", "step_norm", "mu", "eps_ratio"])
        for s in result.trace:
            writer.writerow(
                [
                    s.iteration,
                    repr(s.residual),
                    repr(s.step_norm),
                    repr(s.mu),
                    "" if s.eps_ratio is None else repr(s.eps_ratio),
                ]
            )
