"""Dense real linear algebra used throughout the package.

Matrices are plain 2-D ``float64`` numpy arrays, indexed row-major.
:func:`as_matrix` is the single entry point that validates them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConvergenceFailure, RankDeficient, SizeMismatch, ZeroMatrix

# column orthonormality / idempotence checks
ORTHO_TOL = 1e-10
# pivot cutoff relative to the largest |R_kk|
RANK_TOL = 1e-10
ZERO_TOL = 1e-300


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a read-only 2-D float64 array, rejecting NaN/Inf."""
    M = np.array(A, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    M.setflags(write=False)
    return M


def frobenius_norm_sq(A) -> float:
    A = as_matrix(A)
    return float(np.sum(A * A))


def singular_values(A) -> np.ndarray:
    """Singular values in nonincreasing order (``min(rows, cols)`` of them)."""
    A = as_matrix(A)
    try:
        s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc
    return s


def require_nonzero(A: np.ndarray) -> None:
    if not np.any(np.abs(A) >= ZERO_TOL):
        raise ZeroMatrix("matrix is numerically zero")


def stable_rank(A) -> float:
    """``‖A‖_F² / ‖A‖_op²``, a soft rank in ``[1, rank(A)]``."""
    A = as_matrix(A)
    require_nonzero(A)
    s = singular_values(A)
    # rescale first so tiny/huge matrices do not under/overflow the squares
    s = s / s[0]
    return float(np.sum(s * s))


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector onto ``span(basis)``.

    ``basis`` has orthonormal columns; the projector acts as
    ``v -> basis @ (basis.T @ v)`` and is never formed densely unless
    :meth:`matrix` is called.
    """

    basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def apply(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=np.float64)
        return self.basis @ (self.basis.T @ V)

    def apply_complement(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=np.float64)
        return V - self.apply(V)

    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.T


def _full_rank_qr(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, p = X.shape
    if n < p:
        raise RankDeficient(f"X has more columns ({p}) than rows ({n})")
    Q, R = np.linalg.qr(X, mode="reduced")
    d = np.abs(np.diag(R))
    if d.max() == 0.0 or d.min() < RANK_TOL * d.max():
        raise RankDeficient("X does not have full column rank")
    return Q, R


def orth_projector(X) -> Projector:
    """Projector onto the column space of ``X`` via Householder QR.

    Raises :class:`RankDeficient` if a diagonal entry of ``R`` falls below
    ``1e-10`` times the largest one.
    """
    Q, _ = _full_rank_qr(as_matrix(X, "X"))
    Q.setflags(write=False)
    return Projector(Q)


def least_squares_solve(X, Y) -> np.ndarray:
    """Minimizer of ``‖Y - X B‖_F²`` for full-column-rank ``X``."""
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise SizeMismatch(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    Q, R = _full_rank_qr(X)
    return solve_triangular(R, Q.T @ Y, lower=False)
