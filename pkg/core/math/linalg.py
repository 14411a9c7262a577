"""Dense linear algebra used by the conservation analysis and the LP.

All routines take array-likes, never mutate their inputs and return new
``numpy`` arrays. Rank decisions are relative to the largest absolute entry
of the matrix.
"""
import logging
from typing import List, Tuple

import numpy as np

from core.exceptions import SingularMatrixException

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


def as_matrix(A) -> np.ndarray:
    M = np.array(A, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1) if M.size else M.reshape(0, 0)
    if M.ndim != 2:
        raise ValueError(f"Expected a 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("Matrix has non-finite entries")
    return M


def rref(A, tol: float = DEFAULT_TOL) -> Tuple[np.ndarray, List[int]]:
    """
    Reduced row echelon form with partial pivoting.

    Returns (R, pivots) where len(pivots) is the numerical rank of A. An
    entry counts as zero when |a| <= tol * max|A|.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    R = as_matrix(A).copy()
    rows, cols = R.shape
    scale = np.max(np.abs(R)) if R.size else 0.0
    if scale == 0.0:
        return np.zeros_like(R), []
    threshold = tol * scale

    pivots: List[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        candidate = row + int(np.argmax(np.abs(R[row:, col])))
        if abs(R[candidate, col]) <= threshold:
            R[row:, col] = 0.0
            continue
        if candidate != row:
            R[[row, candidate]] = R[[candidate, row]]
        R[row] = R[row] / R[row, col]
        others = np.arange(rows) != row
        R[others] -= np.outer(R[others, col], R[row])
        R[others, col] = 0.0
        pivots.append(col)
        row += 1

    R[np.abs(R) <= threshold] = 0.0
    return R, pivots


def rank(A, tol: float = DEFAULT_TOL) -> int:
    return len(rref(A, tol)[1])


def nullspace(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Basis of Ker(A) as the columns of an (cols x k) matrix.

    Built from the reduced row echelon form: one basis vector per free
    column, with that free variable set to 1.
    """
    M = as_matrix(A)
    cols = M.shape[1]
    R, pivots = rref(M, tol)
    free = [j for j in range(cols) if j not in pivots]
    N = np.zeros((cols, len(free)))
    for k, f in enumerate(free):
        N[f, k] = 1.0
        for i, p in enumerate(pivots):
            N[p, k] = -R[i, f]
    return N


def left_nullspace(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Basis of Ker(A^T)"""
    return nullspace(as_matrix(A).T, tol)


def solve(A, b, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve the square system A x = b, rejecting numerically singular A."""
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"solve expects a square matrix, got {M.shape}")
    r = rank(M, tol)
    if r < M.shape[0]:
        raise SingularMatrixException(rank=r, size=M.shape[0])
    return np.linalg.solve(M, np.asarray(b, dtype=float))


def inverse(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    M = as_matrix(A)
    return solve(M, np.eye(M.shape[0]), tol)


def independent_rows(A, tol: float = DEFAULT_TOL) -> List[int]:
    """Indices of a maximal set of linearly independent rows (first occurrence wins)."""
    return rref(as_matrix(A).T, tol)[1]


def same_column_space(A, B, tol: float = DEFAULT_TOL) -> bool:
    """Mutual rank test: span(A) == span(B)"""
    A, B = as_matrix(A), as_matrix(B)
    ra, rb = rank(A, tol), rank(B, tol)
    return ra == rb == rank(np.hstack([A, B]), tol)
