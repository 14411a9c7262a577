"""Positive conservation laws, the free/non-free split and the reconstructing matrix.

Species are split into ``free`` ones (kept, in declaration order) and
``nonfree`` ones (eliminated through the conservation laws). Everything
that depends on the split is expressed in the permuted order
``free + nonfree``; the permutation is always returned alongside.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import PreconditionException, SingularMatrixException, ValidationException
from core.math import linalg
from core.math.lp import LinearProgram, solve_lp
from core.math.poly import AffineMap
from models import Network

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_PARTITIONS = 5000
INVERSE_TOL = 1e-10
TIE_TOL = 1e-9


@dataclass(frozen=True)
class ConservedStructure:
    C: np.ndarray
    free: Tuple[int, ...]
    nonfree: Tuple[int, ...]
    C_l: np.ndarray
    C_r: np.ndarray

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def q(self) -> int:
        return self.C.shape[1]

    @property
    def permutation(self) -> Tuple[int, ...]:
        return self.free + self.nonfree

    def totals(self, x) -> np.ndarray:
        """C^T x, the conserved quantities of state x"""
        return self.C.T @ np.asarray(x, dtype=float)

    def elimination_matrix(self) -> np.ndarray:
        """M = C_r^{-T} C_l^T, so that x_nonfree = M (x*_free - x_free) + x*_nonfree"""
        if self.q == 0:
            return np.zeros((0, self.n))
        M = linalg.solve(self.C_r.T, self.C_l.T)
        M[np.abs(M) < 1e-14] = 0.0
        return M

    def bound(self) -> Tuple[float, float]:
        """(||M||_2, sqrt(1 + ||M||_2^2)); the second converts a free-species radius into a full one"""
        if self.q == 0:
            return 0.0, 1.0
        norm = float(np.linalg.norm(self.elimination_matrix(), 2))
        return norm, float(np.sqrt(1.0 + norm ** 2))


@dataclass(frozen=True)
class ReconstructingMatrix:
    """
    D over the permuted coordinates (free species first):

        D    = [[D1, 0], [C_l^T, C_r^T]]
        Dinv = [[D1^-1, 0], [-C_r^-T C_l^T D1^-1, C_r^-T]]
    """
    structure: ConservedStructure
    d: np.ndarray
    D: np.ndarray
    Dinv: np.ndarray
    inverse_residual: float = field(default=0.0)

    @property
    def D1(self) -> np.ndarray:
        return np.diag(self.d)

    def in_species_order(self) -> np.ndarray:
        """D with its columns put back in the declared species order"""
        out = np.zeros_like(self.D)
        out[:, list(self.structure.permutation)] = self.D
        return out


def positive_conservation_residual(net: Network, vectors) -> float:
    """max |S^T rho| over the given columns"""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V.reshape(-1, 1)
    if V.size == 0:
        return 0.0
    return float(np.max(np.abs(net.S.T @ V)))


def _positive_kernel_vector(N: np.ndarray) -> Optional[np.ndarray]:
    """min sum(xi) s.t. xi = N w, xi >= 1, as an LP over (w, xi)"""
    n, m = N.shape
    c = np.concatenate([np.zeros(m), np.ones(n)])
    A = np.hstack([N, -np.eye(n)])
    lower = np.concatenate([np.full(m, -np.inf), np.ones(n)])
    solution = solve_lp(LinearProgram.build(c, A, np.zeros(n), lower=lower))
    if not solution.is_optimal:
        logger.info(f"No strictly positive conservation law ({solution.status.value})")
        return None
    return solution.y[m:]


def _normalize(column: np.ndarray) -> np.ndarray:
    column = column / column.min()
    rounded = np.round(column)
    close = np.abs(column - rounded) < 1e-9 * np.maximum(1.0, np.abs(rounded))
    column[close] = rounded[close]
    return column


def find_conserved_matrix(
    net: Network,
    q_target: Optional[int] = None,
    nonfree: Optional[Sequence[int]] = None,
    tol: float = linalg.DEFAULT_TOL,
) -> ConservedStructure:
    """
    Strictly positive conservation laws of ``net``, split into free and
    non-free species. ``q = 0`` is a valid outcome.
    """
    N = linalg.left_nullspace(net.S, tol)
    m = N.shape[1]
    if q_target is not None and not 0 <= q_target <= m:
        raise PreconditionException(
            f"Requested q={q_target} conservation laws but Ker(S^T) has dimension {m}",
            stage="conservation",
        )

    columns: List[np.ndarray] = []
    rho = _positive_kernel_vector(N) if m > 0 and q_target != 0 else None
    if rho is not None:
        columns.append(rho)
        wanted = m if q_target is None else q_target
        for k in range(m):
            if len(columns) >= wanted:
                break
            delta = 0.5 * np.min(rho / np.maximum(1.0, np.abs(N[:, k])))
            candidate = rho + delta * N[:, k]
            if linalg.rank(np.column_stack(columns + [candidate]), tol) > len(columns):
                columns.append(candidate)
        if q_target is not None and len(columns) < q_target:
            raise PreconditionException(
                f"Only {len(columns)} independent positive conservation laws found, {q_target} requested",
                stage="conservation",
            )

    C = np.column_stack([_normalize(col) for col in columns]) if columns else np.zeros((net.n, 0))
    structure = choose_partition(C, nonfree=nonfree, tol=tol)
    logger.info(
        f"Conservation: dim Ker(S^T)={m}, q={structure.q}, nonfree={list(structure.nonfree)}"
    )
    return structure


def _split(C: np.ndarray, nonfree: Sequence[int]) -> ConservedStructure:
    n = C.shape[0]
    nonfree = tuple(sorted(int(i) for i in nonfree))
    free = tuple(i for i in range(n) if i not in nonfree)
    return ConservedStructure(
        C=C,
        free=free,
        nonfree=nonfree,
        C_l=C[list(free), :],
        C_r=C[list(nonfree), :],
    )


def _greedy_rows(C: np.ndarray) -> Tuple[int, ...]:
    """Gaussian elimination on C^T with column pivoting; ties go to the larger species index"""
    W = C.T.copy()
    q, n = W.shape
    chosen: List[int] = []
    for row in range(q):
        magnitudes = np.abs(W[row])
        magnitudes[chosen] = -1.0
        best = magnitudes.max()
        col = int(max(np.flatnonzero(magnitudes >= best * (1 - TIE_TOL))))
        chosen.append(col)
        W[row] /= W[row, col]
        below = np.arange(q) > row
        W[below] -= np.outer(W[below, col], W[row])
    return tuple(sorted(chosen))


def choose_partition(
    C,
    nonfree: Optional[Sequence[int]] = None,
    tol: float = linalg.DEFAULT_TOL,
) -> ConservedStructure:
    """
    Pick the q non-free species as the rows of C with the largest |det C_r|.

    The ratio between minors does not depend on which basis of the column
    space C is given in, so neither does the choice. Ties go to the subset
    with the largest indices, which keeps low-indexed species free.

    This replaces Gaussian elimination with column pivoting as the default
    rule: elimination picks pivots from the order of the columns of C, so
    two bases of the same kernel can give different splits. Above
    MAX_EXHAUSTIVE_PARTITIONS subsets the search falls back to pivoted
    elimination (``_greedy_rows``) and the split may then depend on the basis.
    """
    C = linalg.as_matrix(C) if np.size(C) else np.zeros((np.shape(C)[0], 0))
    n, q = C.shape
    if nonfree is not None:
        if len(nonfree) != q or len(set(nonfree)) != q or any(not 0 <= i < n for i in nonfree):
            raise ValidationException(f"Expected {q} distinct non-free species indices, got {list(nonfree)}")
        structure = _split(C, nonfree)
        if q and linalg.rank(structure.C_r, tol) < q:
            raise SingularMatrixException(
                rank=linalg.rank(structure.C_r, tol), size=q,
                detail=f"C_r for non-free species {list(nonfree)} is singular",
                stage="conservation",
            )
        return structure
    if q == 0:
        return _split(C, ())
    if linalg.rank(C, tol) < q:
        raise SingularMatrixException(rank=linalg.rank(C, tol), size=q, stage="conservation")

    if comb(n, q) > MAX_EXHAUSTIVE_PARTITIONS:
        return _split(C, _greedy_rows(C))

    best_rows, best_det = None, -1.0
    for rows in combinations(range(n), q):
        det = abs(float(np.linalg.det(C[list(rows), :])))
        if det > best_det * (1 + TIE_TOL):
            best_rows, best_det = rows, det
        elif det >= best_det * (1 - TIE_TOL):
            # combinations() is lexicographic, so a later tie has larger indices
            best_rows = rows
    return _split(C, best_rows)


def assemble_D(structure: ConservedStructure, d) -> ReconstructingMatrix:
    d = np.asarray(d, dtype=float).ravel()
    n, q = structure.n, structure.q
    if d.size != n - q:
        raise ValidationException(f"D1 needs {n - q} diagonal entries, got {d.size}")
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise ValidationException(f"D1 entries must be positive, got {d.tolist()}")

    p = n - q
    D = np.zeros((n, n))
    D[:p, :p] = np.diag(d)
    D[p:, :p] = structure.C_l.T
    D[p:, p:] = structure.C_r.T

    Dinv = np.zeros((n, n))
    Dinv[:p, :p] = np.diag(1.0 / d)
    if q:
        Cr_inv_T = linalg.inverse(structure.C_r.T)
        Dinv[p:, :p] = -Cr_inv_T @ structure.C_l.T @ np.diag(1.0 / d)
        Dinv[p:, p:] = Cr_inv_T

    residual = float(np.max(np.abs(D @ Dinv - np.eye(n)))) if n else 0.0
    if residual > INVERSE_TOL:
        logger.warning(f"D * Dinv deviates from identity by {residual:.3e}")
    return ReconstructingMatrix(structure=structure, d=d, D=D, Dinv=Dinv, inverse_residual=residual)


def substitution_map(structure: ConservedStructure, x_star) -> AffineMap:
    """
    x_nonfree = M (x*_free - x_free) + x*_nonfree as an affine map of the
    free species, ready for ``Polynomial.substitute_affine``.
    """
    x_star = np.asarray(x_star, dtype=float)
    if x_star.shape != (structure.n,):
        raise ValidationException(f"Equilibrium must have {structure.n} entries")
    if np.any(x_star <= 0):
        raise PreconditionException("The equilibrium must be strictly positive", stage="conservation")
    if structure.q == 0:
        return AffineMap.identity(structure.n)
    M = structure.elimination_matrix()
    free, nonfree = list(structure.free), list(structure.nonfree)
    return AffineMap(constant=x_star[nonfree] + M @ x_star[free], linear=-M)
