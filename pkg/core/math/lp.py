"""Two-phase primal simplex for small dense linear programs.

    minimize    c @ y
    subject to  A_eq @ y = b_eq
                lower <= y <= upper

Bounds are folded into a standard form (shift by the lower bound, flip or
split variables without one, one slack row per finite upper bound). Pivoting
uses Dantzig's rule until too many degenerate pivots have been seen, then
switches to Bland's rule. Ties always go to the smallest index, so identical
input gives bit-identical output.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from core.exceptions import ConvergenceException, ValidationException

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-8


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def build(cls, c, A_eq=None, b_eq=None, lower=None, upper=None) -> "LinearProgram":
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        A = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
        b = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
        lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=float).ravel()
        hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float).ravel()
        lp = cls(c=c, A_eq=A, b_eq=b, lower=lo, upper=hi)
        lp.validate()
        return lp

    @property
    def n_vars(self) -> int:
        return self.c.size

    def validate(self) -> None:
        n = self.n_vars
        if self.A_eq.shape[1] != n or self.A_eq.shape[0] != self.b_eq.size:
            raise ValidationException(f"Inconsistent LP dimensions: A {self.A_eq.shape}, b {self.b_eq.shape}, c {n}")
        if self.lower.size != n or self.upper.size != n:
            raise ValidationException("Bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise ValidationException("Lower bound exceeds upper bound")
        for name, arr in (("c", self.c), ("A_eq", self.A_eq), ("b_eq", self.b_eq)):
            if not np.all(np.isfinite(arr)):
                raise ValidationException(f"LP data {name} has non-finite entries")


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    y: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LPStatus.OPTIMAL


@dataclass
class _StandardForm:
    """min c @ z, A @ z = b, z >= 0, plus the recipe to map z back to y"""
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    offset: np.ndarray
    columns: List[List[Tuple[int, float]]] = field(default_factory=list)

    def recover(self, z: np.ndarray) -> np.ndarray:
        y = self.offset.copy()
        for i, parts in enumerate(self.columns):
            for column, sign in parts:
                y[i] += sign * z[column]
        return y


def _standard_form(lp: LinearProgram) -> _StandardForm:
    n = lp.n_vars
    offset = np.zeros(n)
    columns: List[List[Tuple[int, float]]] = []
    c_std: List[float] = []
    a_cols: List[np.ndarray] = []
    upper_rows: List[Tuple[int, float]] = []

    for i in range(n):
        lo, hi = lp.lower[i], lp.upper[i]
        a = lp.A_eq[:, i]
        if np.isfinite(lo):
            offset[i] = lo
            columns.append([(len(c_std), 1.0)])
            if np.isfinite(hi):
                upper_rows.append((len(c_std), hi - lo))
            c_std.append(lp.c[i])
            a_cols.append(a)
        elif np.isfinite(hi):
            offset[i] = hi
            columns.append([(len(c_std), -1.0)])
            c_std.append(-lp.c[i])
            a_cols.append(-a)
        else:
            columns.append([(len(c_std), 1.0), (len(c_std) + 1, -1.0)])
            c_std.extend([lp.c[i], -lp.c[i]])
            a_cols.extend([a, -a])

    m = lp.A_eq.shape[0]
    n_std = len(c_std) + len(upper_rows)
    A = np.zeros((m + len(upper_rows), n_std))
    if a_cols:
        A[:m, :len(c_std)] = np.column_stack(a_cols)
    b = np.concatenate([lp.b_eq - lp.A_eq @ offset, np.zeros(len(upper_rows))])
    for k, (column, width) in enumerate(upper_rows):
        A[m + k, column] = 1.0
        A[m + k, len(c_std) + k] = 1.0
        b[m + k] = width
    c = np.concatenate([np.asarray(c_std, dtype=float), np.zeros(len(upper_rows))])
    return _StandardForm(c=c, A=A, b=b, offset=offset, columns=columns)


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, basis: List[int], pivot_tol: float):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.pivot_tol = pivot_tol
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    @property
    def n(self) -> int:
        return self.T.shape[1] - 1

    def set_objective(self, c: np.ndarray) -> None:
        self.T[-1, :] = 0.0
        self.T[-1, :self.n] = c
        for row, var in enumerate(self.basis):
            if self.T[-1, var] != 0.0:
                self.T[-1] -= self.T[-1, var] * self.T[row]

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        others = np.arange(T.shape[0]) != row
        T[others] -= np.outer(T[others, col], T[row])
        T[others, col] = 0.0
        self.basis[row] = col
        self.iterations += 1

    def values(self) -> np.ndarray:
        z = np.zeros(self.n)
        for row, var in enumerate(self.basis):
            z[var] = self.T[row, -1]
        return z

    def delete_row(self, row: int) -> None:
        self.T = np.delete(self.T, row, axis=0)
        del self.basis[row]

    def run(self, allowed: int, max_iterations: int) -> LPStatus:
        """Primal simplex on the first ``allowed`` columns from a feasible basis."""
        degenerate = 0
        bland_after = 2 * (self.n + self.m)
        while True:
            if self.iterations > max_iterations:
                raise ConvergenceException(
                    f"Simplex exceeded {max_iterations} pivots", stage="lp"
                )
            reduced = self.T[-1, :allowed]
            negative = np.flatnonzero(reduced < -self.pivot_tol)
            if negative.size == 0:
                return LPStatus.OPTIMAL
            if degenerate > bland_after:
                col = int(negative[0])
            else:
                col = int(negative[np.argmin(reduced[negative])])

            column = self.T[:-1, col]
            rows = np.flatnonzero(column > self.pivot_tol)
            if rows.size == 0:
                return LPStatus.UNBOUNDED
            ratios = self.T[rows, -1] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + self.pivot_tol * max(1.0, abs(best))]
            row = int(min(tied, key=lambda r: self.basis[r]))
            if self.T[row, -1] <= self.pivot_tol:
                degenerate += 1
            self.pivot(row, col)


def solve_lp(
    lp: LinearProgram,
    pivot_tol: float = PIVOT_TOL,
    feasibility_tol: float = FEASIBILITY_TOL,
    max_iterations: Optional[int] = None,
) -> LPSolution:
    """Solve ``lp``; infeasible and unbounded problems are reported as statuses."""
    lp.validate()
    std = _standard_form(lp)
    A, b = std.A.copy(), std.b.copy()
    negative = b < 0
    A[negative] *= -1.0
    b[negative] *= -1.0
    m, n = A.shape
    max_iterations = max_iterations or 50 * (m + n + 10)

    # Phase 1: one artificial per row
    tableau = _Tableau(np.hstack([A, np.eye(m)]), b, basis=list(range(n, n + m)), pivot_tol=pivot_tol)
    tableau.set_objective(np.concatenate([np.zeros(n), np.ones(m)]))
    tableau.run(allowed=n + m, max_iterations=max_iterations)
    infeasibility = -tableau.T[-1, -1]
    if infeasibility > feasibility_tol * (1.0 + (np.max(np.abs(b)) if b.size else 0.0)):
        logger.debug(f"LP infeasible: phase 1 optimum {infeasibility:.3e}")
        return LPSolution(status=LPStatus.INFEASIBLE, iterations=tableau.iterations)

    # Drive artificials out of the basis; rows where that is impossible are redundant
    row = 0
    while row < tableau.m:
        if tableau.basis[row] >= n:
            candidates = np.flatnonzero(np.abs(tableau.T[row, :n]) > pivot_tol)
            if candidates.size:
                tableau.pivot(row, int(candidates[0]))
            else:
                tableau.delete_row(row)
                continue
        row += 1
    tableau.T = np.delete(tableau.T, np.s_[n:n + m], axis=1)

    # Phase 2
    tableau.set_objective(std.c)
    status = tableau.run(allowed=n, max_iterations=max_iterations)
    if status == LPStatus.UNBOUNDED:
        return LPSolution(status=status, iterations=tableau.iterations)

    z = np.maximum(tableau.values(), 0.0)
    y = np.clip(std.recover(z), lp.lower, lp.upper)
    objective = float(lp.c @ y)
    logger.debug(f"LP optimal after {tableau.iterations} pivots, objective {objective:.6g}")
    return LPSolution(status=LPStatus.OPTIMAL, y=y, objective=objective, iterations=tableau.iterations)
