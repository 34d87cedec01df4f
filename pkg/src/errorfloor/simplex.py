"""Revised primal simplex for equality-form linear programs.

Solves  min c.x  s.t.  A x = b, x >= 0  with an explicit dense basis
inverse (product-form updates, periodic refactorization) and Bland's
smallest-index rule for both entering and leaving variables.

Columns flagged as artificial never enter the basis. An artificial that is
basic is held at zero: any pivot that would move it makes it leave.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
import scipy.sparse as sp

from errorfloor.constants import (SIMPLEX_MAX_PIVOTS, SIMPLEX_PIVOT_TOL,
                                  SIMPLEX_REFACTOR_EVERY, TAU_FEAS)
from errorfloor.errors import SolverError
from errorfloor.logging_config import get_logger

logger = get_logger(__name__)

Matrix = Union[np.ndarray, sp.spmatrix]


@dataclass
class SimplexResult:
    """Optimal basic solution and pivot statistics."""

    x: np.ndarray
    objective: float
    basis: np.ndarray
    pivots: int
    phase_one_pivots: int = 0
    status: str = "optimal"
    stats: Dict[str, Any] = field(default_factory=dict)


class _Tableau:
    """Basis bookkeeping for one solve."""

    def __init__(
        self,
        a: sp.csc_matrix,
        b: np.ndarray,
        basis: np.ndarray,
        artificial: np.ndarray,
    ):
        self.a = a
        self.at = a.T.tocsr()
        self.b = b
        self.basis = basis.copy()
        self.artificial = artificial
        self.since_refactor = 0
        self.refactor()

    def refactor(self) -> None:
        dense = self.a[:, self.basis].toarray()
        try:
            self.binv = np.linalg.inv(dense)
        except np.linalg.LinAlgError:
            raise SolverError("singular basis matrix")
        self.xb = self.binv @ self.b
        self.xb[np.abs(self.xb) < TAU_FEAS] = 0.0
        self.since_refactor = 0

    def column(self, j: int) -> np.ndarray:
        start, end = self.a.indptr[j], self.a.indptr[j + 1]
        rows = self.a.indices[start:end]
        return self.binv[:, rows] @ self.a.data[start:end]

    def pivot(self, row: int, entering: int, direction: np.ndarray) -> None:
        step = self.xb[row] / direction[row]
        self.xb -= step * direction
        self.xb[row] = step
        self.xb[np.abs(self.xb) < TAU_FEAS] = 0.0
        pivot_row = self.binv[row] / direction[row]
        self.binv -= np.outer(direction, pivot_row)
        self.binv[row] = pivot_row
        self.basis[row] = entering
        self.since_refactor += 1
        if self.since_refactor >= SIMPLEX_REFACTOR_EVERY:
            self.refactor()


def _iterate(
    tab: _Tableau,
    c: np.ndarray,
    max_pivots: int,
    tol: float,
    hold_artificials: bool = True,
) -> int:
    """Run simplex pivots to optimality; returns the pivot count."""
    cost_scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
    rc_tol = tol * cost_scale
    eligible = ~tab.artificial
    pivots = 0
    while True:
        y = c[tab.basis] @ tab.binv
        reduced = c - tab.at @ y
        reduced[tab.basis] = 0.0
        candidates = np.flatnonzero((reduced < -rc_tol) & eligible)
        if candidates.size == 0:
            return pivots
        entering = int(candidates[0])
        direction = tab.column(entering)

        art_rows = tab.artificial[tab.basis] & (np.abs(direction) > tol)
        if hold_artificials and art_rows.any():
            rows = np.flatnonzero(art_rows)
        else:
            positive = direction > tol
            if not positive.any():
                raise SolverError(
                    "objective unbounded below", {"pivots": pivots}
                )
            ratios = np.full(direction.shape, np.inf)
            ratios[positive] = tab.xb[positive] / direction[positive]
            best = ratios.min()
            rows = np.flatnonzero(ratios <= best + tol)
        row = int(rows[np.argmin(tab.basis[rows])])
        tab.pivot(row, entering, direction)
        pivots += 1
        if pivots >= max_pivots:
            raise SolverError(
                f"pivot cap {max_pivots} exceeded",
                {"pivots": pivots, "status": "pivot_cap"},
            )


def solve_standard_form(
    c: np.ndarray,
    a: Matrix,
    b: np.ndarray,
    basis: Optional[np.ndarray] = None,
    artificial: Optional[np.ndarray] = None,
    max_pivots: int = SIMPLEX_MAX_PIVOTS,
    tol: float = SIMPLEX_PIVOT_TOL,
) -> SimplexResult:
    """
    Minimize c.x subject to A x = b, x >= 0.

    Args:
        c: Cost vector
        a: Constraint matrix, dense or sparse
        b: Right-hand side
        basis: Optional feasible starting basis (one column per row).
               Without it a phase-one problem over added artificials
               finds one.
        artificial: Optional mask of columns that may never enter
        max_pivots: Pivot cap; exceeding it raises SolverError
        tol: Pivot and reduced-cost tolerance (reduced costs are compared
             relative to the largest cost magnitude)

    Returns:
        SimplexResult with the optimal vertex

    Raises:
        SolverError: infeasible, unbounded, singular or pivot cap
    """
    c = np.asarray(c, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a = sp.csc_matrix(a, dtype=np.float64)
    rows, cols = a.shape
    if artificial is None:
        artificial = np.zeros(cols, dtype=bool)

    phase_one_pivots = 0
    if basis is None:
        signs = np.where(b < 0.0, -1.0, 1.0)
        a = sp.csc_matrix(sp.diags(signs) @ a)
        b = b * signs
        a = sp.hstack([a, sp.identity(rows, format="csc")], format="csc")
        artificial = np.concatenate([artificial, np.ones(rows, dtype=bool)])
        basis = np.arange(cols, cols + rows)
        tab = _Tableau(a, b, basis, artificial)
        phase_one = np.concatenate([np.zeros(cols), np.ones(rows)])
        # artificials leave by the ordinary ratio test and never re-enter
        phase_one_pivots = _iterate(
            tab, phase_one, max_pivots, tol, hold_artificials=False
        )
        infeasibility = float(phase_one[tab.basis] @ tab.xb)
        if infeasibility > TAU_FEAS * max(1.0, float(np.abs(b).max())):
            raise SolverError(
                "problem infeasible",
                {"pivots": phase_one_pivots, "status": "infeasible"},
            )
        c = np.concatenate([c, np.zeros(rows)])
    else:
        tab = _Tableau(a, b, np.asarray(basis, dtype=np.int64), artificial)
        if (tab.xb < -TAU_FEAS).any():
            raise SolverError("starting basis is infeasible")
        if np.abs(tab.xb[artificial[tab.basis]]).max(initial=0.0) > TAU_FEAS:
            raise SolverError("starting basis has nonzero artificials")

    pivots = _iterate(tab, c, max_pivots - phase_one_pivots, tol)
    tab.refactor()
    x = np.zeros(a.shape[1])
    x[tab.basis] = np.maximum(tab.xb, 0.0)
    x = x[:cols]
    logger.debug(
        f"Simplex optimal after {phase_one_pivots}+{pivots} pivots"
    )
    return SimplexResult(
        x=x,
        objective=float(c[:cols] @ x),
        basis=tab.basis.copy(),
        pivots=pivots + phase_one_pivots,
        phase_one_pivots=phase_one_pivots,
        stats={"pivots": pivots + phase_one_pivots, "status": "optimal"},
    )
