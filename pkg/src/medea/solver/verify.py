"""Solver-independent residual checks recomputed from the triplet stream."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from medea.lp import EQ, GE, LE, LpProblem


@dataclass
class ResidualReport:
    max_equality: float = 0.0
    max_inequality: float = 0.0
    max_bound: float = 0.0
    max_dual: float = 0.0
    max_complementarity: float = 0.0
    primal_objective: float = 0.0
    dual_objective: float = 0.0
    duality_gap: float = 0.0
    violated_rows: List[int] = field(default_factory=list)

    @property
    def max_primal(self) -> float:
        return max(self.max_equality, self.max_inequality, self.max_bound)

    def ok(self, tol: float = 1e-6) -> bool:
        return self.max_primal <= tol and self.max_dual <= tol and self.duality_gap <= tol


def verify_solution(problem: LpProblem, solution, tol: float = 1e-7) -> ResidualReport:
    """Measure primal/dual feasibility and the duality gap of ``solution``.

    Works on anything with ``primal`` and ``dual`` arrays.  Rows whose primal
    residual exceeds ``tol`` (scaled by ``1 + |rhs|``) are listed in
    ``violated_rows``.
    """
    x = np.asarray(solution.primal, dtype=float)
    y = np.asarray(solution.dual, dtype=float)
    if len(x) != problem.n_cols or len(y) != problem.n_rows:
        raise ValueError("solution dimensions do not match problem")
    rep = ResidualReport()
    if problem.n_cols == 0 and problem.n_rows == 0:
        return rep

    act = np.zeros(problem.n_rows)
    np.add.at(act, problem.rows, problem.vals * x[problem.cols])
    atv = np.zeros(problem.n_cols)
    np.add.at(atv, problem.cols, problem.vals * y[problem.rows])

    s, b = problem.senses, problem.rhs
    diff = act - b
    viol = np.zeros(problem.n_rows)
    viol[s == EQ] = np.abs(diff[s == EQ])
    viol[s == LE] = np.maximum(diff[s == LE], 0.0)
    viol[s == GE] = np.maximum(-diff[s == GE], 0.0)
    if problem.n_rows:
        rep.max_equality = float(viol[s == EQ].max(initial=0.0))
        rep.max_inequality = float(viol[s != EQ].max(initial=0.0))
        rep.violated_rows = [int(i) for i in np.flatnonzero(viol > tol * (1.0 + np.abs(b)))]
    lb, ub = problem.lb, problem.ub
    bviol = np.maximum(np.maximum(lb - x, x - ub), 0.0)
    rep.max_bound = float(bviol.max(initial=0.0))

    d = problem.c - atv
    row_sign = np.zeros(problem.n_rows)
    row_sign[s == GE] = np.maximum(-y[s == GE], 0.0)
    row_sign[s == LE] = np.maximum(y[s == LE], 0.0)
    scale_x = 1.0 + np.abs(x)
    off_lower = x > lb + tol * scale_x
    off_upper = x < ub - tol * scale_x
    col_viol = np.zeros(problem.n_cols)
    col_viol[off_lower] = np.maximum(col_viol[off_lower], d[off_lower])
    col_viol[off_upper] = np.maximum(col_viol[off_upper], -d[off_upper])
    cscale = 1.0 + np.abs(problem.c).max(initial=0.0)
    rep.max_dual = float(max(row_sign.max(initial=0.0), col_viol.max(initial=0.0)) / cscale)

    slack = np.where(s == EQ, 0.0, np.abs(diff))
    rep.max_complementarity = float((np.abs(y) * slack).max(initial=0.0) / cscale)

    rep.primal_objective = float(problem.c @ x)
    # reduced costs at round-off level carry no bound term
    d_eff = np.where(np.abs(d) <= 1e-9 * cscale, 0.0, d)
    with np.errstate(invalid="ignore"):
        bound_term = np.where(d_eff > 0, d_eff * lb, np.where(d_eff < 0, d_eff * ub, 0.0))
    rep.dual_objective = float(b @ y + bound_term.sum())
    if np.isfinite(rep.dual_objective):
        rep.duality_gap = abs(rep.primal_objective - rep.dual_objective) / max(1.0, abs(rep.primal_objective))
    else:
        rep.duality_gap = np.inf
    return rep
