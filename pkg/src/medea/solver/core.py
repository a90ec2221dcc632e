"""Solver front end: scaling, status mapping, and the ``LpSolution`` record."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from medea.lp import EQ, GE, LE, LpProblem
from medea.solver.simplex import bounded_simplex

logger = logging.getLogger(__name__)

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"
MAX_SCALE_EXP = 12

_STATUS = {
    "optimal": OPTIMAL,
    "infeasible": INFEASIBLE,
    "unbounded": UNBOUNDED,
    "iteration_limit": ITERATION_LIMIT,
}


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = 1e-8
    optimality_tol: float = 1e-9
    iteration_limit: Optional[int] = None
    scaling: bool = True
    anti_cycling: bool = True
    refactor_every: int = 64
    # "simplex" is the bundled solver; "highs" hands the problem to scipy's HiGHS
    method: str = "simplex"

    def __post_init__(self) -> None:
        if not (self.feasibility_tol > 0 and self.optimality_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.method not in ("simplex", "highs"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class LpSolution:
    status: str
    primal: np.ndarray
    dual: np.ndarray
    reduced_costs: np.ndarray
    objective: float
    iterations: int = 0
    max_primal_residual: float = 0.0
    max_dual_residual: float = 0.0
    duality_gap: float = 0.0
    ray: Optional[np.ndarray] = None
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def row_limits(problem: LpProblem):
    """Lower and upper row limits implied by senses and rhs."""
    s, b = problem.senses, problem.rhs
    lo = np.where((s == GE) | (s == EQ), b, -np.inf)
    hi = np.where((s == LE) | (s == EQ), b, np.inf)
    return lo, hi


def geometric_scaling(A: sp.csr_matrix, passes: int = 4):
    """Row and column factors ``r, s`` so that ``diag(r) A diag(s)`` has entries near 1."""
    m, n = A.shape
    r = np.ones(m)
    s = np.ones(n)
    if A.nnz == 0:
        return r, s
    absA = abs(A).tocsr()
    for _ in range(passes):
        S = sp.diags(r) @ absA @ sp.diags(s)
        S = S.tocsr()
        rmax = S.max(axis=1).toarray().ravel()
        rmin = _nonzero_min(S, axis=1)
        with np.errstate(divide="ignore"):
            fac = np.where(rmax > 0, 1.0 / np.sqrt(rmax * rmin), 1.0)
        r *= fac
        S = (sp.diags(r) @ absA @ sp.diags(s)).tocsc()
        cmax = S.max(axis=0).toarray().ravel()
        cmin = _nonzero_min(S, axis=0)
        with np.errstate(divide="ignore"):
            fac = np.where(cmax > 0, 1.0 / np.sqrt(cmax * cmin), 1.0)
        s *= fac
    # powers of two keep the scaled data exact; the clamp stops stray tiny
    # coefficients from stretching tolerances beyond recognition
    r = 2.0 ** np.clip(np.round(np.log2(r)), -MAX_SCALE_EXP, MAX_SCALE_EXP)
    s = 2.0 ** np.clip(np.round(np.log2(s)), -MAX_SCALE_EXP, MAX_SCALE_EXP)
    return r, s


def _nonzero_min(S, axis):
    S = S.tocsr() if axis == 1 else S.tocsc()
    out = np.ones(S.shape[0] if axis == 1 else S.shape[1])
    for k in range(len(out)):
        seg = S.data[S.indptr[k]:S.indptr[k + 1]]
        seg = seg[seg > 0]
        if len(seg):
            out[k] = seg.min()
    return out


def solve(problem: LpProblem, options: Optional[SolverOptions] = None) -> LpSolution:
    """Solve ``problem`` to optimality and return primal values, duals and residuals.

    Duals are reported as the derivative of the objective with respect to the row
    rhs: ``>=`` rows carry nonnegative duals, ``<=`` rows nonpositive ones and
    equality rows are free.  Infeasible and unbounded outcomes are returned, not
    raised; dimension errors raise ``ValueError`` before any pivoting.
    """
    from medea.solver.verify import verify_solution

    options = options or SolverOptions()
    problem.check()
    m, n = problem.n_rows, problem.n_cols
    if n == 0 and m == 0:
        return LpSolution(OPTIMAL, np.zeros(0), np.zeros(0), np.zeros(0), problem.objective_offset)

    if options.method == "highs":
        sol = _solve_highs(problem, options)
    else:
        sol = _solve_simplex(problem, options)
        if sol.status == OPTIMAL and options.scaling:
            report = verify_solution(problem, sol)
            if report.max_dual > 1e3 * options.optimality_tol:
                # tolerances applied in scaled space can hide unscaled dual infeasibility
                logger.warning("scaled solve left dual residual %.2e; re-solving unscaled", report.max_dual)
                sol = _solve_simplex(problem, replace(options, scaling=False))
    if sol.status == OPTIMAL:
        report = verify_solution(problem, sol)
        sol.max_primal_residual = report.max_primal
        sol.max_dual_residual = report.max_dual
        sol.duality_gap = report.duality_gap
    logger.debug("solve: %s after %d iterations, objective %.6g", sol.status, sol.iterations, sol.objective)
    return sol


def _solve_simplex(problem: LpProblem, options: SolverOptions) -> LpSolution:
    A = problem.matrix()
    c = problem.c.copy()
    lb, ub = problem.lb.copy(), problem.ub.copy()
    rlo, rhi = row_limits(problem)
    if options.scaling:
        r, s = geometric_scaling(A)
    else:
        r, s = np.ones(problem.n_rows), np.ones(problem.n_cols)
    cs = c * s
    omega = float(np.abs(cs).max()) if len(cs) and np.abs(cs).max() > 0 else 1.0
    omega = 2.0 ** np.round(np.log2(omega))
    As = (sp.diags(r) @ A @ sp.diags(s)).tocsc()
    res = bounded_simplex(
        As,
        cs / omega,
        lb / s,
        ub / s,
        rlo * r,
        rhi * r,
        feas_tol=options.feasibility_tol,
        opt_tol=options.optimality_tol,
        iteration_limit=options.iteration_limit,
        anti_cycling=options.anti_cycling,
        refactor_every=options.refactor_every,
    )
    x = res.x * s
    y = res.y * r * omega
    d = res.d * omega / s
    status = _STATUS[res.status]
    ray = None
    if res.ray is not None:
        ray = res.ray * s
    elif res.farkas is not None:
        ray = res.farkas * r
    return LpSolution(
        status=status,
        primal=x,
        dual=y,
        reduced_costs=d,
        objective=float(problem.c @ x + problem.objective_offset),
        iterations=res.iterations,
        ray=ray,
    )


def _solve_highs(problem: LpProblem, options: SolverOptions) -> LpSolution:
    from scipy.optimize import linprog

    A = problem.matrix()
    s = problem.senses
    le, ge, eq = s == LE, s == GE, s == EQ
    A_ub = sp.vstack([A[le], -A[ge]]).tocsr()
    b_ub = np.concatenate([problem.rhs[le], -problem.rhs[ge]])
    bounds = np.column_stack([problem.lb, problem.ub])
    bounds = [(None if not np.isfinite(a) else a, None if not np.isfinite(b) else b) for a, b in bounds]
    res = linprog(
        problem.c,
        A_ub=A_ub if A_ub.shape[0] else None,
        b_ub=b_ub if A_ub.shape[0] else None,
        A_eq=A[eq] if eq.any() else None,
        b_eq=problem.rhs[eq] if eq.any() else None,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": options.feasibility_tol,
                 "dual_feasibility_tolerance": options.optimality_tol},
    )
    status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status, INFEASIBLE)
    y = np.zeros(problem.n_rows)
    d = np.zeros(problem.n_cols)
    x = np.zeros(problem.n_cols)
    if status == OPTIMAL:
        x = res.x
        n_le = int(le.sum())
        if A_ub.shape[0]:
            marg = res.ineqlin.marginals
            y[np.flatnonzero(le)] = marg[:n_le]
            y[np.flatnonzero(ge)] = -marg[n_le:]
        if eq.any():
            y[np.flatnonzero(eq)] = res.eqlin.marginals
        d = res.lower.marginals + res.upper.marginals
    return LpSolution(
        status=status,
        primal=x,
        dual=y,
        reduced_costs=d,
        objective=float(problem.c @ x + problem.objective_offset),
        iterations=int(getattr(res, "nit", 0)),
        message=str(res.message),
    )
