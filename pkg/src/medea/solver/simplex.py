"""Bounded-variable revised simplex.

Every row ``a_i x`` gets a logical column ``s_i`` so the working system is
``A x - s = 0`` with the row limits moved onto the bounds of ``s``.  Rows
that the starting point violates get an artificial column; phase one drives
those to zero, phase two minimises the real objective.

The basis inverse is kept as a sparse LU factorisation of ``B`` followed by a
product-form eta file, refactorised every ``refactor_every`` pivots.
Pricing is Dantzig's rule with a Harris two-pass ratio test; after a run of
degenerate pivots the loop switches to Bland's rule until progress resumes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

logger = logging.getLogger(__name__)

AT_LOWER, AT_UPPER, FREE, BASIC = 0, 1, 2, 3


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray  # structural values
    row_activity: np.ndarray
    y: np.ndarray  # row duals, d(obj)/d(rhs)
    d: np.ndarray  # structural reduced costs
    iterations: int
    ray: Optional[np.ndarray] = None
    farkas: Optional[np.ndarray] = None


class _Basis:
    """Basis inverse as LU of the structural bump plus a product-form eta file.

    Columns ``unit_start:`` of ``M`` are unit columns (logicals and
    artificials).  Basic unit columns are eliminated by substitution so only
    the remaining square block needs a sparse LU.
    """

    def __init__(self, M: sp.csc_matrix, basis: np.ndarray, unit_start: int) -> None:
        self.M = M
        self.m = M.shape[0]
        self.basis = basis
        self.unit_start = unit_start
        # row and coefficient of every unit column
        tail = M[:, unit_start:].tocsc()
        self.unit_row = tail.indices[tail.indptr[:-1]].copy()
        self.unit_val = tail.data[tail.indptr[:-1]].copy()
        self.etas: List[Tuple[int, np.ndarray, np.ndarray, float]] = []
        self.factor()

    def factor(self) -> None:
        is_unit = self.basis >= self.unit_start
        self.pos_s = np.flatnonzero(is_unit)
        self.pos_b = np.flatnonzero(~is_unit)
        u = self.basis[self.pos_s] - self.unit_start
        self.rows_s = self.unit_row[u]
        self.g_s = self.unit_val[u]
        in_s = np.zeros(self.m, dtype=bool)
        in_s[self.rows_s] = True
        self.rows_b = np.flatnonzero(~in_s)
        Bcols = self.M[:, self.basis[self.pos_b]].tocsr()
        self.B11 = Bcols[self.rows_b].tocsc()
        self.B21 = Bcols[self.rows_s].tocsr()
        self.B21T = self.B21.T.tocsr()
        self.lu = None
        if len(self.pos_b):
            self.lu = spla.splu(self.B11, permc_spec="COLAMD", diag_pivot_thresh=0.1)
        self.etas = []

    def _solve(self, a: np.ndarray) -> np.ndarray:
        z = np.empty(self.m)
        if self.lu is not None:
            zb = self.lu.solve(a[self.rows_b])
            z[self.pos_b] = zb
            z[self.pos_s] = (a[self.rows_s] - self.B21 @ zb) / self.g_s
        else:
            z[self.pos_s] = a[self.rows_s] / self.g_s
        return z

    def _solve_t(self, v: np.ndarray) -> np.ndarray:
        y = np.empty(self.m)
        ys = v[self.pos_s] / self.g_s
        y[self.rows_s] = ys
        if self.lu is not None:
            y[self.rows_b] = self.lu.solve(v[self.pos_b] - self.B21T @ ys, trans="T")
        return y

    def ftran(self, a: np.ndarray) -> np.ndarray:
        z = self._solve(a)
        for r, idx, vals, piv in self.etas:
            zr = z[r] / piv
            if zr != 0.0:
                z[idx] -= vals * zr
            z[r] = zr
        return z

    def btran(self, v: np.ndarray) -> np.ndarray:
        v = v.copy()
        for r, idx, vals, piv in reversed(self.etas):
            # idx excludes r itself
            v[r] = (v[r] - vals @ v[idx]) / piv
        return self._solve_t(v)

    def replace(self, r: int, alpha: np.ndarray, q: int) -> None:
        idx = np.flatnonzero(alpha)
        idx = idx[idx != r]
        self.etas.append((r, idx, alpha[idx].copy(), alpha[r]))
        self.basis[r] = q


def _column(M: sp.csc_matrix, j: int) -> np.ndarray:
    a = np.zeros(M.shape[0])
    lo, hi = M.indptr[j], M.indptr[j + 1]
    a[M.indices[lo:hi]] = M.data[lo:hi]
    return a


def bounded_simplex(
    A: sp.csc_matrix,
    c: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    row_lo: np.ndarray,
    row_hi: np.ndarray,
    *,
    feas_tol: float = 1e-8,
    opt_tol: float = 1e-9,
    iteration_limit: Optional[int] = None,
    anti_cycling: bool = True,
    refactor_every: int = 64,
    degenerate_limit: int = 50,
) -> SimplexResult:
    """Minimise ``c'x`` s.t. ``row_lo <= A x <= row_hi``, ``lb <= x <= ub``.

    Bounds may be infinite.  Returned duals follow ``y_i = d(obj)/d(b_i)``:
    nonnegative on active lower row limits, nonpositive on active upper ones.
    """
    m, n = A.shape
    A = sp.csc_matrix(A)
    if iteration_limit is None:
        iteration_limit = 20 * (m + n) + 1000

    # starting point: structurals at a finite bound (0 if free)
    xs = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    act = A @ xs if m else np.zeros(0)
    viol_lo = act < row_lo - feas_tol
    viol_hi = act > row_hi + feas_tol
    art_rows = np.flatnonzero(viol_lo | viol_hi)
    k = len(art_rows)
    # artificial column sign so that its starting value is positive
    art_sign = np.where(viol_lo[art_rows], 1.0, -1.0) if k else np.zeros(0)
    # A x - s + sign*art = 0 ; with s at the violated bound: art = (s - A x)/sign
    Art = sp.csc_matrix(
        (art_sign, (art_rows, np.arange(k))), shape=(m, k)
    )
    M = sp.hstack([A, -sp.identity(m, format="csc"), Art], format="csc")
    M.sort_indices()
    MT = M.T.tocsr()
    N = n + m + k

    lo = np.concatenate([lb, row_lo, np.zeros(k)])
    hi = np.concatenate([ub, row_hi, np.full(k, np.inf)])
    x = np.zeros(N)
    status = np.empty(N, dtype=np.int8)
    x[:n] = xs
    for j in range(n):
        if np.isfinite(lb[j]):
            status[j] = AT_LOWER
        elif np.isfinite(ub[j]):
            status[j] = AT_UPPER
        else:
            status[j] = FREE

    basis = np.empty(m, dtype=np.int64)
    slack_basic = np.ones(m, dtype=bool)
    slack_basic[art_rows] = False
    for i in range(m):
        if slack_basic[i]:
            basis[i] = n + i
            status[n + i] = BASIC
            x[n + i] = act[i]
        else:
            s_val = row_lo[i] if viol_lo[i] else row_hi[i]
            x[n + i] = s_val
            status[n + i] = AT_LOWER if viol_lo[i] else AT_UPPER
    for a, i in enumerate(art_rows):
        basis[i] = n + m + a
        status[n + m + a] = BASIC
        x[n + m + a] = abs(act[i] - x[n + i])

    B = _Basis(M, basis, n)
    iters = 0

    def recompute_basics() -> None:
        xn = x.copy()
        xn[B.basis] = 0.0
        x[B.basis] = B.ftran(-(M @ xn))

    def run_phase(cost: np.ndarray) -> Tuple[str, Optional[np.ndarray]]:
        nonlocal iters
        since_factor = 0
        degenerate_run = 0
        bland = False
        weights = np.ones(N)  # Devex reference weights
        fresh = True

        def refresh() -> np.ndarray:
            B.factor()
            recompute_basics()
            y = B.btran(cost[B.basis])
            d = cost - MT @ y
            d[B.basis] = 0.0
            return d

        d = refresh()
        movable = hi > lo
        # directions each column may move in, kept in step with ``status``
        up_ok = ((status == AT_LOWER) | (status == FREE)) & movable
        dn_ok = ((status == AT_UPPER) | (status == FREE)) & movable

        def set_status(j: int, st: int) -> None:
            status[j] = st
            up_ok[j] = movable[j] and st in (AT_LOWER, FREE)
            dn_ok[j] = movable[j] and st in (AT_UPPER, FREE)

        while True:
            if since_factor >= refactor_every:
                d = refresh()
                since_factor = 0
                fresh = True
            elig = (up_ok & (d < -opt_tol)) | (dn_ok & (d > opt_tol))
            cand_q = np.flatnonzero(elig)
            if len(cand_q) == 0:
                if fresh:
                    return "optimal", None
                # updated reduced costs drift; confirm with a fresh factorisation
                d = refresh()
                since_factor = 0
                fresh = True
                continue
            if iters >= iteration_limit:
                return "iteration_limit", None
            if bland:
                q = int(cand_q[0])
            else:
                dc = d[cand_q]
                q = int(cand_q[np.argmax(dc * dc / weights[cand_q])])
            direction = 1.0 if (up_ok[q] and d[q] < -opt_tol) else -1.0
            alpha = B.ftran(_column(M, q))
            delta = -direction * alpha  # change of basics per unit step
            xb = x[B.basis]
            blo = lo[B.basis]
            bhi = hi[B.basis]
            piv_tol = 1e-9 * max(1.0, np.abs(alpha).max())
            dec = (delta < -piv_tol) & np.isfinite(blo)
            inc = (delta > piv_tol) & np.isfinite(bhi)
            ratios = np.full(m, np.inf)
            relaxed = np.full(m, np.inf)
            ratios[dec] = (xb[dec] - blo[dec]) / -delta[dec]
            ratios[inc] = (bhi[inc] - xb[inc]) / delta[inc]
            relaxed[dec] = (xb[dec] - blo[dec] + feas_tol) / -delta[dec]
            relaxed[inc] = (bhi[inc] - xb[inc] + feas_tol) / delta[inc]
            # basics slightly outside their bounds give negative ratios; treat as zero steps
            ratios = np.maximum(ratios, 0.0)
            relaxed = np.maximum(relaxed, 0.0)
            flip_len = hi[q] - lo[q]

            r = -1
            if bland:
                theta = ratios.min() if m else np.inf
                if np.isfinite(theta):
                    ties = np.flatnonzero(ratios <= theta + 1e-12)
                    r = int(ties[np.argmin(B.basis[ties])])
            else:
                tmax = relaxed.min() if m else np.inf
                if np.isfinite(tmax):
                    cand = np.flatnonzero(ratios <= tmax)
                    if len(cand) == 0:
                        cand = np.array([int(np.argmin(ratios))])
                    r = int(cand[np.argmax(np.abs(delta[cand]))])
                    theta = ratios[r]
                else:
                    theta = np.inf

            if flip_len <= theta:
                theta = flip_len
                r = -1
            if not np.isfinite(theta):
                ray = np.zeros(N)
                ray[q] = direction
                ray[B.basis] = delta
                return "unbounded", ray

            iters += 1
            x[q] += direction * theta
            if theta > 0:
                x[B.basis] += theta * delta
            if r < 0:
                set_status(q, AT_UPPER if direction > 0 else AT_LOWER)
                x[q] = hi[q] if direction > 0 else lo[q]
            else:
                p = B.basis[r]
                if delta[r] < 0:
                    set_status(p, AT_LOWER)
                    x[p] = lo[p]
                else:
                    set_status(p, AT_UPPER)
                    x[p] = hi[p]
                # pivot row of the current basis inverse, for duals and weights
                e = np.zeros(m)
                e[r] = 1.0
                row = MT @ B.btran(e)
                nz = np.flatnonzero(row)
                rnz = row[nz]
                arq = alpha[r]
                theta_d = d[q] / arq
                d[nz] -= theta_d * rnz
                wq = weights[q]
                wnz = weights[nz]
                weights[nz] = np.maximum(wnz, (rnz / arq) ** 2 * wq)
                weights[p] = max(wq / (arq * arq), 1.0)
                if weights[p] > 1e6 or (len(nz) and weights[nz].max() > 1e6):
                    weights[:] = 1.0
                set_status(q, BASIC)
                B.replace(r, alpha, q)
                d[B.basis] = 0.0
                d[p] = -theta_d
                since_factor += 1
                fresh = False
            if theta <= feas_tol * 1e-3:
                degenerate_run += 1
                if anti_cycling and degenerate_run >= degenerate_limit:
                    bland = True
            else:
                degenerate_run = 0
                bland = False

    # phase one
    farkas = None
    if k:
        cost1 = np.zeros(N)
        cost1[n + m:] = 1.0
        state, _ = run_phase(cost1)
        infeas = x[n + m:].sum()
        logger.debug("phase one: %d artificials, %d iterations, residual %.3g", k, iters, infeas)
        if state == "iteration_limit":
            return _result("iteration_limit", x, n, m, None, None, iters)
        if infeas > feas_tol * max(1.0, np.abs(row_lo[np.isfinite(row_lo)]).max(initial=1.0)):
            farkas = B.btran(cost1[B.basis])
            return _result("infeasible", x, n, m, None, None, iters, farkas=farkas)
        hi[n + m:] = 0.0
        x[n + m:] = np.minimum(x[n + m:], 0.0)
        for a in range(k):
            if status[n + m + a] != BASIC:
                status[n + m + a] = AT_LOWER
    cost2 = np.zeros(N)
    cost2[:n] = c
    state, ray = run_phase(cost2)
    B.factor()
    recompute_basics()
    y = B.btran(cost2[B.basis])
    d_all = cost2 - MT @ y
    d_all[B.basis] = 0.0
    if state == "unbounded":
        return _result("unbounded", x, n, m, y, d_all, iters, ray=ray[:n])
    return _result(state, x, n, m, y, d_all, iters)


def _result(status, x, n, m, y, d_all, iters, ray=None, farkas=None) -> SimplexResult:
    y_out = np.zeros(m) if y is None else y.copy()
    d_out = np.zeros(n) if d_all is None else d_all[:n].copy()
    return SimplexResult(
        status=status,
        x=x[:n].copy(),
        row_activity=x[n:n + m].copy(),
        y=y_out,
        d=d_out,
        iterations=iters,
        ray=ray,
        farkas=farkas,
    )
