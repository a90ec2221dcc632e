import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medea.lp import LpProblem
from medea.solver import INFEASIBLE, OPTIMAL, UNBOUNDED, SolverOptions, solve, verify_solution
from oracles import vertex_optimum


def dense_lp(c, A, senses, b, lb=None, ub=None):
    A = np.asarray(A, float)
    r, k = np.nonzero(A)
    n = A.shape[1]
    return LpProblem(
        rows=r, cols=k, vals=A[r, k], senses=list(senses), rhs=b, c=c,
        lb=np.zeros(n) if lb is None else lb, ub=np.full(n, np.inf) if ub is None else ub,
    )


def test_single_bound_row():
    sol = solve(dense_lp([1.0], [[1.0]], "G", [1.0]))
    assert sol.status == OPTIMAL
    assert sol.primal[0] == pytest.approx(1.0)
    assert sol.dual[0] == pytest.approx(1.0)


def test_two_by_three_against_vertices():
    c, A, s, b = [-3.0, -2.0], [[1, 1], [1, 3], [2, 1]], "LLL", [4.0, 6.0, 7.0]
    sol = solve(dense_lp(c, A, s, b))
    ref = vertex_optimum(c, A, s, b, [0, 0], [100, 100])
    assert sol.objective == pytest.approx(ref, rel=1e-9)
    assert ref == pytest.approx(-11.0)


def test_degenerate_redundant_rows():
    # several rows meet at the optimum; some are exact copies
    A = [[1, 1, 0], [1, 1, 0], [2, 2, 0], [1, 0, 1], [0, 1, 1], [1, 0, 0]]
    c = [-1.0, -1.0, -1.0]
    b = [1.0, 1.0, 2.0, 1.0, 1.0, 1.0]
    for opts in (SolverOptions(), SolverOptions(scaling=False), SolverOptions(anti_cycling=True, refactor_every=2)):
        sol = solve(dense_lp(c, A, "LLLLLL", b), opts)
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(vertex_optimum(c, A, "LLLLLL", b, [0] * 3, [5] * 3))


def test_infeasible_and_unbounded():
    sol = solve(dense_lp([1.0], [[1.0], [1.0]], "GL", [2.0, 1.0]))
    assert sol.status == INFEASIBLE
    sol = solve(dense_lp([-1.0, 0.0], [[1.0, -1.0]], "L", [1.0]))
    assert sol.status == UNBOUNDED


def test_dual_sign_convention():
    # y = d objective / d rhs: >= rows nonnegative, <= rows nonpositive
    c, A, s, b = [1.0, 2.0], [[1, 1], [1, 0]], "GL", [3.0, 2.0]
    sol = solve(dense_lp(c, A, s, b))
    assert sol.dual[0] == pytest.approx(2.0)
    assert sol.dual[1] == pytest.approx(-1.0)
    # finite-difference check
    bumped = solve(dense_lp(c, A, s, [3.0, 2.001]))
    assert (bumped.objective - sol.objective) / 0.001 == pytest.approx(sol.dual[1])


def test_verify_optimal_run_is_clean():
    c, A, s, b = [-3.0, -2.0], [[1, 1], [1, 3], [2, 1]], "LLE", [4.0, 6.0, 7.0]
    sol = solve(dense_lp(c, A, s, b))
    rep = verify_solution(dense_lp(c, A, s, b), sol)
    assert rep.ok(1e-9)
    assert rep.violated_rows == []


def test_verify_flags_perturbed_rows():
    p = dense_lp([1.0, 1.0, 1.0], [[1, 1, 0], [0, 1, 1], [1, 0, 0]], "EEG", [2.0, 2.0, 0.5])
    sol = solve(p)
    sol.primal = sol.primal.copy()
    sol.primal[2] += 1e-3
    rep = verify_solution(p, sol)
    assert rep.violated_rows == [1]
    assert rep.max_equality == pytest.approx(1e-3)


def test_verify_zero_problem():
    p = LpProblem([], [], [], [], [], [], [], [])
    sol = solve(p)
    rep = verify_solution(p, sol)
    assert rep.max_primal == 0.0 and rep.max_dual == 0.0 and rep.duality_gap == 0.0


def test_iteration_limit_reported():
    c, A, s, b = [-3.0, -2.0], [[1, 1], [1, 3], [2, 1]], "LLL", [4.0, 6.0, 7.0]
    sol = solve(dense_lp(c, A, s, b), SolverOptions(iteration_limit=1))
    assert sol.status in ("IterationLimit", OPTIMAL)
    assert not sol.optimal or sol.iterations <= 1


@st.composite
def small_lp(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 8))
    ints = st.integers(-5, 5)
    A = np.array(draw(st.lists(st.lists(ints, min_size=n, max_size=n), min_size=m, max_size=m)), float)
    b = np.array(draw(st.lists(st.integers(-10, 20), min_size=m, max_size=m)), float)
    senses = "".join(draw(st.lists(st.sampled_from("LGE"), min_size=m, max_size=m)))
    c = np.array(draw(st.lists(ints, min_size=n, max_size=n)), float)
    lb = np.array(draw(st.lists(st.integers(-5, 0), min_size=n, max_size=n)), float)
    ub = lb + np.array(draw(st.lists(st.integers(0, 10), min_size=n, max_size=n)), float)
    return c, A, senses, b, lb, ub


@settings(max_examples=150, deadline=None)
@given(small_lp())
def test_random_lps_match_vertex_oracle(lp):
    c, A, s, b, lb, ub = lp
    ref = vertex_optimum(c, A, s, b, lb, ub)
    p = dense_lp(c, A, s, b, lb, ub)
    sol = solve(p)
    if ref is None:
        assert sol.status == INFEASIBLE
    else:
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(ref, rel=1e-7, abs=1e-7)
        assert verify_solution(p, sol).ok(1e-7)


@settings(max_examples=60, deadline=None)
@given(small_lp())
def test_simplex_agrees_with_highs(lp):
    c, A, s, b, lb, ub = lp
    p = dense_lp(c, A, s, b, lb, ub)
    ours, ref = solve(p), solve(p, SolverOptions(method="highs"))
    assert ours.status == ref.status
    if ref.optimal:
        assert ours.objective == pytest.approx(ref.objective, rel=1e-7, abs=1e-7)
