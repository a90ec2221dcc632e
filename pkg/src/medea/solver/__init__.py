"""LP solving, independent solution checks, and MPS interchange."""
from medea.solver.core import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LpSolution,
    SolverOptions,
    solve,
)
from medea.solver.verify import ResidualReport, verify_solution

__all__ = [
    "INFEASIBLE",
    "ITERATION_LIMIT",
    "OPTIMAL",
    "UNBOUNDED",
    "LpSolution",
    "SolverOptions",
    "ResidualReport",
    "solve",
    "verify_solution",
]
