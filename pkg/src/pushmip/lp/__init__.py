from .program import (
    ConfigError,
    LinearProgram,
    build_l1lp,
    build_relaxation,
    l1_distance,
    l1lp_objective,
)
from .simplex import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LpSolution,
    LpSolver,
    SimplexBreakdown,
    SimplexSolver,
    SolverConfig,
    solve_lp,
)

__all__ = [
    "ConfigError", "LinearProgram", "build_l1lp", "build_relaxation", "l1_distance",
    "l1lp_objective", "INFEASIBLE", "ITERATION_LIMIT", "OPTIMAL", "UNBOUNDED",
    "LpSolution", "LpSolver", "SimplexBreakdown", "SimplexSolver", "SolverConfig",
    "solve_lp",
]
