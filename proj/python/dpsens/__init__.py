"""Python bindings for the dpsens sensitivity library."""

from ._core import (
    Error,
    ParseError,
    QdpProblem,
    SolverDiverged,
    SoscFailed,
    StageError,
    ValidationError,
    convexify,
    dense_kkt_solve,
    reduced_hessian_gamma,
    tridiagonal_instance,
    random_instance,
    riccati_solve,
    run_experiment,
    benchmark_qdp,
    solve_sensitivity,
    theoretical_constants,
    unit_direction,
    verify_equivalence,
)

__all__ = [
    "Error",
    "ParseError",
    "QdpProblem",
    "SolverDiverged",
    "SoscFailed",
    "StageError",
    "ValidationError",
    "convexify",
    "dense_kkt_solve",
    "reduced_hessian_gamma",
    "tridiagonal_instance",
    "random_instance",
    "riccati_solve",
    "run_experiment",
    "benchmark_qdp",
    "solve_sensitivity",
    "theoretical_constants",
    "unit_direction",
    "verify_equivalence",
]
