"""Smoothed polytope distances and barrier-function filters."""

from ._core import (
    ConfigError,
    DistanceProblem,
    DistanceSolution,
    EmptyInterior,
    Error,
    FilterStatus,
    InvalidInput,
    NumericalFailure,
    ParamVector,
    RigidPolytope,
    SafetyConstraintRow,
    SetSpec,
    SingularJacobian,
    SolveStatus,
    TickStatus,
    __version__,
    distance_gradient,
    envelope_gradient,
    hessian_min_eigenvalue,
    load_config,
    lse,
    lse_eps_plus,
    membership_margin,
    parse_config,
    run_simulation,
    solve_distance,
    solve_filter_qp,
    write_trace,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
