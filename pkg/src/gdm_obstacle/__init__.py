"""Gradient discretisations of the clamped-plate obstacle problem: schemes,
box-QP solvers, quality indicators and refinement studies."""

from .indicators import (
    IndicatorReport,
    compute_coercivity,
    compute_limit_conformity,
    compute_residual_term,
    interpolate,
    verify_error_bounds,
)
from .mesh import Grid, QuadratureRule, build_grid, gauss_rule
from .problems import ExactBundle, ObstacleProblem, catalog, multiplier_field
from .qp import (
    DiscreteSolution,
    QpInstance,
    SolverError,
    build_qp,
    solve_active_set,
    solve_oracle,
    solve_psor,
)
from .schemes import (
    GradientDiscretisation,
    apply_operator,
    assemble,
    assemble_fd,
    assemble_hermite,
    l2_error,
    l2_norm,
)
from .study import StudyResult, observed_rate, run_study

__version__ = "0.1.0"
