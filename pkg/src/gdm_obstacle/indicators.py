"""Quality measures of a gradient discretisation and the a-priori error check.

* coercivity constant: largest ratio of the function / gradient
  reconstruction norm to the Laplacian reconstruction norm;
* consistency: distance from an exact solution to the discrete constraint set
  in the three reconstructed norms (realized through a box-QP interpolant);
* limit-conformity: dual norm of the discrete Green's-identity defect;
* residual term: multiplier paired with the obstacle gap of the interpolant.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from . import qp as qpmod
from .problems import multiplier_field
from .schemes import l2_error, l2_norm, sample_field

__all__ = [
    "IndicatorReport",
    "PowerIterationError",
    "compute_coercivity",
    "compute_limit_conformity",
    "interpolate",
    "compute_residual_term",
    "error_bound_rhs",
    "solution_errors",
    "verify_error_bounds",
]

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


class PowerIterationError(RuntimeError):
    pass


@dataclass
class IndicatorReport:
    C_D: float
    S_tilde: float
    W_D: float
    R_D: float
    errors: tuple
    rhs: tuple
    margins: tuple
    interpolant_coeffs: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["errors"] = dict(zip(("e_pi", "e_grad", "e_lap"), self.errors))
        d["rhs"] = dict(zip(("rhs_pi", "rhs_grad", "rhs_lap"), self.rhs))
        d["margins"] = dict(zip(("pi", "grad", "lap"), self.margins))
        d["interpolant_coeffs"] = np.asarray(self.interpolant_coeffs).tolist()
        return d

    @property
    def ok(self) -> bool:
        return all(m >= 0 for m in self.margins)


# -- coercivity ----------------------------------------------------------------


def _largest_generalized_eig(solve_A, A, M, tol, max_iter):
    """Largest eigenvalue of A^{-1} M by power iteration with A-solves."""
    n = A.shape[0]
    starts = [np.ones(n), np.random.default_rng(0).standard_normal(n)]
    for x in starts:
        x = x / np.sqrt(x @ (A @ x))
        lam = 0.0
        for _ in range(max_iter):
            y = solve_A(M @ x)
            ay = y @ (A @ y)
            if not ay > 0:
                break  # start vector annihilated by M; restart
            x = y / np.sqrt(ay)
            new = (x @ (M @ x)) / (x @ (A @ x))
            if abs(new - lam) <= tol * abs(new):
                return new
            lam = new
        else:
            raise PowerIterationError(f"power iteration did not converge in {max_iter} steps")
    raise PowerIterationError("power iteration stagnated from every start vector")


def compute_coercivity(gd, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Discrete Poincare constant of ``gd``.

    ``C_D = sqrt(max(lambda_max(A^{-1} M_pi), lambda_max(A^{-1} M_grad)))`` where A
    is the Laplacian Gram matrix and M_* the function / gradient Gram matrices.
    """
    solve_A = gd.stiffness_solver()
    A = gd.stiffness
    lam = max(
        _largest_generalized_eig(solve_A, A, gd.mass(which), tol, max_iter)
        for which in ("pi", "grad")
    )
    return float(np.sqrt(lam))


# -- limit-conformity ----------------------------------------------------------


def conformity_functional(gd, v, lap_v) -> np.ndarray:
    """Coefficients ``l_i = int lap_v * Pi e_i - int v * Lap_D e_i``."""
    a = gd.pi_op.T @ (gd.weights_pi * sample_field(gd, "pi", lap_v))
    c = gd.lap_op.T @ (gd.weights_lap * sample_field(gd, "lap", v))
    return a - c


def compute_limit_conformity(gd, v, lap_v) -> float:
    """Limit-conformity defect of ``gd`` tested against the field ``v``.

    Maximizing the defect over the linear coefficient space gives the dual
    norm ``sqrt(l^T A^{-1} l)``, which does not depend on the sign convention
    of the defect.
    """
    ell = conformity_functional(gd, v, lap_v)
    if not np.any(ell):
        return 0.0
    z = gd.stiffness_solver()(ell)
    return float(np.sqrt(max(ell @ z, 0.0)))


# -- consistency / interpolation ---------------------------------------------


def _interpolation_terms(gd, exact):
    vals = {
        "pi": sample_field(gd, "pi", exact.c),
        "grad": sample_field(gd, "grad", exact.grad),
        "lap": sample_field(gd, "lap", exact.lap),
    }
    H = gd.mass("pi") + gd.mass("grad") + gd.mass("lap")
    g = sum(gd.op(k).T @ (gd.weights(k) * vals[k]) for k in vals)
    return sp.csr_matrix(H), np.asarray(g)


def consistency_objective(gd, exact, w) -> float:
    """Sum of squared reconstruction errors against an exact bundle."""
    return sum(
        l2_error(gd, which, w, func) ** 2
        for which, func in (("pi", exact.c), ("grad", exact.grad), ("lap", exact.lap))
    )


def interpolate(gd, problem, solver: str = "active-set", constrained: bool = True, **solver_kw):
    """Best constrained approximation of the exact solution.

    Minimizes the sum of the three squared reconstruction errors over the
    discrete constraint set and returns ``(coefficients, S_tilde)`` with
    ``S_tilde`` the square root of the minimum.  The sum-of-norms consistency
    measure lies between ``S_tilde`` and ``sqrt(3) * S_tilde``.
    """
    exact = problem.exact
    if exact is None:
        raise ValueError(f"problem {problem.id!r} has no exact solution bundle")
    H, g = _interpolation_terms(gd, exact)
    if constrained:
        u = problem.psi(gd.constraint_coords)
        instance = qpmod.make_qp(H, g, u, gd.constraint_dofs)
    else:
        instance = qpmod.make_qp(H, g)
    sol = qpmod.solve(instance, solver, **solver_kw)
    w = sol.w
    return w, float(np.sqrt(consistency_objective(gd, exact, w)))


# -- residual term -------------------------------------------------------------


def compute_residual_term(gd, problem, interpolant) -> float:
    """``int lambda * (psi - Pi I c)`` with the multiplier ``lambda = f - bilap(c)``."""
    lam = multiplier_field(problem)(gd.coords_pi)
    if not np.any(lam):
        return 0.0
    gap = problem.psi(gd.coords_pi) - gd.pi_op @ interpolant
    return float(np.dot(gd.weights_pi, lam * gap))


# -- the error estimates -------------------------------------------------------


def error_bound_rhs(C, W, S, R):
    """Right-hand sides of the three a-priori estimates.

    ``S`` is the consistency value, ``R`` the residual term (negative values are
    clamped to zero).  Returns ``(rhs_pi, rhs_grad, rhs_lap)``.
    """
    rplus = math.sqrt(max(R, 0.0))
    rhs_lap = SQRT2 / 2 * W + (SQRT2 + 2) / 2 * S + rplus
    rhs_pi = C * SQRT2 / 2 * W + (C * (SQRT2 + 2) / 2 + 1) * S + C * rplus
    return rhs_pi, rhs_pi, rhs_lap


def solution_errors(gd, exact, w):
    return (
        l2_error(gd, "pi", w, exact.c),
        l2_error(gd, "grad", w, exact.grad),
        l2_error(gd, "lap", w, exact.lap),
    )


def verify_error_bounds(gd, problem, solution, solver="active-set", coercivity_tol=1e-10) -> IndicatorReport:
    """Evaluate every indicator and compare the discrete solution's errors
    with the a-priori bounds (``sqrt(3) * S_tilde`` stands in for the
    consistency measure)."""
    exact = problem.exact
    if exact is None:
        raise ValueError(f"problem {problem.id!r} has no exact solution bundle")
    w = solution.w if hasattr(solution, "w") else np.asarray(solution)
    C = compute_coercivity(gd, coercivity_tol)
    W = compute_limit_conformity(gd, exact.lap, exact.bilap)
    interp, S_tilde = interpolate(gd, problem, solver)
    R = compute_residual_term(gd, problem, interp)
    errors = solution_errors(gd, exact, w)
    rhs = error_bound_rhs(C, W, SQRT3 * S_tilde, R)
    margins = tuple(r - e for r, e in zip(rhs, errors))
    return IndicatorReport(C, S_tilde, W, R, errors, rhs, margins, interp)


def l2_multiplier_norm(gd, problem) -> float:
    return l2_norm(gd, "pi", multiplier_field(problem)(gd.coords_pi))
