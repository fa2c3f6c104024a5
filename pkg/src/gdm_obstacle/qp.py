"""Bound-constrained SPD quadratic programs.

    minimize  1/2 w^T A w - b^T w   subject to  w_j <= u_j  (j in constrained set)

The discrete obstacle inequality is exactly the optimality condition of this
program.  Three solvers share one contract and one output type: projected
SOR, a primal active-set method on sparse LU factorizations, and a
brute-force enumeration of active sets used as an oracle on small instances.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

__all__ = [
    "QpInstance",
    "DiscreteSolution",
    "QpSetupError",
    "SolverError",
    "build_qp",
    "make_qp",
    "solve_psor",
    "solve_active_set",
    "solve_oracle",
    "solve",
    "objective",
    "complementarity_residual",
    "random_instance",
    "SOLVERS",
]

SOLVERS = ("psor", "active-set", "oracle")
ORACLE_MAX_CONSTRAINTS = 15


class QpSetupError(ValueError):
    pass


class SolverError(RuntimeError):
    """Raised when a solver fails; ``residual`` holds the last residual seen."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class QpInstance:
    A: sp.csr_matrix
    b: np.ndarray
    upper_bounds: np.ndarray
    constrained_set: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def upper(self) -> np.ndarray:
        """Bounds for every dof, ``+inf`` where unconstrained."""
        u = np.full(self.n, np.inf)
        u[self.constrained_set] = self.upper_bounds
        return u


@dataclass
class DiscreteSolution:
    w: np.ndarray
    active_set: np.ndarray
    iterations: int
    residual: float
    solver_id: str
    info: dict = field(default_factory=dict)


def make_qp(A, b, upper_bounds=None, constrained_set=None) -> QpInstance:
    A = sp.csr_matrix(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise QpSetupError(f"shape mismatch: A {A.shape}, b {b.shape}")
    if constrained_set is None:
        constrained_set = np.arange(n) if upper_bounds is not None else np.arange(0)
    constrained_set = np.asarray(constrained_set, dtype=int)
    if upper_bounds is None:
        upper_bounds = np.full(constrained_set.size, np.inf)
    upper_bounds = np.broadcast_to(np.asarray(upper_bounds, dtype=float), constrained_set.shape).copy()
    if constrained_set.size and (constrained_set.min() < 0 or constrained_set.max() >= n):
        raise QpSetupError("constrained_set has indices outside 0..n-1")
    if len(np.unique(constrained_set)) != constrained_set.size:
        raise QpSetupError("constrained_set has duplicate indices")
    asym = abs(A - A.T)
    if asym.nnz and asym.max() > 1e-12 * max(1.0, abs(A).max()):
        raise QpSetupError("A is not symmetric")
    return QpInstance(A, b, upper_bounds, constrained_set)


def build_qp(gd, problem) -> QpInstance:
    """Stiffness, load and nodal obstacle bounds for a discretised problem."""
    if not problem.compatible_with(gd.dim):
        raise QpSetupError(f"problem {problem.id!r} is not defined in {gd.dim}D")
    psi_bdry = problem.psi(gd.boundary_points())
    if np.any(psi_bdry < 0):
        raise QpSetupError("obstacle is negative on the boundary (need psi >= 0 on the boundary)")
    u = problem.psi(gd.constraint_coords)
    if np.any(np.isnan(u)) or np.any(u == -np.inf):
        raise QpSetupError("obstacle is not finite at constraint points")
    b = gd.load(problem.f(gd.coords_pi))
    return QpInstance(gd.stiffness, np.asarray(b, dtype=float), np.asarray(u, dtype=float),
                      gd.constraint_dofs.copy())


def objective(qp: QpInstance, w) -> float:
    return float(0.5 * w @ (qp.A @ w) - qp.b @ w)


def complementarity_residual(qp: QpInstance, w) -> float:
    """Max-norm of the natural residual ``w - min(u, w - (Aw - b))``.

    Zero exactly when w is feasible, stationary off the active set and has
    nonnegative multipliers on it.
    """
    g = qp.A @ w - qp.b
    r = np.maximum(w - qp.upper, g)
    return float(np.max(np.abs(r))) if r.size else 0.0


def _classify(qp, w, tol):
    """Active set: constrained dofs at their bound with multiplier above tol.

    Weakly active dofs (multiplier within tol of zero) count as inactive.
    """
    c = qp.constrained_set
    if c.size == 0:
        return np.arange(0)
    u = qp.upper_bounds
    mu = (qp.b - qp.A @ w)[c]
    with np.errstate(invalid="ignore"):
        at_bound = w[c] >= u - 1e-12 * np.maximum(1.0, np.abs(u))
    return np.sort(c[at_bound & (mu > tol)])


def _finish(qp, w, iterations, solver_id, tol, **info):
    return DiscreteSolution(
        w=w,
        active_set=_classify(qp, w, tol),
        iterations=iterations,
        residual=complementarity_residual(qp, w),
        solver_id=solver_id,
        info=info,
    )


# -- projected SOR -----------------------------------------------------------


def solve_psor(qp: QpInstance, omega: float = 1.5, tol: float = 1e-10, max_iter=None) -> DiscreteSolution:
    """Projected successive over-relaxation.

    Each sweep updates dofs in index order with the relaxed Gauss-Seidel value
    and projects onto ``w_j <= u_j``.  Stops when the complementarity residual
    drops below ``tol``.
    """
    if not 0 < omega < 2:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    n = qp.n
    if max_iter is None:
        max_iter = 200 * n
    A = qp.A.tocsr()
    indptr, indices, data = A.indptr, A.indices, A.data
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverError("nonpositive diagonal; A is not SPD")
    u = qp.upper
    b = qp.b
    w = np.minimum(np.zeros(n), u)
    rows = [(indices[indptr[i]:indptr[i + 1]], data[indptr[i]:indptr[i + 1]]) for i in range(n)]
    res = complementarity_residual(qp, w)
    for it in range(1, max_iter + 1):
        if res <= tol:
            return _finish(qp, w, it - 1, "psor", tol)
        for i in range(n):
            cols, vals = rows[i]
            r = b[i] - vals @ w[cols]
            wi = w[i] + omega * r / diag[i]
            w[i] = wi if wi < u[i] else u[i]
        res = complementarity_residual(qp, w)
    if res <= tol:
        return _finish(qp, w, max_iter, "psor", tol)
    raise SolverError(f"psor did not converge in {max_iter} sweeps (residual {res:.3e})",
                      residual=res, iterations=max_iter)


# -- primal active set -------------------------------------------------------


def _subspace_minimizer(A, b, u, fixed):
    """Minimize the objective with dofs in ``fixed`` pinned at their bounds."""
    n = A.shape[0]
    y = np.empty(n)
    free = np.ones(n, dtype=bool)
    free[fixed] = False
    y[~free] = u[~free]
    if free.any():
        rhs = b[free] - A[free][:, ~free] @ y[~free]
        AFF = sp.csc_matrix(A[free][:, free])
        try:
            lu = splu(AFF)
        except RuntimeError as exc:
            raise SolverError(f"factorization failed ({exc}); A is not SPD") from exc
        y[free] = lu.solve(rhs)
    return y


def solve_active_set(qp: QpInstance, tol: float = 1e-10, max_iter=None) -> DiscreteSolution:
    """Primal active-set method with a sparse direct solve per iteration.

    Starts from the unconstrained minimizer clipped onto the box, which is
    feasible.  Each iteration either steps toward the working-set minimizer
    (adding the blocking bounds) or, at that minimizer, releases the bound with
    the most negative multiplier.
    """
    A = qp.A.tocsr()
    n = qp.n
    if max_iter is None:
        max_iter = 10 * n + 100
    u = qp.upper
    b = qp.b
    constrained = np.isfinite(u)

    w = _subspace_minimizer(A, b, u, np.arange(0))
    working = constrained & (w >= u)
    w = np.where(working, u, w)

    for it in range(1, max_iter + 1):
        y = _subspace_minimizer(A, b, u, np.flatnonzero(working))
        p = y - w
        moving = constrained & ~working & (p > 0)
        alpha = 1.0
        if moving.any():
            ratios = np.maximum(u[moving] - w[moving], 0.0) / p[moving]
            alpha = min(1.0, float(ratios.min()))
        if alpha >= 1.0:
            w = y
            mu = (b - A @ w)[working]
            if not working.any() or mu.min() >= -tol:
                return _finish(qp, w, it, "active-set", tol)
            drop = np.flatnonzero(working)[np.argmin(mu)]
            working[drop] = False
        else:
            w = w + alpha * p
            idx = np.flatnonzero(moving)
            block = idx[ratios <= alpha * (1 + 1e-12) + 1e-300]
            working[block] = True
            w[block] = u[block]
    res = complementarity_residual(qp, w)
    raise SolverError(f"active-set hit the iteration limit {max_iter} (residual {res:.3e})",
                      residual=res, iterations=max_iter)


# -- brute-force oracle ------------------------------------------------------


def solve_oracle(qp: QpInstance, tol: float = 1e-10) -> DiscreteSolution:
    """Enumerate every active subset of the constrained dofs.

    For each subset the equality-constrained KKT system is solved densely; a
    subset passes if the point is feasible and its multipliers are
    nonnegative.  By uniqueness all passing subsets share one w; the smallest
    passing subset is reported.
    """
    c = qp.constrained_set
    k = c.size
    if k > ORACLE_MAX_CONSTRAINTS:
        raise QpSetupError(f"oracle supports at most {ORACLE_MAX_CONSTRAINTS} constraints, got {k}")
    A = qp.A.toarray()
    b = qp.b
    u = qp.upper
    n = qp.n
    scale_w = 1.0 + np.max(np.abs(qp.upper_bounds[np.isfinite(qp.upper_bounds)]), initial=0.0)
    scale_mu = 1.0 + np.max(np.abs(b), initial=0.0)

    passing = []
    for mask in itertools.product((False, True), repeat=k):
        S = c[np.array(mask, dtype=bool)] if k else c
        if np.any(~np.isfinite(u[S])):
            continue
        free = np.ones(n, dtype=bool)
        free[S] = False
        w = np.empty(n)
        w[S] = u[S]
        if free.any():
            rhs = b[free] - A[np.ix_(free, ~free)] @ w[~free]
            try:
                w[free] = sla.solve(A[np.ix_(free, free)], rhs, assume_a="pos")
            except sla.LinAlgError:
                continue
        mu = (b - A @ w)[S]
        feasible = np.all(w[c] <= u[c] + 1e-10 * scale_w)
        if feasible and (mu.size == 0 or mu.min() >= -1e-9 * scale_mu):
            passing.append((len(S), w))
    if not passing:
        raise SolverError("no valid KKT point found; A is probably not SPD")
    passing.sort(key=lambda t: t[0])
    w = passing[0][1]
    spread = max(np.max(np.abs(p[1] - w)) for p in passing)
    return _finish(qp, w, 2**k, "oracle", tol, n_passing=len(passing), spread=float(spread))


def solve(qp: QpInstance, solver: str = "active-set", omega=1.5, tol=1e-10, max_iter=None):
    if solver == "psor":
        return solve_psor(qp, omega=omega, tol=tol, max_iter=max_iter)
    if solver == "active-set":
        return solve_active_set(qp, tol=tol, max_iter=max_iter)
    if solver == "oracle":
        return solve_oracle(qp, tol=tol)
    raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")


def random_instance(rng: np.random.Generator, n: int = 12, k=None) -> QpInstance:
    """Seeded random SPD box QP whose bounds bind on a random subset."""
    k = n if k is None else k
    M = rng.standard_normal((n, n))
    A = M.T @ M / n + np.eye(n)
    b = rng.standard_normal(n)
    w_free = np.linalg.solve(A, b)
    c = np.sort(rng.choice(n, size=k, replace=False))
    u = w_free[c] - rng.uniform(-0.5, 0.5, size=k)
    return make_qp(A, b, u, c)
