"""Concrete gradient discretisations for the clamped fourth-order problem.

A discretisation carries three sparse operators mapping coefficient vectors
to sampled fields (function, gradient, Laplacian reconstructions), each with
its own quadrature points and positive weights.  All L2 quantities are
weighted sums over those samples, so every integral used by the solvers and
the indicators is the same discrete inner product.

Gradient fields are stored component-major: ``d`` blocks of ``m`` samples.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .mesh import Grid, gauss_rule

__all__ = [
    "GradientDiscretisation",
    "assemble_fd",
    "assemble_hermite",
    "assemble",
    "apply_operator",
    "l2_norm",
    "l2_error",
    "hermite_values",
    "SCHEMES",
]

SCHEMES = ("fd1d", "fd2d", "hermite1d")
OPERATORS = ("pi", "grad", "lap")


@dataclass(frozen=True, eq=False)
class GradientDiscretisation:
    scheme: str
    grid: Grid
    n_dofs: int
    pi_op: sp.csr_matrix
    grad_op: sp.csr_matrix
    lap_op: sp.csr_matrix
    weights_pi: np.ndarray
    weights_grad: np.ndarray
    weights_lap: np.ndarray
    coords_pi: np.ndarray
    coords_grad: np.ndarray
    coords_lap: np.ndarray
    constraint_dofs: np.ndarray
    constraint_coords: np.ndarray
    quad_order: int
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def constraint_points(self):
        return list(zip(self.constraint_dofs.tolist(), map(tuple, self.constraint_coords)))

    def op(self, which: str) -> sp.csr_matrix:
        return {"pi": self.pi_op, "grad": self.grad_op, "lap": self.lap_op}[_check_which(which)]

    def weights(self, which: str) -> np.ndarray:
        return {"pi": self.weights_pi, "grad": self.weights_grad, "lap": self.weights_lap}[
            _check_which(which)
        ]

    def sample_coords(self, which: str) -> np.ndarray:
        return {"pi": self.coords_pi, "grad": self.coords_grad, "lap": self.coords_lap}[
            _check_which(which)
        ]

    def mass(self, which: str) -> sp.csr_matrix:
        """Gram matrix ``op^T diag(weights) op``; ``mass('lap')`` is the stiffness."""
        key = "mass_" + which
        if key not in self._cache:
            P = self.op(which)
            self._cache[key] = (P.T @ sp.diags(self.weights(which)) @ P).tocsr()
        return self._cache[key]

    @property
    def stiffness(self) -> sp.csr_matrix:
        return self.mass("lap")

    def stiffness_solver(self):
        """Cached sparse LU solve for the stiffness matrix."""
        if "solve_A" not in self._cache:
            self._cache["solve_A"] = factorized(self.stiffness)
        return self._cache["solve_A"]

    def load(self, values_at_pi: np.ndarray) -> np.ndarray:
        """Coefficients ``int g * Pi e_i`` for ``g`` sampled on the Pi points."""
        return self.pi_op.T @ (self.weights_pi * values_at_pi)

    def boundary_points(self) -> np.ndarray:
        return self.grid.boundary_nodes


def factorized(A):
    from scipy.sparse.linalg import splu

    lu = splu(sp.csc_matrix(A))
    return lu.solve


def _check_which(which):
    if which not in OPERATORS:
        raise ValueError(f"operator must be one of {OPERATORS}, got {which!r}")
    return which


# -- finite differences ------------------------------------------------------


def _fd_axis_ops(n, h):
    """Node-level 1D operators acting on the n-1 interior values.

    Returns (E, D1, D2), each of shape (n+1, n-1): extension by zero,
    centered first difference and second difference with mirror ghosts
    ``w_{-1} = w_{1}`` (so the boundary row of D2 is ``2 w_1 / h^2``).
    """
    m = n - 1
    E = sp.lil_matrix((n + 1, m))
    D1 = sp.lil_matrix((n + 1, m))
    D2 = sp.lil_matrix((n + 1, m))
    for k in range(m):
        E[k + 1, k] = 1.0
    for i in range(1, n):
        for j, c in ((i - 1, -1.0), (i + 1, 1.0)):
            if 1 <= j <= n - 1:
                D1[i, j - 1] = c / (2 * h)
        for j, c in ((i - 1, 1.0), (i, -2.0), (i + 1, 1.0)):
            if 1 <= j <= n - 1:
                D2[i, j - 1] = c / h**2
    D2[0, 0] = 2.0 / h**2
    D2[n, m - 1] = 2.0 / h**2
    return E.tocsr(), D1.tocsr(), D2.tocsr()


def _dual_samples(grid, order):
    """Sampling matrix from node values to dual-cell Gauss points."""
    rule = gauss_rule(grid, order, cells="dual")
    ncell, q = rule.weights.shape
    S = sp.kron(sp.identity(ncell, format="csr"), np.ones((q, 1)), format="csr")
    return S, rule.flat_points, rule.flat_weights, q


def assemble_fd(grid: Grid, order: int = 3) -> GradientDiscretisation:
    """Finite-difference discretisation on interior node values.

    Pi is piecewise constant on interior dual cells, grad the centered
    difference at every node (zero at boundary nodes), lap the 3-point /
    5-point Laplacian at every node including boundary nodes, both piecewise
    constant on the dual cells.
    """
    n, h = grid.n, grid.h
    E, D1, D2 = _fd_axis_ops(n, h)
    if grid.dim == 1:
        node_lap = D2
        node_grad = [D1]
        node_val = E
    else:
        node_lap = sp.kron(E, D2) + sp.kron(D2, E)
        node_grad = [sp.kron(E, D1), sp.kron(D1, E)]
        node_val = sp.kron(E, E)

    S, pts, wts, q = _dual_samples(grid, order)
    interior = np.repeat(grid.interior_mask, q)

    lap_op = (S @ node_lap).tocsr()
    grad_op = sp.vstack([S @ G for G in node_grad]).tocsr()
    pi_op = (S @ node_val).tocsr()[interior]

    n_dofs = grid.num_interior
    return GradientDiscretisation(
        scheme="fd1d" if grid.dim == 1 else "fd2d",
        grid=grid,
        n_dofs=n_dofs,
        pi_op=pi_op,
        grad_op=grad_op,
        lap_op=lap_op,
        weights_pi=wts[interior],
        weights_grad=np.tile(wts, grid.dim),
        weights_lap=wts.copy(),
        coords_pi=pts[interior],
        coords_grad=pts,
        coords_lap=pts,
        constraint_dofs=np.arange(n_dofs),
        constraint_coords=grid.nodes[grid.interior_mask],
        quad_order=order,
    )


# -- cubic Hermite -----------------------------------------------------------


def _hermite_shapes(t, h):
    """Values, first and second x-derivatives of the four cubic Hermite
    shape functions on an element of length h, at reference points t in [0,1].
    Order: (value left, slope left, value right, slope right)."""
    t = np.asarray(t, dtype=float)
    v = np.stack([1 - 3 * t**2 + 2 * t**3, h * (t - 2 * t**2 + t**3),
                  3 * t**2 - 2 * t**3, h * (-t**2 + t**3)])
    d1 = np.stack([-6 * t + 6 * t**2, h * (1 - 4 * t + 3 * t**2),
                   6 * t - 6 * t**2, h * (-2 * t + 3 * t**2)]) / h
    d2 = np.stack([-6 + 12 * t, h * (-4 + 6 * t), 6 - 12 * t, h * (-2 + 6 * t)]) / h**2
    return v, d1, d2


def _hermite_local_dofs(n, e):
    """Global dof indices of element e's four shape functions (-1 = clamped)."""
    def node(k):
        if k == 0 or k == n:
            return (-1, -1)
        return (2 * (k - 1), 2 * (k - 1) + 1)

    return node(e) + node(e + 1)


def assemble_hermite(grid: Grid, order: int = 3) -> GradientDiscretisation:
    """Conforming C1 cubic Hermite elements on [0, 1] with clamped ends.

    Dofs are (value, slope) pairs at interior nodes; all three operators
    sample the reconstructed function and its derivatives at the element
    Gauss points.
    """
    if grid.dim != 1:
        raise ValueError("hermite scheme requires a 1D grid")
    n, h = grid.n, grid.h
    rule = gauss_rule(grid, order, cells="primal")
    q = order
    tref = (rule.points[0, :, 0] - 0.0) / h
    v, d1, d2 = _hermite_shapes(tref, h)

    rows, cols, vals = {k: [] for k in OPERATORS}, {k: [] for k in OPERATORS}, {k: [] for k in OPERATORS}
    for e in range(n):
        for a, g in enumerate(_hermite_local_dofs(n, e)):
            if g < 0:
                continue
            r = e * q + np.arange(q)
            for key, tab in (("pi", v), ("grad", d1), ("lap", d2)):
                rows[key].append(r)
                cols[key].append(np.full(q, g))
                vals[key].append(tab[a])

    m = n * q
    n_dofs = 2 * (n - 1)

    def mat(key):
        return sp.csr_matrix(
            (np.concatenate(vals[key]), (np.concatenate(rows[key]), np.concatenate(cols[key]))),
            shape=(m, n_dofs),
        )

    pts, wts = rule.flat_points, rule.flat_weights
    return GradientDiscretisation(
        scheme="hermite1d",
        grid=grid,
        n_dofs=n_dofs,
        pi_op=mat("pi"),
        grad_op=mat("grad"),
        lap_op=mat("lap"),
        weights_pi=wts.copy(),
        weights_grad=wts.copy(),
        weights_lap=wts.copy(),
        coords_pi=pts,
        coords_grad=pts,
        coords_lap=pts,
        constraint_dofs=np.arange(0, n_dofs, 2),
        constraint_coords=grid.nodes[grid.interior_mask],
        quad_order=order,
    )


def hermite_values(grid: Grid, w: np.ndarray, x, element: int, deriv: int = 0) -> np.ndarray:
    """Evaluate the Hermite reconstruction restricted to one element.

    ``x`` may lie on the element's closed interval, which lets callers compare
    one-sided limits at shared nodes.
    """
    n, h = grid.n, grid.h
    t = (np.asarray(x, dtype=float) - element * h) / h
    tab = _hermite_shapes(t, h)[deriv]
    out = np.zeros_like(t)
    for a, g in enumerate(_hermite_local_dofs(n, element)):
        if g >= 0:
            out = out + w[g] * tab[a]
    return out


def assemble(scheme: str, grid: Grid, order: int = 3) -> GradientDiscretisation:
    if scheme == "fd1d" or scheme == "fd2d":
        want = 1 if scheme == "fd1d" else 2
        if grid.dim != want:
            raise ValueError(f"scheme {scheme} needs a {want}D grid")
        return assemble_fd(grid, order)
    if scheme == "hermite1d":
        return assemble_hermite(grid, order)
    raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


# -- evaluation ----------------------------------------------------------------


def apply_operator(gd: GradientDiscretisation, which: str, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (gd.n_dofs,):
        raise ValueError(f"coefficient vector has shape {w.shape}, expected ({gd.n_dofs},)")
    return gd.op(which) @ w


def l2_norm(gd: GradientDiscretisation, which: str, values) -> float:
    values = np.asarray(values, dtype=float).ravel()
    wts = gd.weights(which)
    if values.shape != wts.shape:
        raise ValueError(f"field has {values.size} samples, expected {wts.size}")
    return float(np.sqrt(np.dot(wts, values**2)))


def sample_field(gd: GradientDiscretisation, which: str, func) -> np.ndarray:
    """Evaluate an analytic field at the codomain samples of ``which``.

    Gradient callables return shape ``(m, d)``; the result is flattened
    component-major to match ``grad_op``.
    """
    pts = gd.sample_coords(which)
    vals = np.asarray(func(pts), dtype=float)
    if which == "grad":
        return vals.reshape(len(pts), gd.dim).T.ravel()
    return vals.reshape(len(pts))


def l2_error(gd: GradientDiscretisation, which: str, w, func) -> float:
    return l2_norm(gd, which, apply_operator(gd, which, w) - sample_field(gd, which, func))
