"""Uniform tensor grids on the unit interval / unit square.

Nodes are numbered with the x index running fastest, so node ``(i, j)`` of a
2D grid has flat index ``j * (n + 1) + i``.  Every node owns a dual cell
``(x_i - h/2, x_i + h/2)`` clipped to ``[0, 1]`` (half cells on the boundary,
quarter cells at 2D corners).
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["Grid", "QuadratureRule", "build_grid", "gauss_rule"]

SUPPORTED_ORDERS = (3, 5)


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def axis_nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h

    @property
    def num_nodes(self) -> int:
        return (self.n + 1) ** self.dim

    @property
    def num_interior(self) -> int:
        return (self.n - 1) ** self.dim

    @property
    def nodes(self) -> np.ndarray:
        """All node coordinates, shape ``(num_nodes, dim)``."""
        x = self.axis_nodes
        if self.dim == 1:
            return x[:, None]
        X, Y = np.meshgrid(x, x, indexing="xy")
        return np.column_stack([X.ravel(), Y.ravel()])

    @property
    def interior_mask(self) -> np.ndarray:
        inner = np.zeros(self.n + 1, dtype=bool)
        inner[1:-1] = True
        if self.dim == 1:
            return inner
        return np.outer(inner, inner).ravel()

    @property
    def boundary_nodes(self) -> np.ndarray:
        return self.nodes[~self.interior_mask]

    def axis_cells(self, kind: str = "primal") -> np.ndarray:
        """Cell intervals along one axis, shape ``(ncells, 2)``."""
        x = self.axis_nodes
        if kind == "primal":
            return np.column_stack([x[:-1], x[1:]])
        if kind == "dual":
            lo = np.clip(x - self.h / 2, 0.0, 1.0)
            hi = np.clip(x + self.h / 2, 0.0, 1.0)
            return np.column_stack([lo, hi])
        raise ValueError(f"unknown cell kind {kind!r}")

    def dual_volumes(self) -> np.ndarray:
        """Volume of the dual cell of every node (flat node order)."""
        c = self.axis_cells("dual")
        v = c[:, 1] - c[:, 0]
        if self.dim == 1:
            return v
        return np.outer(v, v).ravel()


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Legendre points on every cell of a grid.

    ``points`` has shape ``(ncells, npts, dim)`` and ``weights`` shape
    ``(ncells, npts)``; cells follow the flat node/element ordering.
    """

    points: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def flat_points(self) -> np.ndarray:
        return self.points.reshape(-1, self.points.shape[-1])

    @property
    def flat_weights(self) -> np.ndarray:
        return self.weights.ravel()

    def integrate(self, func) -> float:
        return float(np.dot(self.flat_weights, func(self.flat_points)))


def build_grid(dim: int, n: int) -> Grid:
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if int(n) != n or n < 4 or n % 2:
        raise ValueError(f"n must be >= 4 and even, got {n}")
    return Grid(dim=int(dim), n=int(n))


def _axis_rule(cells, order):
    xi, wi = np.polynomial.legendre.leggauss(order)
    a, b = cells[:, :1], cells[:, 1:]
    pts = 0.5 * (a + b) + 0.5 * (b - a) * xi
    wts = 0.5 * (b - a) * wi
    return pts, wts


def gauss_rule(grid: Grid, order: int = 3, cells: str = "primal") -> QuadratureRule:
    """Per-cell Gauss rule with ``order`` points per axis.

    Exact for per-axis polynomial degree ``2*order - 1`` on each cell.
    ``cells`` selects the primal elements or the node dual cells.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported quadrature order {order}; use one of {SUPPORTED_ORDERS}")
    px, wx = _axis_rule(grid.axis_cells(cells), order)
    if grid.dim == 1:
        return QuadratureRule(px[:, :, None], wx, order)
    nc, q = px.shape
    # cell (i, j) -> j * nc + i; point (a, b) -> b * q + a
    X = px[None, :, None, :].repeat(nc, 0).repeat(q, 2)
    Y = px[:, None, :, None].repeat(nc, 1).repeat(q, 3)
    W = wx[:, None, :, None] * wx[None, :, None, :]
    pts = np.stack([X, Y], axis=-1).reshape(nc * nc, q * q, 2)
    return QuadratureRule(pts, W.reshape(nc * nc, q * q), order)
