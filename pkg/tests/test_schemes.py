import numpy as np
import pytest

from gdm_obstacle.mesh import build_grid
from gdm_obstacle.problems import catalog
from gdm_obstacle.schemes import (
    apply_operator,
    assemble,
    assemble_fd,
    assemble_hermite,
    hermite_values,
    l2_error,
    l2_norm,
)

ALL = [("fd1d", 1), ("fd2d", 2), ("hermite1d", 1)]


def gd_for(scheme, n, order=3):
    dim = 2 if scheme == "fd2d" else 1
    return assemble(scheme, build_grid(dim, n), order)


def test_fd1d_dof_count_and_boundary_row():
    g = build_grid(1, 8)
    gd = assemble_fd(g)
    assert gd.n_dofs == 7
    # every Gauss sample of the node-0 dual cell carries 2 w_1 / h^2
    row = gd.lap_op[0].toarray().ravel()
    expected = np.zeros(7)
    expected[0] = 2 / g.h**2
    assert np.allclose(row, expected)


def test_fd1d_clamped_beam_row():
    # (h/2)(2/h^2)^2 + h(2/h^2)^2 + h(1/h^2)^2 = 7/h^3, then -4/h^3, 1/h^3
    g = build_grid(1, 8)
    A = assemble_fd(g).stiffness.toarray()
    assert np.isclose(A[0, 0], 7 / g.h**3, rtol=1e-13)
    assert np.isclose(A[0, 1], -4 / g.h**3, rtol=1e-13)
    assert np.isclose(A[0, 2], 1 / g.h**3, rtol=1e-13)
    assert np.isclose(A[3, 3], 6 / g.h**3, rtol=1e-13)


def test_fd2d_small():
    gd = assemble_fd(build_grid(2, 4))
    assert gd.n_dofs == 9
    A = gd.stiffness.toarray()
    assert np.allclose(A, A.T, atol=1e-12 * abs(A).max())
    assert np.linalg.eigvalsh(A).min() > 0


@pytest.mark.parametrize("scheme, dim", ALL)
@pytest.mark.parametrize("n", [4, 8, 16])
def test_stiffness_spd(scheme, dim, n):
    gd = gd_for(scheme, n)
    A = gd.stiffness.toarray()
    assert np.max(np.abs(A - A.T)) <= 1e-12 * np.abs(A).max()
    assert np.linalg.eigvalsh(A).min() > 0
    np.linalg.cholesky(A)
    for which in ("pi", "grad", "lap"):
        assert np.all(gd.weights(which) > 0)


@pytest.mark.parametrize("scheme, dim", ALL)
def test_norm_two_ways_and_duality(scheme, dim):
    gd = gd_for(scheme, 8)
    rng = np.random.default_rng(1)
    A = gd.stiffness
    for _ in range(5):
        w, v = rng.standard_normal((2, gd.n_dofs))
        n1 = l2_norm(gd, "lap", apply_operator(gd, "lap", w)) ** 2
        n2 = w @ (A @ w)
        assert abs(n1 - n2) <= 1e-12 * n2
        assert abs(w @ (A @ v) - v @ (A @ w)) <= 1e-12 * abs(w @ (A @ v)) + 1e-12


def test_hermite_dof_count_and_constraints():
    gd = assemble_hermite(build_grid(1, 8))
    assert gd.n_dofs == 14
    assert list(gd.constraint_dofs) == list(range(0, 14, 2))
    assert np.allclose(gd.constraint_coords[:, 0], np.arange(1, 8) / 8)


def test_hermite_rejects_2d():
    with pytest.raises(ValueError):
        assemble_hermite(build_grid(2, 4))


def _q(x):
    return x**3 - 1.5 * x**2 + 0.5 * x


def _dq(x):
    return 3 * x**2 - 3 * x + 0.5


def test_hermite_cubic_reproduction_interior_elements():
    n = 8
    g = build_grid(1, n)
    gd = assemble_hermite(g)
    x = g.axis_nodes[1:-1]
    w = np.empty(gd.n_dofs)
    w[0::2], w[1::2] = _q(x), _dq(x)
    vals = apply_operator(gd, "pi", w).reshape(n, 3)
    pts = gd.coords_pi[:, 0].reshape(n, 3)
    # the clamped end elements cannot carry q's nonzero end slopes
    inner = slice(1, n - 1)
    assert np.allclose(vals[inner], _q(pts[inner]), atol=1e-12)


def test_hermite_second_derivative_norm_interior():
    # analytic: int_h^{1-h} (6x - 3)^2 dx = (3 - 6h)^3 / 9
    n = 8
    g = build_grid(1, n)
    gd = assemble_hermite(g)
    x = g.axis_nodes[1:-1]
    w = np.empty(gd.n_dofs)
    w[0::2], w[1::2] = _q(x), _dq(x)
    lap = apply_operator(gd, "lap", w).reshape(n, 3)[1:-1]
    wts = gd.weights_lap.reshape(n, 3)[1:-1]
    got = np.sqrt(np.sum(wts * lap**2))
    expected = np.sqrt((3 - 6 * g.h) ** 3 / 9)
    assert abs(got - expected) < 1e-10


def test_hermite_c1_continuity():
    n = 8
    g = build_grid(1, n)
    w = np.random.default_rng(3).standard_normal(2 * (n - 1))
    for k in range(1, n):
        xk = g.axis_nodes[k]
        for deriv in (0, 1):
            left = hermite_values(g, w, [xk], k - 1, deriv)[0]
            right = hermite_values(g, w, [xk], k, deriv)[0]
            assert abs(left - right) < 1e-12
    # clamped ends
    for e, xe in ((0, 0.0), (n - 1, 1.0)):
        for deriv in (0, 1):
            assert abs(hermite_values(g, w, [xe], e, deriv)[0]) < 1e-12


def test_apply_operator_zero_and_mismatch():
    gd = gd_for("fd1d", 8)
    for which in ("pi", "grad", "lap"):
        assert not np.any(apply_operator(gd, which, np.zeros(7)))
    with pytest.raises(ValueError):
        apply_operator(gd, "pi", np.zeros(6))
    with pytest.raises(ValueError):
        apply_operator(gd, "div", np.zeros(7))


def test_pi_locality_fd():
    gd = gd_for("fd1d", 8)
    e1 = np.zeros(7)
    e1[0] = 1
    vals = apply_operator(gd, "pi", e1).reshape(-1, 3)  # 3 Gauss points per dual cell
    assert np.count_nonzero(np.any(vals != 0, axis=1)) == 1


@pytest.mark.parametrize("scheme, dim", ALL)
def test_lap_positive_for_nonzero(scheme, dim):
    gd = gd_for(scheme, 8)
    rng = np.random.default_rng(5)
    for _ in range(10):
        w = rng.standard_normal(gd.n_dofs)
        assert l2_norm(gd, "lap", apply_operator(gd, "lap", w)) > 0


def test_l2_norm_constant_fd():
    for dim in (1, 2):
        gd = assemble_fd(build_grid(dim, 8))
        h = 1 / 8
        got = l2_norm(gd, "pi", np.ones_like(gd.weights_pi))
        assert np.isclose(got, np.sqrt((1 - h) ** dim), rtol=1e-14)
        assert l2_norm(gd, "pi", np.zeros_like(gd.weights_pi)) == 0.0
    with pytest.raises(ValueError):
        l2_norm(gd, "pi", np.ones(3))


def test_l2_error_of_nodal_samples_decreases():
    exact = catalog("no-contact-1d").exact
    errs = []
    for n in (16, 32, 64, 128):
        gd = assemble_fd(build_grid(1, n))
        w = exact.c(gd.constraint_coords)
        errs.append(l2_error(gd, "pi", w, exact.c))
    errs = np.array(errs)
    assert np.all(np.diff(errs) < 0)
    rates = np.log2(errs[:-1] / errs[1:])
    assert np.all(rates > 0.9)
    assert errs[2] < 1 / 64  # O(h) magnitude at n=64


def test_fd_laplacian_second_order_at_nodes():
    exact = catalog("no-contact-1d").exact
    errs = {}
    for n in (32, 256):
        gd = assemble_fd(build_grid(1, n))
        w = exact.c(gd.constraint_coords)
        node_vals = apply_operator(gd, "lap", w)[::3]  # one sample per dual cell
        nodes = gd.grid.nodes
        errs[n] = np.max(np.abs(node_vals - exact.lap(nodes))[1:-1])
    rate = np.log2(errs[32] / errs[256]) / 3
    assert rate >= 1.8


def test_fd2d_gradient_layout():
    gd = assemble_fd(build_grid(2, 8))
    exact = catalog("no-contact-2d").exact
    w = exact.c(gd.constraint_coords)
    # centered differences of smooth samples are close to the true gradient
    assert l2_error(gd, "grad", w, exact.grad) < 0.02
