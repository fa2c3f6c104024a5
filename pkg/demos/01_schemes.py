# The three discretisations: what the operators look like and how big they are.
import numpy as np

from gdm_obstacle import apply_operator, assemble, build_grid, l2_norm

# Finite differences in 1D: interior node values are the unknowns.
gd = assemble("fd1d", build_grid(1, 8))
print("fd1d n=8 dofs:", gd.n_dofs)

# The Laplacian Gram matrix reproduces the classical clamped-beam stencil,
# scaled by h^3: rows (7, -4, 1) next to the wall, (1, -4, 6, -4, 1) inside.
A = gd.stiffness.toarray() * gd.grid.h**3
print("first rows of h^3 A:")
print(np.round(A[:3, :5], 12))

# Cubic Hermite elements carry (value, slope) at every interior node.
gh = assemble("hermite1d", build_grid(1, 8))
print("hermite1d n=8 dofs:", gh.n_dofs, "(value dofs constrained:", len(gh.constraint_dofs), ")")

# Every scheme defines a norm through its Laplacian reconstruction.
rng = np.random.default_rng(0)
for scheme, dim in (("fd1d", 1), ("fd2d", 2), ("hermite1d", 1)):
    g = assemble(scheme, build_grid(dim, 8))
    w = rng.standard_normal(g.n_dofs)
    print(f"{scheme:10s} |Lap_D w| = {l2_norm(g, 'lap', apply_operator(g, 'lap', w)):.4e}"
          f"   smallest eigenvalue of A = {np.linalg.eigvalsh(g.stiffness.toarray()).min():.3e}")
