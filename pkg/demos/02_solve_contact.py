# Solve the 1D contact problem with all three QP solvers and look at the contact zone.
import numpy as np

from gdm_obstacle import assemble, build_grid, build_qp, catalog, solve_active_set, solve_oracle, solve_psor

problem = catalog("contact-1d")  # f = 200 pushes the beam into the obstacle psi = 0.005

gd = assemble("fd1d", build_grid(1, 12))
qp = build_qp(gd, problem)
sols = {s.solver_id: s for s in (solve_psor(qp), solve_active_set(qp), solve_oracle(qp))}
for name, s in sols.items():
    print(f"{name:10s} iterations={s.iterations:6d} residual={s.residual:.2e} active={s.active_set.tolist()}")
dev = max(np.abs(s.w - sols["oracle"].w).max() for s in sols.values())
print("max deviation from the brute-force oracle:", dev)

# On a finer grid only the active-set solver is practical.
gd = assemble("fd1d", build_grid(1, 256))
sol = solve_active_set(build_qp(gd, problem))
x = gd.constraint_coords[sol.active_set, 0]
print(f"n=256: contact on [{x.min():.4f}, {x.max():.4f}], {sol.active_set.size} nodes,"
      f" {sol.iterations} active-set iterations")
