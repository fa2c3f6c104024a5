# Coercivity, consistency, limit-conformity and the a-priori error bounds.
from gdm_obstacle import assemble, build_grid, build_qp, catalog, solve_active_set, verify_error_bounds

problem = catalog("no-contact-1d")  # exact solution (x(1-x))^2, f = 24

print(f"{'scheme':10s} {'n':>4s} {'C_D':>8s} {'S_tilde':>10s} {'W_D':>10s}"
      f" {'e_lap':>10s} {'rhs_lap':>10s} {'e_pi':>10s} {'rhs_pi':>10s}")
for scheme in ("fd1d", "hermite1d"):
    for n in (16, 32, 64):
        gd = assemble(scheme, build_grid(1, n))
        sol = solve_active_set(build_qp(gd, problem))
        rep = verify_error_bounds(gd, problem, sol)
        print(f"{scheme:10s} {n:4d} {rep.C_D:8.4f} {rep.S_tilde:10.3e} {rep.W_D:10.3e}"
              f" {rep.errors[2]:10.3e} {rep.rhs[2]:10.3e} {rep.errors[0]:10.3e} {rep.rhs[0]:10.3e}")

# The Hermite scheme is conforming, so its limit-conformity defect is at round-off,
# while the finite-difference defect shrinks with h.
