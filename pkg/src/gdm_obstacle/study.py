"""Mesh-refinement studies: solve on a ladder of grids, measure errors and
indicators, and report observed convergence rates between consecutive levels.

Problems without a closed-form solution are measured against a reference
solve on twice the finest grid, injected onto each coarser grid at the nodes
(grids in a study are nested).
"""

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import indicators as ind
from . import qp as qpmod
from .mesh import build_grid
from .problems import catalog
from .schemes import apply_operator, assemble, l2_norm

__all__ = [
    "COLUMNS",
    "StudyResult",
    "StudyError",
    "observed_rate",
    "restrict",
    "run_study",
    "scheme_dim",
    "write_csv",
    "write_metadata",
]

COLUMNS = (
    "n", "h", "n_dofs",
    "e_pi", "e_grad", "e_lap",
    "rate_pi", "rate_grad", "rate_lap",
    "S_tilde", "W_D", "C_D", "R_D",
    "margin_pi", "margin_grad", "margin_lap",
    "iterations", "wall_time",
)

NAN = float("nan")


class StudyError(RuntimeError):
    """A level failed; ``partial`` carries the rows finished before it."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass
class StudyResult:
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)


def observed_rate(e_coarse, e_fine) -> float:
    """``log2(e_coarse / e_fine)`` for one halving of h; NaN unless both are > 0."""
    try:
        if e_coarse > 0 and e_fine > 0 and math.isfinite(e_coarse) and math.isfinite(e_fine):
            return math.log2(e_coarse / e_fine)
    except TypeError:
        pass
    return NAN


def scheme_dim(scheme: str) -> int:
    return 2 if scheme == "fd2d" else 1


def restrict(gd_fine, gd_coarse, w_fine) -> np.ndarray:
    """Inject fine-grid coefficients onto the nodes of a nested coarse grid."""
    nf, nc = gd_fine.grid.n, gd_coarse.grid.n
    if nf % nc:
        raise ValueError(f"grid n={nc} is not nested in n={nf}")
    r = nf // nc
    k = np.arange(1, nc)  # coarse interior node indices along an axis
    if gd_coarse.scheme == "hermite1d":
        idx = np.empty(2 * (nc - 1), dtype=int)
        idx[0::2] = 2 * (r * k - 1)
        idx[1::2] = 2 * (r * k - 1) + 1
        return w_fine[idx]
    fine_axis = r * k - 1
    if gd_coarse.dim == 1:
        return w_fine[fine_axis]
    J, I = np.meshgrid(fine_axis, fine_axis, indexing="ij")
    return w_fine[(J * (nf - 1) + I).ravel()]


def _errors_vs_reference(gd, w, w_ref):
    d = w - w_ref
    return tuple(l2_norm(gd, which, apply_operator(gd, which, d)) for which in ("pi", "grad", "lap"))


def run_study(scheme, problem_id, levels, solver="active-set", quad_order=3,
              omega=1.5, tol=1e-10, max_iter=None, timing=True) -> StudyResult:
    levels = [int(n) for n in levels]
    if len(levels) < 2:
        raise ValueError("a study needs at least two levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    dim = scheme_dim(scheme)
    for n in levels:
        build_grid(dim, n)
    problem = catalog(problem_id)
    if not problem.compatible_with(dim):
        raise ValueError(f"problem {problem_id!r} does not match scheme {scheme!r}")
    exact = problem.exact

    def solve(gd):
        return qpmod.solve(qpmod.build_qp(gd, problem), solver, omega=omega, tol=tol, max_iter=max_iter)

    meta = {
        "scheme": scheme,
        "problem": problem_id,
        "solver": solver,
        "quadrature_order": quad_order,
        "levels": levels,
        "partial": False,
    }
    ref = None
    if exact is None:
        n_ref = 2 * levels[-1]
        if any(n_ref % n for n in levels):
            raise ValueError("levels must divide the reference level 2 * max(levels)")
        gd_ref = assemble(scheme, build_grid(dim, n_ref), quad_order)
        ref = (gd_ref, solve(gd_ref).w)
        meta["reference"] = (f"no exact solution; errors are discrete norms against a reference solve "
                             f"at n={n_ref} injected onto each level's nodes")
    else:
        meta["reference"] = "exact solution"

    rows = []
    result = StudyResult(rows, meta)
    for n in levels:
        t0 = time.perf_counter()
        gd = assemble(scheme, build_grid(dim, n), quad_order)
        try:
            sol = solve(gd)
            row = dict(n=n, h=gd.grid.h, n_dofs=gd.n_dofs, iterations=sol.iterations)
            if exact is not None:
                rep = ind.verify_error_bounds(gd, problem, sol, solver=solver)
                e = rep.errors
                row.update(S_tilde=rep.S_tilde, W_D=rep.W_D, C_D=rep.C_D, R_D=rep.R_D,
                           margin_pi=rep.margins[0], margin_grad=rep.margins[1],
                           margin_lap=rep.margins[2])
            else:
                e = _errors_vs_reference(gd, sol.w, restrict(ref[0], gd, ref[1]))
                row.update(S_tilde=NAN, W_D=NAN, C_D=ind.compute_coercivity(gd), R_D=NAN,
                           margin_pi=NAN, margin_grad=NAN, margin_lap=NAN)
        except (qpmod.SolverError, ind.PowerIterationError) as exc:
            meta["partial"] = True
            raise StudyError(f"level n={n} failed: {exc}", result) from exc
        row.update(e_pi=e[0], e_grad=e[1], e_lap=e[2])
        row["wall_time"] = time.perf_counter() - t0 if timing else NAN
        rows.append(row)

    for prev, row in zip([None] + rows[:-1], rows):
        for key in ("pi", "grad", "lap"):
            row["rate_" + key] = NAN if prev is None else observed_rate(prev["e_" + key], row["e_" + key])
    return result


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(result: StudyResult, path) -> None:
    """One row per level in ``COLUMNS`` order; floats in shortest round-trip form."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in result.rows:
            writer.writerow([_fmt(row[c]) for c in COLUMNS])


def write_metadata(result: StudyResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
