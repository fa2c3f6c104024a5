"""Command-line front end.

Subcommands: solve, indicators, study, verify-bounds, oracle-check.

Options may also come from a flat ``key=value`` config file (``--config``)
using the long flag names (``max-iter=5000``); command-line flags win.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 invariant
violation.  Failures print one line ``error code=<c> kind=<k> reason=<json>``
on stderr.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import indicators as ind
from . import qp as qpmod
from . import study as studymod
from .mesh import build_grid
from .problems import PROBLEM_IDS, catalog
from .schemes import SCHEMES, assemble

__all__ = ["RunConfig", "UsageError", "parse_config", "run", "main"]

COMMANDS = ("solve", "indicators", "study", "verify-bounds", "oracle-check")
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    scheme: Optional[str] = None
    problem: Optional[str] = None
    n: Optional[int] = None
    levels: list = field(default_factory=list)
    solver: str = "active-set"
    omega: float = 1.5
    tol: float = 1e-10
    max_iter: Optional[int] = None
    quadrature: int = 3
    out: Optional[str] = None
    seed: int = 0
    timing: bool = True


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _levels(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad levels {text!r}") from exc


# flag name -> (dest, converter)
OPTIONS = {
    "scheme": ("scheme", str),
    "problem": ("problem", str),
    "n": ("n", int),
    "levels": ("levels", _levels),
    "solver": ("solver", str),
    "omega": ("omega", float),
    "tol": ("tol", float),
    "max-iter": ("max_iter", int),
    "quadrature": ("quadrature", int),
    "out": ("out", str),
    "seed": ("seed", int),
}


def _build_parser():
    parser = _Parser(prog="gdm-obstacle", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="key=value file with default options")
    for flag, (dest, conv) in OPTIONS.items():
        parser.add_argument("--" + flag, dest=dest, type=str, default=argparse.SUPPRESS)
    parser.add_argument("--no-timing", dest="no_timing", action="store_true", default=argparse.SUPPRESS)
    return parser


def read_config_file(path) -> dict:
    values = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            if key == "no-timing":
                values["no_timing"] = value.strip().lower() in ("1", "true", "yes")
                continue
            if key not in OPTIONS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[OPTIONS[key][0]] = value.strip()
    return values


def _convert(raw: dict) -> dict:
    out = {}
    converters = {dest: conv for dest, conv in OPTIONS.values()}
    for dest, value in raw.items():
        if dest == "no_timing":
            out["timing"] = not value
            continue
        try:
            out[dest] = converters[dest](value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value {value!r} for {dest}") from exc
    return out


def parse_config(argv, config_path=None) -> RunConfig:
    """Parse argv (and optional config file) into a validated RunConfig."""
    ns = vars(_build_parser().parse_args(list(argv)))
    command = ns.pop("command")
    path = ns.pop("config", None) or config_path
    merged = read_config_file(path) if path else {}
    merged.update(ns)
    cfg = RunConfig(command=command, **_convert(merged))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.scheme is not None and cfg.scheme not in SCHEMES:
        raise UsageError(f"unknown scheme {cfg.scheme!r}; choose from {', '.join(SCHEMES)}")
    if cfg.problem is not None and cfg.problem not in PROBLEM_IDS:
        raise UsageError(f"unknown problem {cfg.problem!r}; choose from {', '.join(PROBLEM_IDS)}")
    if cfg.solver not in qpmod.SOLVERS:
        raise UsageError(f"unknown solver {cfg.solver!r}; choose from {', '.join(qpmod.SOLVERS)}")
    if not 0 < cfg.omega < 2:
        raise UsageError("omega must lie in (0, 2)")
    if cfg.quadrature not in (3, 5):
        raise UsageError("quadrature must be 3 or 5")
    if cfg.command != "oracle-check":
        if cfg.scheme is None or cfg.problem is None:
            raise UsageError(f"{cfg.command} needs --scheme and --problem")
    dim = studymod.scheme_dim(cfg.scheme) if cfg.scheme else None
    if cfg.problem is not None and dim is not None and not catalog(cfg.problem).compatible_with(dim):
        raise UsageError(f"problem {cfg.problem} is not defined in {dim}D (scheme {cfg.scheme})")
    if cfg.command == "oracle-check" and cfg.n is None:
        cfg.n = 8
    if cfg.command == "study":
        if cfg.out is None:
            raise UsageError("study needs --out")
        if len(cfg.levels) < 2:
            raise UsageError("study needs at least two --levels (rates compare consecutive levels)")
        if any(b <= a for a, b in zip(cfg.levels, cfg.levels[1:])):
            raise UsageError("levels must be strictly increasing")
        for n in cfg.levels:
            _check_n(dim, n)
    else:
        if cfg.n is None:
            raise UsageError(f"{cfg.command} needs --n")
        _check_n(dim or 1, cfg.n)
    if cfg.command in ("verify-bounds",) and catalog(cfg.problem).exact is None:
        raise UsageError(f"verify-bounds needs a problem with an exact solution, not {cfg.problem}")
    if cfg.command == "oracle-check" and cfg.n > 16:
        raise UsageError("oracle-check is limited to n <= 16 (brute force over active sets)")


def _check_n(dim, n):
    try:
        build_grid(dim, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- commands ------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def _emit(cfg, payload):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _setup(cfg):
    gd = assemble(cfg.scheme, build_grid(studymod.scheme_dim(cfg.scheme), cfg.n), cfg.quadrature)
    return gd, catalog(cfg.problem)


def _solve(cfg, gd, problem):
    return qpmod.solve(qpmod.build_qp(gd, problem), cfg.solver, omega=cfg.omega, tol=cfg.tol,
                       max_iter=cfg.max_iter)


def cmd_solve(cfg):
    gd, problem = _setup(cfg)
    sol = _solve(cfg, gd, problem)
    _emit(cfg, {
        "scheme": cfg.scheme, "problem": cfg.problem, "n": cfg.n, "n_dofs": gd.n_dofs,
        "solver_id": sol.solver_id, "iterations": sol.iterations, "residual": sol.residual,
        "active_set": sol.active_set, "w": sol.w,
    })
    return EXIT_OK


def _report(cfg):
    gd, problem = _setup(cfg)
    sol = _solve(cfg, gd, problem)
    if problem.exact is None:
        return {"C_D": ind.compute_coercivity(gd), "S_tilde": None, "W_D": None, "R_D": None}, None
    rep = ind.verify_error_bounds(gd, problem, sol, solver=cfg.solver)
    return rep.to_dict(), rep


def cmd_indicators(cfg):
    payload, _ = _report(cfg)
    _emit(cfg, payload)
    return EXIT_OK


def cmd_verify_bounds(cfg):
    payload, rep = _report(cfg)
    payload["ok"] = rep.ok
    _emit(cfg, payload)
    if not rep.ok:
        raise InvariantViolation(f"negative theorem margin: {dict(zip(('pi', 'grad', 'lap'), rep.margins))}")
    return EXIT_OK


def cmd_study(cfg):
    result = studymod.run_study(cfg.scheme, cfg.problem, cfg.levels, solver=cfg.solver,
                                quad_order=cfg.quadrature, omega=cfg.omega, tol=cfg.tol,
                                max_iter=cfg.max_iter, timing=cfg.timing)
    studymod.write_csv(result, cfg.out)
    studymod.write_metadata(result, cfg.out + ".meta.json")
    return EXIT_OK


def oracle_check(n=8, seed=0, schemes=("fd1d", "hermite1d"), n_random=20, atol=1e-8, omega=1.5, tol=1e-10):
    """Cross-check PSOR and active-set against the oracle.

    Runs ``n_random`` seeded 12-dof instances and the 1D catalog problems at
    grid size ``n``.  Returns a list of ``(label, max deviation)``.
    """
    rng = np.random.default_rng(seed)
    cases = [(f"random[{i}]", qpmod.random_instance(rng, 12)) for i in range(n_random)]
    for scheme in schemes:
        gd = assemble(scheme, build_grid(1, n))
        for pid in ("zero", "no-contact-1d", "contact-1d"):
            cases.append((f"{scheme}/{pid}/n={n}", qpmod.build_qp(gd, catalog(pid))))
    out = []
    for label, inst in cases:
        ref = qpmod.solve_oracle(inst, tol=tol)
        dev = 0.0
        for sol in (qpmod.solve_psor(inst, omega=omega, tol=tol), qpmod.solve_active_set(inst, tol=tol)):
            dev = max(dev, float(np.max(np.abs(sol.w - ref.w))))
        out.append((label, dev))
    return out


def cmd_oracle_check(cfg):
    schemes = (cfg.scheme,) if cfg.scheme in ("fd1d", "hermite1d") else ("fd1d", "hermite1d")
    results = oracle_check(cfg.n, cfg.seed, schemes, omega=cfg.omega, tol=cfg.tol)
    worst = max(d for _, d in results)
    _emit(cfg, {"n": cfg.n, "seed": cfg.seed, "cases": dict(results), "max_deviation": worst,
                "ok": worst <= 1e-8})
    if worst > 1e-8:
        raise InvariantViolation(f"solvers disagree with the oracle by {worst:.3e}")
    return EXIT_OK


DISPATCH = {
    "solve": cmd_solve,
    "indicators": cmd_indicators,
    "study": cmd_study,
    "verify-bounds": cmd_verify_bounds,
    "oracle-check": cmd_oracle_check,
}


def _fail(code, kind, reason):
    print(f"error code={code} kind={kind} reason={json.dumps(str(reason))}", file=sys.stderr)
    return code


def run(cfg: RunConfig) -> int:
    try:
        return DISPATCH[cfg.command](cfg)
    except (qpmod.SolverError, ind.PowerIterationError, studymod.StudyError) as exc:
        return _fail(EXIT_NUMERICAL, "numerical", exc)
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, "invariant", exc)
    except (UsageError, qpmod.QpSetupError) as exc:
        return _fail(EXIT_USAGE, "usage", exc)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
