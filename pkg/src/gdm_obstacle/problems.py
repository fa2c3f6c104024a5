"""Catalog of clamped-plate obstacle problems.

Fields are callables taking a ``(m, d)`` coordinate array.  Scalars return
shape ``(m,)``; gradients return ``(m, d)``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = ["ExactBundle", "ObstacleProblem", "catalog", "multiplier_field", "PROBLEM_IDS"]

PROBLEM_IDS = ("zero", "no-contact-1d", "contact-1d", "no-contact-2d", "contact-2d")

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ExactBundle:
    c: Field
    grad: Field
    lap: Field
    bilap: Field


@dataclass(frozen=True)
class ObstacleProblem:
    id: str
    f: Field
    psi: Field
    exact: Optional[ExactBundle] = None
    dim: Optional[int] = None  # None: usable in any dimension

    def compatible_with(self, dim: int) -> bool:
        return self.dim is None or self.dim == dim


def _const(value):
    def field(x):
        return np.full(np.shape(x)[0], float(value))

    return field


# X(s) = (s(1-s))^2 and its derivatives
def _X(s):
    return (s * (1 - s)) ** 2


def _dX(s):
    return 2 * s - 6 * s**2 + 4 * s**3


def _d2X(s):
    return 2 - 12 * s + 12 * s**2


def _zero_bundle():
    def vec(x):
        return np.zeros(np.shape(x))

    z = _const(0.0)
    return ExactBundle(c=z, grad=vec, lap=z, bilap=z)


def _beam_bundle():
    return ExactBundle(
        c=lambda x: _X(x[:, 0]),
        grad=lambda x: _dX(x[:, 0])[:, None],
        lap=lambda x: _d2X(x[:, 0]),
        bilap=_const(24.0),
    )


def _plate_bilap(x):
    X, Y = x[:, 0], x[:, 1]
    return 24 * _X(Y) + 2 * _d2X(X) * _d2X(Y) + 24 * _X(X)


def _plate_bundle():
    return ExactBundle(
        c=lambda x: _X(x[:, 0]) * _X(x[:, 1]),
        grad=lambda x: np.column_stack([_dX(x[:, 0]) * _X(x[:, 1]), _X(x[:, 0]) * _dX(x[:, 1])]),
        lap=lambda x: _d2X(x[:, 0]) * _X(x[:, 1]) + _X(x[:, 0]) * _d2X(x[:, 1]),
        bilap=_plate_bilap,
    )


def catalog(problem_id: str) -> ObstacleProblem:
    if problem_id == "zero":
        return ObstacleProblem("zero", f=_const(0.0), psi=_const(0.1), exact=_zero_bundle())
    if problem_id == "no-contact-1d":
        return ObstacleProblem("no-contact-1d", f=_const(24.0), psi=_const(1.0),
                               exact=_beam_bundle(), dim=1)
    if problem_id == "contact-1d":
        return ObstacleProblem("contact-1d", f=_const(200.0), psi=_const(0.005), dim=1)
    if problem_id == "no-contact-2d":
        return ObstacleProblem("no-contact-2d", f=_plate_bilap, psi=_const(1.0),
                               exact=_plate_bundle(), dim=2)
    if problem_id == "contact-2d":
        return ObstacleProblem("contact-2d", f=_const(500.0), psi=_const(0.002), dim=2)
    raise ValueError(f"unknown problem id {problem_id!r}; choose from {PROBLEM_IDS}")


def multiplier_field(problem: ObstacleProblem) -> Field:
    """Continuous contact multiplier ``f - bilap(c)``, nonnegative a.e."""
    if problem.exact is None:
        raise ValueError(f"problem {problem.id!r} has no exact solution bundle")
    f, bilap = problem.f, problem.exact.bilap

    def lam(x):
        return f(x) - bilap(x)

    return lam
