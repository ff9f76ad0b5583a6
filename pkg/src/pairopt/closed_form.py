"""Closed-form information and variance quantities for invariant designs.

The information matrix of an invariant design is block diagonal:
``h1 * (I_K (x) M)`` for main effects, ``h2 * (I_C(K,2) (x) M (x) M)`` for the
two-attribute interactions and ``h3 * (I_C(K,3) (x) M (x) M (x) M)`` for the
three-attribute interactions, with ``M`` the one-way brick.  Everything
below is evaluated exactly (``Fraction``) for exact designs and in floating
point otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .design_core import DesignProblem, InvariantDesign, parameter_layout
from .rational import RationalMatrix

__all__ = [
    "InfoSummary",
    "OneWayBrick",
    "SingularDesignError",
    "h1",
    "h2",
    "h3",
    "h_matrix",
    "info_summary",
    "lambda_poly",
    "log_det_objective",
    "one_way_brick",
    "variance",
    "variance_single_depth",
]


class SingularDesignError(ArithmeticError):
    """The design's information matrix is singular."""


@dataclass(frozen=True)
class OneWayBrick:
    v: int
    matrix: RationalMatrix
    inverse: RationalMatrix


@lru_cache(maxsize=None)
def one_way_brick(v: int) -> OneWayBrick:
    q = v - 1
    ones = RationalMatrix([[1] * q for _ in range(q)])
    eye = RationalMatrix.identity(q)
    M = Fraction(2, q) * (eye + ones)
    Minv = Fraction(q, 2) * (eye - Fraction(1, v) * ones)
    return OneWayBrick(v, M, Minv)


def lambda_poly(S: int, v: int, d: int) -> int:
    """Cubic-part polynomial shared by ``h3`` and the variance function."""
    return (3 * S * S + 3 * S * S * v * v - 6 * S * S * v - 3 * S * d * v * v + 3 * S * d * v
            - 6 * S * v * v + 15 * S * v - 9 * S + d * d * v * v + 3 * d * v * v - 6 * d * v
            + 2 * v * v - 6 * v + 6)


def _first_order_factor(S: int, v: int, d: int) -> int:
    return 2 * S * v - 2 * S - d * v - v + 2


def h1(problem: DesignProblem, d: int) -> Fraction:
    problem.check_depth(d)
    return Fraction(d, problem.K)


def h2(problem: DesignProblem, d: int) -> Fraction:
    problem.check_depth(d)
    K, S, v = problem.K, problem.S, problem.v
    return Fraction(d * _first_order_factor(S, v, d), 2 * v * K * (K - 1))


def h3(problem: DesignProblem, d: int) -> Fraction:
    problem.check_depth(d)
    K, S, v = problem.K, problem.S, problem.v
    return Fraction(d * lambda_poly(S, v, d), 4 * v * v * K * (K - 1) * (K - 2))


H_FUNCTIONS = (h1, h2, h3)


def h_matrix(problem: DesignProblem) -> np.ndarray:
    """Float array of shape ``(3, S)``; column ``d - 1`` holds ``h_r(d)``."""
    return np.array([[float(h(problem, d)) for d in problem.depths] for h in H_FUNCTIONS])


@dataclass(frozen=True)
class InfoSummary:
    h1: float | Fraction
    h2: float | Fraction
    h3: float | Fraction

    def as_tuple(self):
        return (self.h1, self.h2, self.h3)

    @property
    def nonsingular(self) -> bool:
        return self.h1 > 0 and self.h2 > 0 and self.h3 > 0


def info_summary(design: InvariantDesign) -> InfoSummary:
    problem = design.problem
    vals = []
    for h in H_FUNCTIONS:
        if design.exact:
            vals.append(sum((w * h(problem, d) for d, w in design.weights.items()), Fraction(0)))
        else:
            vals.append(float(sum(w * float(h(problem, d)) for d, w in design.weights.items())))
    return InfoSummary(*vals)


def _require_nonsingular(info: InfoSummary):
    if not info.nonsingular:
        raise SingularDesignError(
            f"information matrix is singular (h1, h2, h3) = {info.as_tuple()}"
        )


def variance(design: InvariantDesign, d: int) -> float | Fraction:
    """Variance function of the design on the orbit of comparison depth ``d``."""
    problem = design.problem
    problem.check_depth(d)
    info = info_summary(design)
    _require_nonsingular(info)
    S, v = problem.S, problem.v
    one = Fraction(1) if design.exact else 1.0
    a, b, c = info.as_tuple()
    return d * (v - 1) * (
        one / a
        + one * (v - 1) * _first_order_factor(S, v, d) / (4 * v * b)
        + one * (v - 1) ** 2 * lambda_poly(S, v, d) / (24 * v * v * c)
    )


def variance_single_depth(problem: DesignProblem, d: int, d_prime: int,
                          exact: bool = True) -> float | Fraction:
    """Variance at depth ``d`` of the uniform design on depth ``d_prime``."""
    problem.check_depth(d)
    problem.check_depth(d_prime, allow_zero=False)
    S, v = problem.S, problem.v
    g_den = _first_order_factor(S, v, d_prime)
    l_den = lambda_poly(S, v, d_prime)
    if g_den == 0 or l_den == 0:
        raise SingularDesignError(f"uniform design on depth {d_prime} is singular")
    lay = parameter_layout(problem)
    one = Fraction(1) if exact else 1.0
    return one * d / d_prime * (
        lay.p1
        + one * lay.p2 * _first_order_factor(S, v, d) / g_den
        + one * lay.p3 * lambda_poly(S, v, d) / l_den
    )


def log_det_objective(design: InvariantDesign) -> float:
    """``p1 log h1 + p2 log h2 + p3 log h3``; ``-inf`` for singular designs.

    Differs from ``log det M`` by a constant that does not depend on the
    weights.
    """
    info = info_summary(design)
    if not info.nonsingular:
        return -math.inf
    lay = parameter_layout(design.problem)
    return sum(p * math.log(h) for p, h in zip(lay.blocks, info.as_tuple()))


def block_multiplicities(problem: DesignProblem) -> tuple[int, int, int]:
    """Number of attribute singletons, pairs and triples."""
    K = problem.K
    return (K, comb(K, 2), comb(K, 3))
