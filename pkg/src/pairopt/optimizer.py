"""Optimal comparison depths and D-optimal invariant designs.

For the full parameter vector the D-optimal invariant design lives on at
most three depths of the form ``{d, d + 1, S}``.  ``optimize_full`` therefore
enumerates every such candidate support, maximizes the concave objective
``sum_r p_r log h_r(w)`` restricted to each one, and keeps the best design
that passes the equivalence-theorem check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .closed_form import h1, h2, h3, h_matrix, log_det_objective, variance
from .design_core import DesignProblem, InvariantDesign, parameter_layout

__all__ = [
    "CertificationError",
    "KWCertificate",
    "OptimalDesignResult",
    "candidate_supports",
    "kw_certificate",
    "optimal_depth",
    "optimal_depth_first_order",
    "optimal_depth_main",
    "optimal_depth_second_order",
    "optimize_full",
    "solve_on_support",
]

log = logging.getLogger(__name__)

WEIGHT_TOL = 1e-10
KW_TOL = 1e-8
MAX_NEWTON_ITER = 100
BOUNDARY_TOL = 1e-9


def _argmax_smallest(values) -> int:
    """1-based position of the maximum, earliest on ties (exact comparison)."""
    best_d, best = None, None
    for d, val in enumerate(values, start=1):
        if best is None or val > best:
            best_d, best = d, val
    return best_d


def optimal_depth_main(problem: DesignProblem) -> int:
    return problem.S


def optimal_depth_first_order(problem: DesignProblem) -> int:
    S, v = problem.S, problem.v
    return S - 1 - (S - 2) // v


def optimal_depth_second_order(problem: DesignProblem) -> int:
    """Maximizer of ``h3`` over ``1..S``, smallest depth on exact ties."""
    return _argmax_smallest(h3(problem, d) for d in problem.depths)


def optimal_depth(problem: DesignProblem, target: str) -> int:
    """Optimal single depth for the ``main``, ``first-order`` or ``second-order`` block."""
    fn = {
        "main": optimal_depth_main,
        "first-order": optimal_depth_first_order,
        "second-order": optimal_depth_second_order,
    }.get(target)
    if fn is None:
        raise ValueError(f"unknown target {target!r}")
    return fn(problem)


@dataclass(frozen=True)
class KWCertificate:
    """Normalized variance ``V(d, xi) / p`` for ``d = 1..S`` and the verdict."""

    per_depth: tuple[float, ...]
    support: tuple[int, ...]
    tolerance: float

    @property
    def max_normalized_variance(self) -> float:
        return max(self.per_depth)

    @property
    def passed(self) -> bool:
        upper = self.max_normalized_variance <= 1 + self.tolerance
        tight = all(abs(self.per_depth[d - 1] - 1) <= self.tolerance for d in self.support)
        return upper and tight

    def __bool__(self):
        return self.passed


def kw_certificate(design: InvariantDesign, tolerance: float = KW_TOL) -> KWCertificate:
    """Equivalence-theorem check; the variance is constant on each depth orbit."""
    problem = design.problem
    p = parameter_layout(problem).p
    per_depth = tuple(float(variance(design, d) / p) for d in problem.depths)
    return KWCertificate(per_depth, tuple(d for d in design.support if d > 0), tolerance)


@dataclass(frozen=True)
class OptimalDesignResult:
    design: InvariantDesign
    objective: float
    certificate: KWCertificate
    candidates_tried: int = field(default=0, compare=False)

    @property
    def support(self) -> tuple[int, ...]:
        return self.design.support

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(float(self.design.weights[d]) for d in self.support)


class CertificationError(RuntimeError):
    """No candidate support produced a design passing the equivalence check."""

    def __init__(self, message: str, best: OptimalDesignResult | None):
        super().__init__(message)
        self.best = best


def candidate_supports(S: int) -> list[tuple[int, ...]]:
    """All supports of the form ``{d}``, ``{d, d+1}``, ``{d, S}``, ``{d, d+1, S}``."""
    out = {(d,) for d in range(1, S + 1)}
    out |= {(d, d + 1) for d in range(1, S)}
    out |= {(d, S) for d in range(1, S)}
    out |= {(d, d + 1, S) for d in range(1, S - 1)}
    return sorted(out, key=lambda c: (len(c), c))


def _objective(H: np.ndarray, p: np.ndarray, w: np.ndarray) -> float:
    h = H @ w
    if np.any(h <= 0):
        return -math.inf
    return float(p @ np.log(h))


def solve_on_support(H: np.ndarray, p: np.ndarray, tol: float = WEIGHT_TOL) -> np.ndarray | None:
    """Maximize ``sum_r p_r log (H w)_r`` over positive weights on a fixed support.

    ``H`` holds the columns ``h(d)`` of the support depths.  Damped Newton
    runs on the affine hull ``sum w = 1``; steps are shortened so the
    iterate stays strictly inside the simplex.  The result is returned only
    if the restricted optimum is interior.  ``None`` means the support is
    singular or its optimum lies on a smaller face, which shows up as a
    weight collapsing towards zero.
    """
    m = H.shape[1]
    w = np.full(m, 1.0 / m)
    f = _objective(H, p, w)
    if not math.isfinite(f):
        return None
    if m == 1:
        return w
    # reduced coordinates: w = w0 + B x with B = [I; -1]
    B = np.vstack([np.eye(m - 1), -np.ones((1, m - 1))])
    P = p.sum()
    for _ in range(MAX_NEWTON_ITER):
        h = H @ w
        g = H.T @ (p / h)  # per-depth variance V(d, w)
        if np.max(np.abs(g - P)) / P < tol:
            break
        hess = -(H.T * (p / h**2)) @ H
        gx = B.T @ g
        hx = B.T @ hess @ B
        try:
            dx = np.linalg.solve(-hx, gx)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(-hx, gx, rcond=None)[0]
        decrement = math.sqrt(max(float(gx @ dx), 0.0))
        step = 1.0 if decrement < 0.25 else 1.0 / (1.0 + decrement)
        direction = B @ dx
        shrinking = direction < 0
        if np.any(shrinking):
            step = min(step, 0.5 * float(np.min(-w[shrinking] / direction[shrinking])))
        while True:
            trial = w + step * direction
            f_trial = _objective(H, p, trial)
            if f_trial >= f - 1e-14 * abs(f) or step < 1e-12:
                break
            step *= 0.5
        if not math.isfinite(f_trial):
            return None
        w, f = trial, f_trial
        if np.min(w) < BOUNDARY_TOL:
            return None  # optimum on a smaller face
    else:
        return None
    return w


TIE_RTOL = 1e-10


def _tie_ordered(found):
    """Best objective first; within ``TIE_RTOL`` prefer fewer depths, then lexicographic."""
    found = sorted(found, key=lambda t: -t[0])
    out = []
    while found:
        top = found[0][0]
        scale = max(1.0, abs(top))
        group = [t for t in found if top - t[0] <= TIE_RTOL * scale]
        found = [t for t in found if top - t[0] > TIE_RTOL * scale]
        out.extend(sorted(group, key=lambda t: (len(t[1]), t[1])))
    return out


def optimize_full(problem: DesignProblem, tolerance: float = WEIGHT_TOL,
                  kw_tolerance: float = KW_TOL) -> OptimalDesignResult:
    """D-optimal invariant design for the full second-order parameter vector."""
    H = h_matrix(problem)
    p = np.array(parameter_layout(problem).blocks, dtype=float)
    found = []
    for support in candidate_supports(problem.S):
        cols = [d - 1 for d in support]
        w = solve_on_support(H[:, cols], p, tol=tolerance)
        if w is None:
            continue
        weights = {d: float(x) for d, x in zip(support, w) if x > tolerance}
        total = sum(weights.values())
        design = InvariantDesign(problem, {d: x / total for d, x in weights.items()})
        found.append((log_det_objective(design), support, design))
    best = None
    for obj, support, design in _tie_ordered(found):
        cert = kw_certificate(design, kw_tolerance)
        result = OptimalDesignResult(design, obj, cert, len(found))
        if best is None:
            best = result
        if cert.passed:
            return result
        log.debug("support %s: objective %.12g failed certification", support, obj)
    raise CertificationError(
        f"no candidate support passed the equivalence check for "
        f"K={problem.K}, S={problem.S}, v={problem.v}",
        best,
    )


def exact_weights(result: OptimalDesignResult, max_denominator: int = 10**6) -> InvariantDesign:
    """Rational approximation of an optimizer design, for exact re-checking."""
    approx = {d: Fraction(w).limit_denominator(max_denominator) for d, w in result.design.weights.items()}
    last = max(approx)
    approx[last] = 1 - sum(v for d, v in approx.items() if d != last)
    return InvariantDesign(result.design.problem, approx)
