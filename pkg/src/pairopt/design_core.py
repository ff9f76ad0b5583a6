"""Problem definition, parameter bookkeeping and invariant designs.

A paired-comparison problem is fixed by three integers: the number of
attributes ``K``, the profile strength ``S`` (attributes shown per
alternative) and the common number of levels ``v``.  Designs that are
invariant under level and attribute permutations are uniform on every
comparison-depth orbit, so they reduce to a probability vector over the
depths ``d = 0..S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from numbers import Rational, Real
from types import MappingProxyType
from typing import Mapping

__all__ = [
    "DepthError",
    "DepthOrbit",
    "DesignProblem",
    "InvariantDesign",
    "ParameterLayout",
    "make_uniform",
    "mix",
    "orbit_count",
    "parameter_layout",
]

WEIGHT_SUM_TOL = 1e-12


class DepthError(ValueError):
    """A comparison depth lies outside the admissible range."""


@dataclass(frozen=True)
class DesignProblem:
    """Attributes ``K``, profile strength ``S`` and levels ``v``.

    Second-order interactions are only identifiable for ``S >= 3``; pass
    ``second_order=False`` to build the degenerate small problems (e.g. the
    one-attribute layout) used for sanity checks of the coding and the
    enumeration.
    """

    K: int
    S: int
    v: int
    second_order: bool = field(default=True, compare=False)

    def __post_init__(self):
        for name in ("K", "S", "v"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} must be an int, got {value!r}")
        if self.v < 2:
            raise ValueError(f"need v >= 2 levels, got v={self.v}")
        if not 1 <= self.S <= self.K:
            raise ValueError(f"need 1 <= S <= K, got S={self.S}, K={self.K}")
        if self.second_order and self.S < 3:
            raise ValueError(
                f"profile strength S={self.S} cannot identify three-attribute "
                "interactions; need S >= 3"
            )

    @property
    def depths(self) -> range:
        """Informative comparison depths ``1..S``."""
        return range(1, self.S + 1)

    def check_depth(self, d: int, *, allow_zero: bool = True) -> int:
        lo = 0 if allow_zero else 1
        if isinstance(d, bool) or not isinstance(d, int) or not lo <= d <= self.S:
            raise DepthError(f"depth must be an integer in [{lo}, {self.S}], got {d!r}")
        return d


@dataclass(frozen=True)
class ParameterLayout:
    """Dimensions of the main-effect, two- and three-attribute blocks."""

    p1: int
    p2: int
    p3: int

    @property
    def p(self) -> int:
        return self.p1 + self.p2 + self.p3

    @property
    def blocks(self) -> tuple[int, int, int]:
        return (self.p1, self.p2, self.p3)


def parameter_layout(problem: DesignProblem) -> ParameterLayout:
    K, v = problem.K, problem.v
    return ParameterLayout(
        p1=K * (v - 1),
        p2=comb(K, 2) * (v - 1) ** 2,
        p3=comb(K, 3) * (v - 1) ** 3,
    )


def orbit_count(problem: DesignProblem, d: int) -> int:
    """Number of ordered pairs in the orbit of comparison depth ``d``."""
    problem.check_depth(d)
    K, S, v = problem.K, problem.S, problem.v
    return comb(K, S) * comb(S, d) * v**S * (v - 1) ** d


@dataclass(frozen=True)
class DepthOrbit:
    problem: DesignProblem
    d: int

    def __post_init__(self):
        self.problem.check_depth(self.d)

    @property
    def count(self) -> int:
        return orbit_count(self.problem, self.d)


def _is_exact(w) -> bool:
    return isinstance(w, Rational)


@dataclass(frozen=True, eq=False)
class InvariantDesign:
    """Mixture ``sum_d w_d * xi_d`` of the uniform designs on depth orbits.

    Weights are kept exactly (``Fraction``) when every supplied weight is
    rational, otherwise they are stored as floats.  Depths with zero weight
    are dropped.
    """

    problem: DesignProblem
    weights: Mapping[int, Real]

    def __post_init__(self):
        raw = dict(self.weights)
        if not raw:
            raise ValueError("a design needs at least one depth")
        exact = all(_is_exact(w) for w in raw.values())
        cleaned = {}
        for d in sorted(raw):
            self.problem.check_depth(d)
            w = Fraction(raw[d]) if exact else float(raw[d])
            if w < 0:
                raise ValueError(f"negative weight {w} at depth {d}")
            if w != 0:
                cleaned[d] = w
        total = sum(cleaned.values())
        if exact:
            if total != 1:
                raise ValueError(f"weights sum to {total}, not 1")
        elif abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", MappingProxyType(cleaned))

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights.values())

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.weights)

    def weight(self, d: int) -> Real:
        return self.weights.get(d, Fraction(0) if self.exact else 0.0)

    def as_float(self) -> "InvariantDesign":
        return InvariantDesign(self.problem, {d: float(w) for d, w in self.weights.items()})

    def __eq__(self, other):
        if not isinstance(other, InvariantDesign):
            return NotImplemented
        return self.problem == other.problem and dict(self.weights) == dict(other.weights)

    def __hash__(self):
        return hash((self.problem, tuple(self.weights.items())))

    def __repr__(self):
        body = ", ".join(f"{d}: {w}" for d, w in self.weights.items())
        return f"InvariantDesign(K={self.problem.K}, S={self.problem.S}, v={self.problem.v}, {{{body}}})"


def make_uniform(problem: DesignProblem, d: int) -> InvariantDesign:
    """Uniform design on the orbit of depth ``d``; depth 0 carries no information."""
    problem.check_depth(d, allow_zero=False)
    return InvariantDesign(problem, {d: Fraction(1)})


def mix(components) -> InvariantDesign:
    """Convex combination of invariant designs given as ``[(weight, design), ...]``."""
    pairs = list(components)
    if not pairs:
        raise ValueError("nothing to mix")
    problem = pairs[0][1].problem
    out: dict[int, Real] = {}
    for a, design in pairs:
        if design.problem != problem:
            raise ValueError("cannot mix designs of different problems")
        for d, w in design.weights.items():
            out[d] = out.get(d, 0) + a * w
    return InvariantDesign(problem, out)
