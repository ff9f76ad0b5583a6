"""Effects coding, regression vectors and enumeration of the design region.

Profiles are integer level vectors of length ``K`` with entries in
``{0, 1, .., v}``; level 0 marks an attribute that is not shown.  Regression
vectors are laid out as the main-effect block (attribute order), the
two-attribute block (``k < l`` lexicographic) and the three-attribute block
(``k < l < m`` lexicographic), each cell a row-major Kronecker product of
the marginal codes.  All coordinates are small integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from .design_core import DesignProblem, parameter_layout

__all__ = [
    "PairedComparison",
    "Profile",
    "difference_vector",
    "enumerate_orbit",
    "marginal_code",
    "regression_vector",
    "regression_matrix",
]


def marginal_code(level: int, v: int) -> np.ndarray:
    """Effects code of one attribute level as an integer vector of length ``v - 1``.

    >>> marginal_code(2, 3).tolist(), marginal_code(3, 3).tolist(), marginal_code(0, 3).tolist()
    ([0, 1], [-1, -1], [0, 0])
    """
    if not 0 <= level <= v:
        raise ValueError(f"level must lie in [0, {v}], got {level}")
    code = np.zeros(v - 1, dtype=np.int64)
    if level == v:
        code[:] = -1
    elif level > 0:
        code[level - 1] = 1
    return code


@dataclass(frozen=True)
class Profile:
    """One alternative; ``levels[k] == 0`` means attribute ``k`` is absent."""

    levels: tuple[int, ...]

    def __init__(self, levels: Sequence[int]):
        object.__setattr__(self, "levels", tuple(int(x) for x in levels))

    @property
    def shown(self) -> tuple[int, ...]:
        return tuple(k for k, x in enumerate(self.levels) if x != 0)

    def validate(self, problem: DesignProblem) -> "Profile":
        if len(self.levels) != problem.K:
            raise ValueError(f"profile has {len(self.levels)} attributes, expected {problem.K}")
        if any(not 0 <= x <= problem.v for x in self.levels):
            raise ValueError(f"levels must lie in [0, {problem.v}]: {self.levels}")
        if len(self.shown) != problem.S:
            raise ValueError(
                f"profile shows {len(self.shown)} attributes, profile strength is {problem.S}"
            )
        return self


@dataclass(frozen=True)
class PairedComparison:
    first: Profile
    second: Profile

    @classmethod
    def of(cls, first: Sequence[int], second: Sequence[int]) -> "PairedComparison":
        return cls(Profile(first), Profile(second))

    @property
    def depth(self) -> int:
        return sum(a != b for a, b in zip(self.first.levels, self.second.levels))

    @property
    def attribute_subset(self) -> tuple[int, ...]:
        return self.first.shown

    def swapped(self) -> "PairedComparison":
        return PairedComparison(self.second, self.first)

    def validate(self, problem: DesignProblem) -> "PairedComparison":
        self.first.validate(problem)
        self.second.validate(problem)
        if self.first.shown != self.second.shown:
            raise ValueError(
                "both alternatives must show the same attributes: "
                f"{self.first.shown} vs {self.second.shown}"
            )
        return self


def _codes(levels: Sequence[int], v: int) -> list[np.ndarray]:
    return [marginal_code(x, v) for x in levels]


def regression_vector(profile: Profile | Sequence[int], problem: DesignProblem) -> np.ndarray:
    """Full second-order regression vector of a single profile."""
    levels = profile.levels if isinstance(profile, Profile) else tuple(profile)
    v = problem.v
    layout = parameter_layout(problem)
    codes = _codes(levels, v)
    K = len(levels)
    parts = list(codes)
    parts += [np.kron(codes[k], codes[l]) for k, l in combinations(range(K), 2)]
    parts += [np.kron(np.kron(codes[k], codes[l]), codes[m])
              for k, l, m in combinations(range(K), 3)]
    f = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    if f.shape[0] != layout.p:
        raise ValueError(f"regression vector has length {f.shape[0]}, layout expects {layout.p}")
    return f


def difference_vector(pair: PairedComparison, problem: DesignProblem) -> np.ndarray:
    """``f(first) - f(second)``; rejects pairs showing different attribute subsets."""
    if pair.first.shown != pair.second.shown:
        raise ValueError(
            "both alternatives must show the same attributes: "
            f"{pair.first.shown} vs {pair.second.shown}"
        )
    return regression_vector(pair.first, problem) - regression_vector(pair.second, problem)


def enumerate_orbit(problem: DesignProblem, d: int) -> Iterator[PairedComparison]:
    """Yield every ordered pair of comparison depth ``d`` exactly once.

    Order: attribute subset, first-alternative levels, differing attributes,
    then the second alternative's levels on those attributes, each
    lexicographic.
    """
    problem.check_depth(d)
    K, S, v = problem.K, problem.S, problem.v
    levels = range(1, v + 1)
    for subset in combinations(range(K), S):
        for first in product(levels, repeat=S):
            for diff in combinations(range(S), d):
                choices = [[x for x in levels if x != first[i]] for i in diff]
                for alt in product(*choices):
                    second = list(first)
                    for i, x in zip(diff, alt):
                        second[i] = x
                    a = [0] * K
                    b = [0] * K
                    for pos, k in enumerate(subset):
                        a[k] = first[pos]
                        b[k] = second[pos]
                    yield PairedComparison(Profile(a), Profile(b))


def regression_matrix(profiles: np.ndarray, v: int) -> np.ndarray:
    """Vectorized regression vectors for an ``(n, K)`` integer array of level codes."""
    profiles = np.asarray(profiles, dtype=np.int64)
    if profiles.ndim != 2:
        raise ValueError("profiles must be a 2-d array of level codes")
    if profiles.size and (profiles.min() < 0 or profiles.max() > v):
        raise ValueError(f"levels must lie in [0, {v}]")
    n, K = profiles.shape
    table = np.stack([marginal_code(x, v) for x in range(v + 1)])
    codes = table[profiles]  # (n, K, v-1)
    q = v - 1
    blocks = [codes.reshape(n, K * q)]
    for k, l in combinations(range(K), 2):
        blocks.append(np.einsum("na,nb->nab", codes[:, k], codes[:, l]).reshape(n, q * q))
    for k, l, m in combinations(range(K), 3):
        blocks.append(
            np.einsum("na,nb,nc->nabc", codes[:, k], codes[:, l], codes[:, m]).reshape(n, q**3)
        )
    return np.concatenate(blocks, axis=1)
