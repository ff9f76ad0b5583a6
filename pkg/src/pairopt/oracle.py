"""Brute-force verification of the closed forms by explicit enumeration.

Every check here builds information matrices and quadratic forms directly
from difference vectors of enumerated pairs, in exact integer or rational
arithmetic, and compares them with :mod:`pairopt.closed_form`.  Per-orbit
sums of outer products are accumulated as integer Gram matrices (exact in
int64 for the sizes allowed by the cap) and only then scaled by the
rational weights ``w_d / N_d``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

from .closed_form import (
    InfoSummary,
    h1,
    h2,
    h3,
    info_summary,
    one_way_brick,
    variance,
)
from .design_core import (
    DesignProblem,
    InvariantDesign,
    make_uniform,
    orbit_count,
    parameter_layout,
)
from .effects import enumerate_orbit, marginal_code, regression_matrix
from .rational import RationalMatrix

__all__ = [
    "CapExceeded",
    "Report",
    "check_appendix_sums",
    "check_lemma1",
    "check_triple_multiplicities",
    "check_variance_elements",
    "check_variance_function",
    "default_cap",
    "enumerate_info_matrix",
    "explicit_info_matrix",
    "predicted_info_matrix",
]

DEFAULT_CAP = 10**7
CHUNK = 4096


def default_cap() -> int:
    """Enumeration cap; ``PAIROPT_CAP`` in the environment overrides the default."""
    raw = os.environ.get("PAIROPT_CAP")
    return int(raw) if raw else DEFAULT_CAP


class CapExceeded(RuntimeError):
    def __init__(self, pairs: int, cap: int):
        super().__init__(f"enumeration needs {pairs} pairs, cap is {cap}")
        self.pairs = pairs
        self.cap = cap


@dataclass
class Report:
    name: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}" + (f": {self.detail}" if self.detail else "")


def _guard(pairs: int, cap: int | None):
    cap = default_cap() if cap is None else cap
    if pairs > cap:
        raise CapExceeded(pairs, cap)


def _orbit_arrays(problem: DesignProblem, d: int) -> Iterable[tuple[np.ndarray, np.ndarray]]:
    """Chunks of ``(first, second)`` level arrays for the orbit of depth ``d``."""
    firsts, seconds = [], []
    for pair in enumerate_orbit(problem, d):
        firsts.append(pair.first.levels)
        seconds.append(pair.second.levels)
        if len(firsts) == CHUNK:
            yield np.array(firsts), np.array(seconds)
            firsts, seconds = [], []
    if firsts:
        yield np.array(firsts), np.array(seconds)


@lru_cache(maxsize=64)
def _orbit_gram_cached(K: int, S: int, v: int, d: int) -> tuple[int, np.ndarray]:
    problem = DesignProblem(K, S, v, second_order=False)
    p = parameter_layout(problem).p
    gram = np.zeros((p, p), dtype=np.int64)
    n = 0
    for first, second in _orbit_arrays(problem, d):
        D = regression_matrix(first, v) - regression_matrix(second, v)
        gram += D.T @ D
        n += len(first)
    gram.setflags(write=False)
    return n, gram


def orbit_gram(problem: DesignProblem, d: int) -> np.ndarray:
    """Integer ``sum (f(i) - f(j)) (f(i) - f(j))^T`` over the orbit of depth ``d``."""
    n, gram = _orbit_gram_cached(problem.K, problem.S, problem.v, d)
    if n != orbit_count(problem, d):
        raise AssertionError(f"enumerated {n} pairs at depth {d}, expected {orbit_count(problem, d)}")
    return gram


def _rational_from_grams(terms: Sequence[tuple[Fraction, np.ndarray]], p: int) -> RationalMatrix:
    acc = [[Fraction(0)] * p for _ in range(p)]
    for scale, gram in terms:
        if scale == 0:
            continue
        g = gram.tolist()
        for i in range(p):
            row, grow = acc[i], g[i]
            for j in range(p):
                if grow[j]:
                    row[j] += scale * grow[j]
    return RationalMatrix(acc)


def enumerate_info_matrix(problem: DesignProblem, design: InvariantDesign,
                          cap: int | None = None) -> RationalMatrix:
    """Exact information matrix of an invariant design by full enumeration."""
    return _invariant_matrix(problem, design.weights, cap)


def _invariant_matrix(problem: DesignProblem, weights: Mapping[int, float | Fraction],
                      cap: int | None) -> RationalMatrix:
    weights = {d: Fraction(w) for d, w in weights.items()}
    _guard(sum(orbit_count(problem, d) for d in weights), cap)
    p = parameter_layout(problem).p
    terms = [(w / orbit_count(problem, d), orbit_gram(problem, d)) for d, w in weights.items()]
    return _rational_from_grams(terms, p)


def explicit_info_matrix(problem: DesignProblem, rows: Iterable[tuple[Sequence[int], Sequence[int], Fraction]],
                         ) -> RationalMatrix:
    """Exact information matrix of an explicit (not necessarily invariant) design.

    ``rows`` yields ``(first_levels, second_levels, weight)``.  Pairs sharing a
    weight are accumulated together as integer Gram matrices.
    """
    p = parameter_layout(problem).p
    by_weight: dict[Fraction, list] = {}
    for first, second, w in rows:
        by_weight.setdefault(Fraction(w), []).append((tuple(first), tuple(second)))
    terms = []
    for w, pairs in by_weight.items():
        gram = np.zeros((p, p), dtype=np.int64)
        for start in range(0, len(pairs), CHUNK):
            chunk = pairs[start:start + CHUNK]
            a = np.array([x for x, _ in chunk])
            b = np.array([y for _, y in chunk])
            D = regression_matrix(a, problem.v) - regression_matrix(b, problem.v)
            gram += D.T @ D
        terms.append((w, gram))
    return _rational_from_grams(terms, p)


def _kron_power(m: RationalMatrix, r: int) -> RationalMatrix:
    out = m
    for _ in range(r - 1):
        out = out.kron(m)
    return out


def predicted_info_matrix(problem: DesignProblem, summary: InfoSummary) -> RationalMatrix:
    """Block-diagonal matrix ``diag(h_r * (I (x) M^(x)r))`` from the closed forms."""
    M = one_way_brick(problem.v).matrix
    counts = (problem.K, comb(problem.K, 2), comb(problem.K, 3))
    blocks = []
    for r, (h, n) in enumerate(zip(summary.as_tuple(), counts), start=1):
        cell = Fraction(h) * _kron_power(M, r)
        blocks.extend([cell] * n)
    return RationalMatrix.block_diag(blocks)


def _block_bounds(problem: DesignProblem) -> list[tuple[str, int, int]]:
    lay = parameter_layout(problem)
    return [
        ("main", 0, lay.p1),
        ("first-order", lay.p1, lay.p1 + lay.p2),
        ("second-order", lay.p1 + lay.p2, lay.p),
    ]


def _first_discrepancy(a: RationalMatrix, b: RationalMatrix, problem: DesignProblem):
    bounds = _block_bounds(problem)

    def block_of(i):
        return next(name for name, lo, hi in bounds if lo <= i < hi)

    for i in range(a.rows):
        for j in range(a.cols):
            if a[i, j] != b[i, j]:
                return i, j, block_of(i), block_of(j), a[i, j], b[i, j]
    return None


def check_lemma1(problem: DesignProblem, d: int, cap: int | None = None) -> Report:
    """Enumerated ``M(xi_d)`` is block diagonal with blocks ``h_r(d) I (x) M^(x)r``."""
    problem.check_depth(d)
    design = InvariantDesign(problem, {d: Fraction(1)})
    enumerated = enumerate_info_matrix(problem, design, cap)
    summary = InfoSummary(h1(problem, d), h2(problem, d), h3(problem, d))
    predicted = predicted_info_matrix(problem, summary)
    name = f"lemma1 K={problem.K} S={problem.S} v={problem.v} d={d}"
    off_diag_zero = True
    for name_i, lo_i, hi_i in _block_bounds(problem):
        for name_j, lo_j, hi_j in _block_bounds(problem):
            if name_i != name_j and lo_i < hi_i and lo_j < hi_j:
                if not enumerated.submatrix(lo_i, hi_i, lo_j, hi_j).is_zero():
                    off_diag_zero = False
    miss = _first_discrepancy(enumerated, predicted, problem)
    if miss is None:
        return Report(name, True, "exact match", {"h": summary.as_tuple()})
    i, j, bi, bj, got, want = miss
    return Report(
        name, False,
        f"entry ({i},{j}) in {bi}/{bj} block: enumerated {got}, closed form {want}"
        + ("" if off_diag_zero else "; off-diagonal blocks do not vanish"),
    )


def _pattern_gram(v: int, differ: tuple[bool, bool, bool]) -> np.ndarray:
    """Integer sum of outer products of triple-Kronecker differences.

    Attribute ``t`` ranges over ``i_t != j_t`` if ``differ[t]`` else ``i_t == j_t``.
    """
    levels = range(1, v + 1)
    per_attr = []
    for dif in differ:
        per_attr.append([(i, j) for i in levels for j in levels if (i != j) == dif])
    codes = np.stack([marginal_code(x, v) for x in range(v + 1)])
    q = v - 1
    gram = np.zeros((q**3, q**3), dtype=np.int64)
    combos = list(product(*per_attr))
    for start in range(0, len(combos), CHUNK):
        chunk = np.array(combos[start:start + CHUNK])  # (n, 3, 2)
        fi = codes[chunk[:, :, 0]]
        fj = codes[chunk[:, :, 1]]
        ki = np.einsum("na,nb,nc->nabc", fi[:, 0], fi[:, 1], fi[:, 2]).reshape(len(chunk), -1)
        kj = np.einsum("na,nb,nc->nabc", fj[:, 0], fj[:, 1], fj[:, 2]).reshape(len(chunk), -1)
        D = ki - kj
        gram += D.T @ D
    return gram


def _scalar_multiple(gram: np.ndarray, base: RationalMatrix) -> Fraction | None:
    """``c`` with ``gram == c * base`` exactly, or ``None``."""
    pivot = next((i, j) for i in range(base.rows) for j in range(base.cols) if base[i, j] != 0)
    c = Fraction(int(gram[pivot])) / base[pivot]
    for i in range(base.rows):
        for j in range(base.cols):
            if Fraction(int(gram[i, j])) != c * base[i, j]:
                return None
    return c


def appendix_coefficients(v: int) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficients of ``M (x) M (x) M`` for three, two and one differing attributes."""
    base = Fraction(v * (v - 1) ** 3, 4)
    return (base * (v * v - 3 * v + 3), base * (v - 2), base)


def check_appendix_sums(v: int) -> Report:
    """The three triple-interaction sums are exact multiples of ``M (x) M (x) M``."""
    if v > 6:
        raise ValueError("appendix sums are only enumerated for v <= 6")
    M = one_way_brick(v).matrix
    MMM = _kron_power(M, 3)
    expected = appendix_coefficients(v)
    found = []
    problems = []
    for label, pattern, want in zip(("three differ", "two differ", "one differs"),
                                    ((True, True, True), (True, True, False), (True, False, False)),
                                    expected):
        gram = _pattern_gram(v, pattern)
        if not np.array_equal(gram, gram.T):
            problems.append(f"{label}: sum is not symmetric")
        c = _scalar_multiple(gram, MMM)
        found.append(c)
        if c is None:
            problems.append(f"{label}: sum is not a multiple of M(x)M(x)M")
        elif c != want:
            problems.append(f"{label}: coefficient {c}, expected {want}")
    name = f"appendix sums v={v}"
    return Report(name, not problems, "; ".join(problems) or f"coefficients {', '.join(map(str, found))}",
                  {"coefficients": tuple(found)})


def variance_element_values(v: int) -> dict[tuple[int, int], Fraction]:
    """Closed-form quadratic forms keyed by ``(order, number of differing attributes)``."""
    return {
        (1, 1): Fraction(v - 1),
        (2, 2): Fraction((v - 1) ** 2 * (v - 2), 2 * v),
        (2, 1): Fraction((v - 1) ** 3, 2 * v),
        (3, 3): Fraction((v - 1) ** 3 * (v * v - 3 * v + 3), 4 * v * v),
        (3, 2): Fraction((v - 1) ** 4 * (v - 2), 4 * v * v),
        (3, 1): Fraction((v - 1) ** 5, 4 * v * v),
    }


def check_variance_elements(v: int) -> Report:
    """Quadratic forms of per-block differences in ``(M^-1)^(x)r`` for all level combinations.

    ``M^-1 = (v-1)/(2v) * A`` with the integer matrix ``A = v I - 1 1^T``; the
    forms are evaluated on integer data (exact in float64 at these sizes)
    and scaled afterwards.
    """
    if v > 8:
        raise ValueError("variance elements are only enumerated for v <= 8")
    q = v - 1
    A1 = v * np.eye(q) - np.ones((q, q))
    codes = np.stack([marginal_code(x, v) for x in range(v + 1)]).astype(float)
    expected = variance_element_values(v)
    observed: dict[tuple[int, int], set] = {}
    levels = range(1, v + 1)
    for order in (1, 2, 3):
        A = A1
        for _ in range(order - 1):
            A = np.kron(A, A1)
        scale = Fraction(q, 2 * v) ** order
        combos = np.array(list(product(product(levels, levels), repeat=order)))  # (n, order, 2)
        for start in range(0, len(combos), CHUNK):
            chunk = combos[start:start + CHUNK]
            fi = codes[chunk[:, :, 0]]
            fj = codes[chunk[:, :, 1]]
            ki, kj = fi[:, 0], fj[:, 0]
            for t in range(1, order):
                ki = np.einsum("na,nb->nab", ki, fi[:, t]).reshape(len(chunk), -1)
                kj = np.einsum("na,nb->nab", kj, fj[:, t]).reshape(len(chunk), -1)
            D = ki - kj
            forms = np.rint(((D @ A) * D).sum(axis=1)).astype(np.int64)
            ndiff = (chunk[:, :, 0] != chunk[:, :, 1]).sum(axis=1)
            for nd in np.unique(ndiff).tolist():
                distinct = np.unique(forms[ndiff == nd]).tolist()
                observed.setdefault((order, nd), set()).update(scale * x for x in distinct)
    problems = []
    for key, vals in sorted(observed.items()):
        if key[1] == 0:
            if vals != {0}:
                problems.append(f"order {key[0]} identical levels gave {sorted(vals)}")
            continue
        if len(vals) != 1:
            problems.append(f"order {key[0]}, {key[1]} differing: not constant ({sorted(vals)[:4]})")
        elif next(iter(vals)) != expected[key]:
            problems.append(f"order {key[0]}, {key[1]} differing: {next(iter(vals))} != {expected[key]}")
    values = {k: next(iter(s)) for k, s in observed.items() if len(s) == 1}
    return Report(f"variance elements v={v}", not problems, "; ".join(problems) or "all constant and matching",
                  {"values": values})


def check_triple_multiplicities(problem: DesignProblem, d: int) -> Report:
    """How often a fixed attribute triple appears in the depth-``d`` orbit.

    Counts, by enumeration, the pairs that show attributes 0, 1, 2 with exactly
    ``t`` of them differing, and compares with
    ``C(3,t) (v(v-1))^t v^(3-t) * C(K-3,S-3) C(S-3,d-t) v^(S-3) (v-1)^(d-t)``.
    """
    K, S, v = problem.K, problem.S, problem.v
    if K < 3 or S < 3:
        raise ValueError("need at least three shown attributes")
    counts = {1: 0, 2: 0, 3: 0}
    for pair in enumerate_orbit(problem, d):
        a, b = pair.first.levels, pair.second.levels
        if a[0] and a[1] and a[2]:
            t = (a[0] != b[0]) + (a[1] != b[1]) + (a[2] != b[2])
            if t:
                counts[t] += 1

    def c(n, k):
        return comb(n, k) if 0 <= k <= n else 0

    expected = {
        t: comb(3, t) * (v * (v - 1)) ** t * v ** (3 - t)
        * c(K - 3, S - 3) * c(S - 3, d - t) * v ** (S - 3) * (v - 1) ** max(d - t, 0)
        for t in (1, 2, 3)
    }
    ok = counts == expected
    return Report(f"triple multiplicities K={K} S={S} v={v} d={d}", ok,
                  "" if ok else f"counted {counts}, expected {expected}", {"counts": counts})


def _all_pairs(problem: DesignProblem):
    for d in range(problem.S + 1):
        for first, second in _orbit_arrays(problem, d):
            yield d, first, second


def _quadratic_forms_exact(D: np.ndarray, L: int, A: list[list[int]]) -> list[Fraction]:
    """Exact ``D_n^T (A / L) D_n`` per row, in int64 when safe, Python ints otherwise."""
    p = len(A)
    amax = max((abs(x) for row in A for x in row), default=0)
    dmax = int(np.abs(D).max()) if D.size else 0
    if amax * dmax * dmax * p * p < 2**62:
        Ai = np.array(A, dtype=np.int64)
        forms = np.einsum("na,na->n", D @ Ai, D).tolist()
    else:
        Ao = np.array(A, dtype=object)
        Do = D.astype(object)
        forms = [int(x) for x in ((Do @ Ao) * Do).sum(axis=1)]
    return [Fraction(int(x), L) for x in forms]


def check_variance_function(problem: DesignProblem, design: InvariantDesign,
                            cap: int | None = None) -> Report:
    """Pairwise variance ``(f(i) - f(j))^T M^-1 (f(i) - f(j))`` over the whole region.

    Asserts constancy on each depth orbit and agreement with the closed-form
    variance function: exactly for rational designs, to 1e-9 relative for
    float designs.
    """
    total = comb(problem.K, problem.S) * problem.v ** (2 * problem.S)
    _guard(total, cap)
    name = (f"variance function K={problem.K} S={problem.S} v={problem.v} "
            f"design={{{', '.join(f'{d}: {w}' for d, w in design.weights.items())}}}")
    summary = info_summary(design)
    if not summary.nonsingular:
        return Report(name, False, "design is singular")
    exact = design.exact
    M = _invariant_matrix(problem, design.weights, cap)
    if exact:
        L, A = M.inverse().scaled_integers()
    else:
        Minv = np.linalg.inv(M.to_float())
    per_orbit: dict[int, set] = {}
    for d, first, second in _all_pairs(problem):
        D = regression_matrix(first, problem.v) - regression_matrix(second, problem.v)
        if exact:
            vals = _quadratic_forms_exact(D, L, A)
        else:
            Df = D.astype(float)
            vals = np.einsum("na,ab,nb->n", Df, Minv, Df).tolist()
        per_orbit.setdefault(d, set()).update(vals)
    problems = []
    values = {}
    for d, vals in sorted(per_orbit.items()):
        if exact:
            if len(vals) != 1:
                problems.append(f"depth {d}: {len(vals)} distinct values")
                continue
            val = next(iter(vals))
        else:
            lo, hi = min(vals), max(vals)
            if hi - lo > 1e-9 * max(1.0, abs(hi)):
                problems.append(f"depth {d}: spread {hi - lo:.3g}")
                continue
            val = hi
        values[d] = val
        if d == 0:
            if val != 0:
                problems.append(f"depth 0: nonzero variance {val}")
            continue
        want = variance(design, d)
        if exact:
            if val != want:
                problems.append(f"depth {d}: enumerated {val}, closed form {want}")
        elif abs(val - want) > 1e-9 * max(1.0, abs(want)):
            problems.append(f"depth {d}: enumerated {val:.12g}, closed form {want:.12g}")
    return Report(name, not problems, "; ".join(problems) or "constant on orbits, matches closed form",
                  {"values": values})
