"""Acceptance criteria, one test each.

Reference values for the three tables live in ``tests/data``.
"""

import time
from fractions import Fraction

import pytest

from pairopt import (
    DesignProblem,
    h1,
    h2,
    h3,
    make_uniform,
    optimal_depth_first_order,
    optimal_depth_second_order,
    optimize_full,
    parameter_layout,
    variance,
)
from pairopt.oracle import (
    check_appendix_sums,
    check_lemma1,
    check_variance_elements,
    check_variance_function,
)

WEIGHT_ATOL = 1e-3
VARIANCE_ATOL = 1e-3


def _argmax_smallest(values):
    best = max(values)
    return values.index(best) + 1


def test_criterion_1_depth_table(depth_table):
    t0 = time.perf_counter()
    wrong = {}
    for (K, S, v), expected in depth_table.items():
        got = optimal_depth_second_order(DesignProblem(K, S, v))
        if got != expected:
            wrong[(K, S, v)] = (got, expected)
    elapsed = time.perf_counter() - t0
    assert len(depth_table) == 70
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    assert not wrong, f"mismatches (got, expected): {wrong}"


def test_criterion_2_design_table(design_table):
    t0 = time.perf_counter()
    wrong = {}
    for (K, S, v), (depth, weight) in design_table.items():
        r = optimize_full(DesignProblem(K, S, v))
        expected_support = (depth,) if weight is None else (depth, S)
        if r.support != expected_support:
            wrong[(K, S, v)] = (r.support, r.weights, expected_support, weight)
        elif weight is not None and abs(r.weights[0] - weight) > WEIGHT_ATOL:
            wrong[(K, S, v)] = (r.support, r.weights, expected_support, weight)
    elapsed = time.perf_counter() - t0
    assert len(design_table) == 245
    assert elapsed < 10.0, f"took {elapsed:.2f}s"
    assert not wrong, (f"{len(wrong)} cells differ in {elapsed:.2f}s "
                       f"(support, weights, expected support, expected weight): {wrong}")


def test_criterion_3_variance_table(variance_table):
    wrong = {}
    for (K, v), (expected, bold) in variance_table.items():
        r = optimize_full(DesignProblem(K, K, v))
        got = r.certificate.per_depth
        off = [d for d in range(1, K + 1) if abs(got[d - 1] - expected[d - 1]) > VARIANCE_ATOL]
        if off or tuple(r.support) != bold:
            wrong[(K, v)] = (tuple(round(x, 4) for x in got), r.support, off, bold)
    assert len(variance_table) == 49
    assert not wrong, f"{len(wrong)} rows differ (values, support, bad depths, expected bold): {wrong}"


def test_criterion_4_single_depth_variance_equals_p():
    checked = 0
    for K in range(3, 9):
        for S in range(3, K + 1):
            for v in range(2, 9):
                problem = DesignProblem(K, S, v)
                p = parameter_layout(problem).p
                for d in problem.depths:
                    if not all(h(problem, d) > 0 for h in (h1, h2, h3)):
                        continue
                    exact = make_uniform(problem, d)
                    assert variance(exact, d) == p, (K, S, v, d)
                    assert abs(variance(exact.as_float(), d) - p) <= 1e-10 * p, (K, S, v, d)
                    checked += 1
    assert checked > 500


def test_criterion_5_oracle_equivalence():
    t0 = time.perf_counter()
    failures = []
    problems = [DesignProblem(K, S, v) for K in (3, 4) for S in range(3, K + 1) for v in (2, 3)]
    for problem in problems:
        for d in range(problem.S + 1):
            rep = check_lemma1(problem, d)
            if not rep.passed:
                failures.append(rep.line())
            if d and all(h(problem, d) > 0 for h in (h1, h2, h3)):
                rep = check_variance_function(problem, make_uniform(problem, d))
                if not rep.passed:
                    failures.append(rep.line())
        rep = check_variance_function(problem, optimize_full(problem).design)
        if not rep.passed:
            failures.append(rep.line())
    for v in range(2, 7):
        rep = check_appendix_sums(v)
        if not rep.passed:
            failures.append(rep.line())
    for v in range(2, 9):
        rep = check_variance_elements(v)
        if not rep.passed:
            failures.append(rep.line())
    elapsed = time.perf_counter() - t0
    assert not failures, failures
    assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_criterion_6_certificates_on_design_grid():
    bad = []
    for K in range(4, 11):
        for S in range(3, K + 1):
            for v in range(2, 9):
                cert = optimize_full(DesignProblem(K, S, v)).certificate
                top = cert.max_normalized_variance
                tight = all(abs(cert.per_depth[d - 1] - 1) <= 1e-8 for d in cert.support)
                if top > 1 + 1e-8 or not tight:
                    bad.append(((K, S, v), top))
    assert not bad, bad


def test_criterion_7_degeneracy_identities():
    for K in range(3, 11):
        for S in range(3, K + 1):
            for v in (2, 3, 4, 5, 6, 7, 8, 20):
                problem = DesignProblem(K, S, v)
                assert h1(problem, 0) == h2(problem, 0) == h3(problem, 0) == 0
                if v == 2:
                    assert h2(problem, S) == 0, (K, S)
    problem = DesignProblem(4, 3, 2)
    assert h3(problem, 1) == h3(problem, 3) == Fraction(1, 64)
    assert optimal_depth_second_order(problem) == 1


def test_criterion_8_first_order_depth_formula():
    formula_off, argmax_off = [], []
    for S in range(1, 11):
        for v in range(2, 9):
            problem = DesignProblem(max(S, 2), S, v, second_order=False)
            got = optimal_depth_first_order(problem)
            if got != S - 1 - (S - 2) // v:
                formula_off.append((S, v, got))
            best = _argmax_smallest([h2(problem, d) for d in problem.depths])
            if got != best:
                argmax_off.append((S, v, got, best))
    assert not formula_off, formula_off
    assert not argmax_off, f"(S, v, formula, smallest argmax of h2): {argmax_off}"
