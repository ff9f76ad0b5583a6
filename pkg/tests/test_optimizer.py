from fractions import Fraction

import numpy as np
import pytest

from pairopt import (
    DesignProblem,
    InvariantDesign,
    kw_certificate,
    log_det_objective,
    make_uniform,
    optimal_depth,
    optimal_depth_first_order,
    optimal_depth_main,
    optimal_depth_second_order,
    optimize_full,
    solve_on_support,
)
from pairopt.closed_form import h_matrix
from pairopt.design_core import parameter_layout
from pairopt.optimizer import candidate_supports, exact_weights


def test_main_effect_depth():
    assert optimal_depth_main(DesignProblem(6, 4, 3)) == 4


@pytest.mark.parametrize("S,v,d", [(4, 2, 2), (6, 3, 4), (10, 8, 8)])
def test_first_order_depth(S, v, d):
    assert optimal_depth_first_order(DesignProblem(S, S, v)) == d


def test_second_order_depth_examples():
    assert optimal_depth_second_order(DesignProblem(7, 6, 7)) == 4
    assert optimal_depth_second_order(DesignProblem(4, 3, 2)) == 1
    assert optimal_depth_second_order(DesignProblem(10, 9, 20)) == 7


def test_dispatch():
    pr = DesignProblem(7, 6, 7)
    assert optimal_depth(pr, "second-order") == 4
    with pytest.raises(ValueError):
        optimal_depth(pr, "third-order")


def test_candidate_supports():
    c = candidate_supports(4)
    assert (1,) in c and (2, 3) in c and (1, 4) in c and (2, 3, 4) in c
    assert len(c) == len(set(c))
    assert all(len(s) <= 3 for s in c)


@pytest.mark.parametrize(
    "K,S,v,support,w",
    [
        (4, 4, 2, (2, 4), 0.857),
        (4, 3, 2, (1, 3), 0.900),
        (4, 3, 3, (1, 3), 0.9375),
        (7, 7, 3, (4, 7), 0.322),
        (8, 8, 4, (5, 8), 0.425),
    ],
)
def test_two_point_designs(K, S, v, support, w):
    r = optimize_full(DesignProblem(K, S, v))
    assert r.support == support
    assert r.weights[0] == pytest.approx(w, abs=1e-3)
    assert r.certificate.passed


def test_single_depth_design():
    r = optimize_full(DesignProblem(10, 10, 6))
    assert r.support == (7,)


def test_three_depths_for_smallest_full_profile():
    r = optimize_full(DesignProblem(3, 3, 2))
    assert r.support == (1, 2, 3)
    assert r.weights == pytest.approx((3 / 7, 3 / 7, 1 / 7), abs=1e-9)


def test_exact_recheck_of_three_point_design():
    r = optimize_full(DesignProblem(3, 3, 2))
    exact = exact_weights(r)
    assert dict(exact.weights) == {1: Fraction(3, 7), 2: Fraction(3, 7), 3: Fraction(1, 7)}
    cert = kw_certificate(exact, tolerance=0)
    assert cert.passed


def test_certificate_example_rows():
    cert = optimize_full(DesignProblem(4, 4, 2)).certificate
    assert cert.per_depth == pytest.approx((0.875, 1, 0.875, 1), abs=1e-9)
    cert = optimize_full(DesignProblem(7, 7, 8)).certificate
    assert cert.per_depth == pytest.approx((0.471, 0.768, 0.929, 0.994, 1, 0.987, 0.993), abs=1e-3)


def test_uniform_depth_one_not_optimal():
    cert = kw_certificate(make_uniform(DesignProblem(3, 3, 2), 1))
    assert cert.per_depth[0] == pytest.approx(1)
    assert not cert.passed
    assert cert.max_normalized_variance > 1


def test_concavity_around_optimum():
    pr = DesignProblem(6, 6, 3)
    r = optimize_full(pr)
    base = r.objective
    w = dict(r.design.weights)
    for d in pr.depths:
        for eps in (1e-4, -1e-4):
            trial = dict(w)
            trial[d] = trial.get(d, 0.0) + eps
            if trial[d] < 0:
                continue
            total = sum(trial.values())
            perturbed = InvariantDesign(pr, {k: x / total for k, x in trial.items()})
            assert log_det_objective(perturbed) <= base + 1e-12


def test_solve_on_support_interior_and_boundary():
    pr = DesignProblem(4, 4, 2)
    H = h_matrix(pr)
    p = np.array(parameter_layout(pr).blocks, dtype=float)
    w = solve_on_support(H[:, [1, 3]], p)
    assert w == pytest.approx([6 / 7, 1 / 7])
    # on {1, 2} and {2, 3} the restricted optimum puts all mass on depth 2
    assert solve_on_support(H[:, [0, 1]], p) is None
    assert solve_on_support(H[:, [1, 2]], p) is None
    # interior optimum on {3, 4}, checked against a grid scan
    ts = np.linspace(1e-6, 1 - 1e-6, 20001)
    vals = [p @ np.log(H[:, [2, 3]] @ [t, 1 - t]) for t in ts]
    assert solve_on_support(H[:, [2, 3]], p)[0] == pytest.approx(ts[int(np.argmax(vals))], abs=1e-4)


def test_solve_on_singular_support():
    pr = DesignProblem(4, 3, 2)
    H = h_matrix(pr)
    p = np.array(parameter_layout(pr).blocks, dtype=float)
    assert solve_on_support(H[:, [1]], p) is None


def test_near_degenerate_weight_not_collapsed():
    r = optimize_full(DesignProblem(10, 7, 7))
    assert len(r.support) == 2
    assert r.certificate.passed


def test_result_is_deterministic():
    a = optimize_full(DesignProblem(9, 6, 3))
    b = optimize_full(DesignProblem(9, 6, 3))
    assert a.design == b.design
