from fractions import Fraction

import pytest

from pairopt import (
    DepthError,
    DesignProblem,
    InvariantDesign,
    make_uniform,
    mix,
    orbit_count,
    parameter_layout,
)
from pairopt.design_core import DepthOrbit


@pytest.mark.parametrize(
    "K,S,v,p",
    [(4, 4, 2, 14), (3, 3, 2, 7), (4, 3, 3, 64)],
)
def test_parameter_count(K, S, v, p):
    assert parameter_layout(DesignProblem(K, S, v)).p == p


def test_layout_blocks():
    lay = parameter_layout(DesignProblem(5, 4, 3))
    assert lay.blocks == (10, 40, 80)
    assert lay.p == 130


@pytest.mark.parametrize(
    "K,S,v,d,n",
    [(4, 3, 2, 2, 96), (4, 3, 2, 0, 32), (3, 3, 2, 3, 8)],
)
def test_orbit_count(K, S, v, d, n):
    assert orbit_count(DesignProblem(K, S, v), d) == n
    assert DepthOrbit(DesignProblem(K, S, v), d).count == n


def test_orbit_count_one_attribute():
    assert orbit_count(DesignProblem(1, 1, 2, second_order=False), 1) == 2


def test_orbit_counts_sum_to_all_pairs():
    pr = DesignProblem(5, 4, 3)
    total = sum(orbit_count(pr, d) for d in range(pr.S + 1))
    assert total == 5 * 3 ** 8


@pytest.mark.parametrize("K,S,v", [(3, 2, 2), (4, 4, 1), (3, 4, 2), (3, 0, 2)])
def test_invalid_problems(K, S, v):
    with pytest.raises(ValueError):
        DesignProblem(K, S, v)


def test_non_integer_problem():
    with pytest.raises(TypeError):
        DesignProblem(4.0, 3, 2)
    with pytest.raises(TypeError):
        DesignProblem(True, 1, 2, second_order=False)


def test_degenerate_flag_not_part_of_identity():
    assert DesignProblem(4, 3, 2) == DesignProblem(4, 3, 2, second_order=False)


def test_check_depth():
    pr = DesignProblem(4, 3, 2)
    assert pr.check_depth(0) == 0
    with pytest.raises(DepthError):
        pr.check_depth(0, allow_zero=False)
    with pytest.raises(DepthError):
        pr.check_depth(4)


class TestInvariantDesign:
    pr = DesignProblem(4, 3, 2)

    def test_exact_weights(self):
        d = InvariantDesign(self.pr, {1: Fraction(9, 10), 3: Fraction(1, 10)})
        assert d.exact and d.support == (1, 3)
        assert d.weight(2) == 0

    def test_float_weights(self):
        d = InvariantDesign(self.pr, {1: 0.9, 3: 0.1})
        assert not d.exact
        assert d.weight(1) == pytest.approx(0.9)

    def test_zero_weights_dropped(self):
        d = InvariantDesign(self.pr, {1: Fraction(1), 2: 0})
        assert d.support == (1,)

    def test_sum_must_be_one(self):
        with pytest.raises(ValueError):
            InvariantDesign(self.pr, {1: Fraction(1, 2)})
        with pytest.raises(ValueError):
            InvariantDesign(self.pr, {1: 0.5, 2: 0.4})

    def test_negative_weight(self):
        with pytest.raises(ValueError):
            InvariantDesign(self.pr, {1: Fraction(3, 2), 2: Fraction(-1, 2)})

    def test_depth_out_of_range(self):
        with pytest.raises(DepthError):
            InvariantDesign(self.pr, {4: 1})

    def test_depth_zero_allowed(self):
        assert InvariantDesign(self.pr, {0: 1}).support == (0,)

    def test_weights_read_only(self):
        d = make_uniform(self.pr, 2)
        with pytest.raises(TypeError):
            d.weights[1] = 1

    def test_equality_and_hash(self):
        a = make_uniform(self.pr, 2)
        b = InvariantDesign(self.pr, {2: 1})
        assert a == b and hash(a) == hash(b)
        assert a.as_float().weights == {2: 1.0}

    def test_make_uniform_rejects_zero(self):
        with pytest.raises(DepthError):
            make_uniform(self.pr, 0)

    def test_mix(self):
        m = mix([(Fraction(9, 10), make_uniform(self.pr, 1)), (Fraction(1, 10), make_uniform(self.pr, 3))])
        assert dict(m.weights) == {1: Fraction(9, 10), 3: Fraction(1, 10)}

    def test_mix_other_problem(self):
        other = DesignProblem(5, 3, 2)
        with pytest.raises(ValueError):
            mix([(Fraction(1, 2), make_uniform(self.pr, 1)), (Fraction(1, 2), make_uniform(other, 1))])
