import math

import numpy as np
import pytest

from hardy_lab.constants import (PowerParams, adhoc_closed_form_constant, adhoc_maximizer_level, adhoc_weights,
                                 birman_product_constant, bracket_factor, holder_conjugate, iterated_power_constant,
                                 muckenhoupt_A, muckenhoupt_A_tilde, optimal_power_constant, power_bracket)
from hardy_lab.errors import BranchViolation, DegenerateExponent, HypothesisError, IntervalMismatch
from hardy_lab.weights import ExpDecay, FunctionWeight, Interval, MonotoneWeight, Power

HALF = Interval(0, math.inf)


def _rational(hi=2.0, lo=1.0):
    # decreasing from hi at 0 to lo at infinity
    d = hi - lo
    return FunctionWeight(lambda x: lo + d / (1 + x), HALF, derivative=lambda x: -d / (1 + x) ** 2,
                          limits={0: hi, math.inf: lo})


@pytest.mark.parametrize("p, alpha, expected", [(2, 0, 0.25), (1, -1, 1.0), (2, 6, 6.25), (3, 0, 8 / 27)])
def test_optimal_power_constant(p, alpha, expected):
    assert optimal_power_constant(PowerParams(p, alpha)) == pytest.approx(expected, rel=1e-15)


def test_power_params_validation():
    assert PowerParams(2, 0).branch == "minus"
    assert PowerParams(2, 3).branch == "plus"
    with pytest.raises(DegenerateExponent):
        PowerParams(2, 1)
    with pytest.raises(BranchViolation):
        PowerParams(2, 5, "minus")
    with pytest.raises(HypothesisError):
        PowerParams(0.5, 0)


@pytest.mark.parametrize("p, alpha, k, expected", [(2, 0, 2, 0.5625), (2, 0, 1, 0.25), (2, 3, 2, 0.0)])
def test_birman_product(p, alpha, k, expected):
    assert birman_product_constant(p, alpha, k) == pytest.approx(expected, abs=1e-15)
    assert iterated_power_constant(p, alpha, k) == birman_product_constant(p, alpha, k)


def test_birman_rejects_fractional_order():
    with pytest.raises(HypothesisError):
        birman_product_constant(2, 0, 1.5)


def test_bracket_factor():
    assert bracket_factor(1) == 1.0
    assert bracket_factor(2) == pytest.approx(2.0, rel=1e-15)
    assert holder_conjugate(3) == 1.5 and holder_conjugate(1) == math.inf


def test_muckenhoupt_inverse_square():
    br = muckenhoupt_A(Power(-2), Power(0), 2)
    assert br.A == pytest.approx(1.0, rel=1e-8)
    assert br.lower == br.A and br.upper == pytest.approx(2.0, rel=1e-8)
    assert not br.unbounded


def test_muckenhoupt_divergent_factor():
    br = muckenhoupt_A(Power(0), Power(0), 2)
    assert br.A == math.inf


def test_muckenhoupt_p1_on_half_line_is_unbounded():
    # sup_c c^{-1} * ||1||_inf blows up as c -> 0
    br = muckenhoupt_A(Power(-2), Power(0), 1)
    assert br.A == math.inf


def test_muckenhoupt_p1_on_shifted_interval():
    iv = Interval(1, math.inf)
    br = muckenhoupt_A(Power(-2, iv), Power(0, iv), 1)
    assert br.A == pytest.approx(1.0, rel=1e-8)
    assert br.lower == br.upper


def test_muckenhoupt_interval_mismatch():
    with pytest.raises(IntervalMismatch):
        muckenhoupt_A(Power(-2), Power(0, Interval(0, 1)), 2)


def test_power_bracket_matches_optimal_constant():
    # for power weights A^p * (bracket factor)^p is comparable with the sharp constant
    for p, alpha in [(2, 0), (3, 0), (2, 4), (1.5, -1)]:
        params = PowerParams(p, alpha)
        br = power_bracket(params)
        sharp_norm = optimal_power_constant(params) ** (-1 / p)
        assert br.lower <= sharp_norm * (1 + 1e-8)
        assert sharp_norm <= br.upper * (1 + 1e-8)


@pytest.mark.parametrize("p, expected", [(2, 1.0), (3, 2 ** (2 / 3))])
def test_a_tilde_adhoc_exp(p, expected):
    w1 = MonotoneWeight(ExpDecay(1), "decreasing")
    v, w, phi, psi = adhoc_weights(w1, Power(0), p)
    br = muckenhoupt_A_tilde(v, w, phi, psi, p, "minus")
    assert br.A == pytest.approx(expected, rel=1e-7)
    assert adhoc_closed_form_constant(w1, p, "minus") == pytest.approx(expected, rel=1e-14)


def test_a_tilde_reduces_with_unit_weights():
    v, w = Power(-2), Power(0)
    plain = muckenhoupt_A(v, w, 2).A
    ones = muckenhoupt_A_tilde(v, w, Power(0), Power(0), 2).A
    assert abs(plain - ones) <= 1e-10


def test_closed_form_examples():
    assert adhoc_closed_form_constant(MonotoneWeight(ExpDecay(1)), 2) == pytest.approx(1.0, rel=1e-15)
    w1 = MonotoneWeight(_rational(2.0, 1.0))
    assert adhoc_closed_form_constant(w1, 2) == pytest.approx(1 - math.sqrt(0.5), rel=1e-15)
    const = MonotoneWeight(Power(0), "decreasing", endpoint_limits=(3.0, 3.0))
    assert adhoc_closed_form_constant(const, 2) == 0.0
    assert adhoc_closed_form_constant(w1, 1) == pytest.approx(0.5, rel=1e-15)


def test_closed_form_direction_mismatch():
    with pytest.raises(BranchViolation):
        adhoc_closed_form_constant(MonotoneWeight(ExpDecay(1)), 2, "plus")


def test_maximizer_level_matches_sup_search():
    w1 = MonotoneWeight(_rational(4.0, 1.0))
    p = 2.0
    v, w, phi, psi = adhoc_weights(w1, Power(0), p)
    br = muckenhoupt_A_tilde(v, w, phi, psi, p, "minus")
    level = adhoc_maximizer_level(w1, p)
    assert level == pytest.approx(2.0, rel=1e-15)
    assert float(w1(np.array([br.c_star]))[0]) == pytest.approx(level, rel=1e-4)
    assert br.A == pytest.approx(adhoc_closed_form_constant(w1, p), rel=1e-6)


def test_p1_bracket_collapses():
    w1 = MonotoneWeight(_rational())
    v, w, phi, psi = adhoc_weights(w1, Power(0), 1)
    br = muckenhoupt_A_tilde(v, w, phi, psi, 1, "minus")
    assert br.lower == br.upper == br.A


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_adhoc_bound_beats_trivial_p(p):
    # both limits finite and nonzero: the computed upper bound is strictly below p
    w1 = MonotoneWeight(_rational(3.0, 1.0))
    v, w, phi, psi = adhoc_weights(w1, Power(0), p)
    br = muckenhoupt_A_tilde(v, w, phi, psi, p, "minus")
    assert br.upper < p


def test_bracket_to_dict_keys():
    d = muckenhoupt_A(Power(-2), Power(0), 2).to_dict()
    assert {"A", "C0_lower", "C0_upper", "c_star"} <= set(d)
