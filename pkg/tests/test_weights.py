import math

import numpy as np
import pytest

from hardy_lab.errors import DivergentIntegral, DomainError, HypothesisError, IntervalMismatch
from hardy_lab.quadrature import integrate
from hardy_lab.weights import (ExpDecay, Interval, MonotoneWeight, Power, Product, ScaledPower, ShiftedPower,
                               Tabulated, eval_weight, validate_weight_pair, weight_antiderivative,
                               weight_from_json)

HALF = Interval(0, math.inf)


def test_validate_inverse_power_passes():
    w1 = MonotoneWeight(ScaledPower(1, -1, HALF), "decreasing")
    assert validate_weight_pair(w1, Power(0, HALF), 2, "minus").passed


def test_validate_wrong_monotonicity():
    w1 = MonotoneWeight(Power(1, HALF), "decreasing", endpoint_limits=(1.0, 0.0))
    res = validate_weight_pair(w1, Power(0, HALF), 2, "minus")
    assert not res.passed
    assert "monoton" in res.failed_clause


def test_validate_exp_p1():
    w1 = MonotoneWeight(ExpDecay(1), "decreasing")
    assert validate_weight_pair(w1, Power(0, HALF), 1, "minus").passed


def test_validate_errors():
    w1 = MonotoneWeight(ExpDecay(1), "decreasing")
    with pytest.raises(HypothesisError):
        validate_weight_pair(w1, Power(0, HALF), 0.5, "minus")
    with pytest.raises(IntervalMismatch):
        validate_weight_pair(w1, Power(0, Interval(0, 1)), 2, "minus")


@pytest.mark.parametrize("alpha, p", [(-0.5, 2), (0.0, 1.5), (0.5, 3.0)])
def test_validate_power_examples(alpha, p):
    # minus: w1 = x^(alpha-p+1)/(p-1-alpha) decreasing, w2 = x^(...) chosen so the ad hoc form is the power one
    k = p - 1 - alpha
    w1 = MonotoneWeight(ScaledPower(1 / k, -k, HALF), "decreasing")
    w2 = Power((alpha - (1 - p) * (-k - 1) - p * (-k)) / p, HALF)
    assert validate_weight_pair(w1, w2, p, "minus").passed


def test_eval_examples():
    assert eval_weight(Power(-2, HALF), 2) == 0.25
    assert eval_weight(ExpDecay(1), 0) == 1.0
    assert abs(eval_weight(Product([Power(1, HALF), ExpDecay(1)]), 1) - math.exp(-1)) < 1e-15
    with pytest.raises(DomainError):
        eval_weight(ExpDecay(1, Interval(0, 1)), 2)


def test_tabulated_interpolates():
    w = Tabulated([0, 1, 2], [2, 1, 3])
    assert eval_weight(w, 0.5) == 1.5
    assert float(w.derivative(np.array([1.5]))[0]) == 2.0


def test_antiderivative_examples():
    r = weight_antiderivative(Power(0, HALF), 0, 3)
    assert r.value == 3 and r.err_estimate == 0
    assert weight_antiderivative(Power(-2, HALF), 2, math.inf).value == 0.5
    with pytest.raises(DivergentIntegral):
        weight_antiderivative(Power(-1, HALF), 0, 1)


@pytest.mark.parametrize("w, lo, hi, hints", [
    (Power(1.5, HALF), 0.0, 2.0, ()),
    (ScaledPower(3.0, -2.5, HALF), 1.0, math.inf, ()),
    (ExpDecay(0.7), 0.0, math.inf, ()),
    # slow power tail: the quadrature needs the decay exponent
    (ShiftedPower(1.0, -1.5), 0.0, math.inf, ((math.inf, -1.5),)),
])
def test_closed_form_matches_quadrature(w, lo, hi, hints):
    exact = weight_antiderivative(w, lo, hi).value
    q = integrate(lambda x: w(x), lo, hi, hints=hints)
    assert abs(exact - q.value) <= max(10 * q.err_estimate, 1e-12 * abs(exact))


def test_json_roundtrip():
    for w in (Power(-2.0, HALF), ExpDecay(2.0), ScaledPower(2.0, 0.5, HALF), ShiftedPower(1.0, -1.0)):
        w2 = weight_from_json(w.to_json())
        x = np.array([0.3, 1.0, 7.0])
        assert np.allclose(w(x), w2(x))
    w = weight_from_json({"kind": "power", "alpha": -2.0, "interval": [0, "inf"]})
    assert w.interval.b == math.inf


def test_monotone_rate_sign():
    w1 = MonotoneWeight(ExpDecay(1), "decreasing")
    x = np.linspace(0.1, 5, 20)
    assert np.all(w1.rate(x) > 0)
    w1 = MonotoneWeight(Power(2, HALF), "increasing")
    assert np.all(w1.rate(x) > 0)
