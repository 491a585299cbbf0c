import math

import numpy as np
import pytest

from hardy_lab.errors import HypothesisError
from hardy_lab.hardy_ops import (MINUS, PLUS, HardyAccumulator, HardyKind, hardy_apply, hardy_path,
                                 iterated_equals_kernel)
from hardy_lab.paths import constant_path, custom_path, exp_path, power_path, power_tail_path


def test_minus_constant_and_power_examples():
    one = constant_path(1.0)
    assert hardy_apply(HardyKind(MINUS, 1), one, 3.0) == pytest.approx(3.0, rel=1e-13)
    assert hardy_apply(HardyKind(MINUS, 2), one, 2.0) == pytest.approx(2.0, rel=1e-13)
    t = power_path(1.0)
    assert hardy_apply(HardyKind(MINUS, 3), t, 1.0) == pytest.approx(1 / 24, rel=1e-12)


def test_singular_lead_and_slow_tail():
    # x^{-1/2} integrates to 2 sqrt(x); x^{-2} beyond 2 integrates to 1/2
    assert hardy_apply(HardyKind(MINUS), power_path(-0.5), 4.0) == pytest.approx(4.0, rel=1e-10)
    assert hardy_apply(HardyKind(PLUS), power_path(-2.0), 2.0) == pytest.approx(0.5, rel=1e-10)


def test_plus_exp_is_reproducing():
    F = exp_path()
    for ell in (1, 2, 3):
        assert hardy_apply(HardyKind(PLUS, ell), F, 0.7) == pytest.approx(math.exp(-0.7), rel=1e-12)


@pytest.mark.parametrize("direction", [MINUS, PLUS])
@pytest.mark.parametrize("ell", [2, 3])
def test_nested_matches_kernel(direction, ell):
    nested, kernel, diff = iterated_equals_kernel(exp_path(), ell, 1.0, direction=direction)
    assert abs(diff) <= 1e-10 * abs(kernel)


def test_nested_minus_order_two_value():
    nested, kernel, _ = iterated_equals_kernel(exp_path(), 2, 1.0)
    assert kernel == pytest.approx(0.36787944117144232, rel=1e-13)
    assert nested == pytest.approx(0.36787944117144232, rel=1e-10)


def test_hardy_path_examples():
    p1 = hardy_path(HardyKind(MINUS), constant_path(1.0), [1.0, 2.0, 3.0])
    assert np.allclose(p1(np.array([1.0, 2.0, 3.0])), [1, 2, 3], rtol=1e-13)
    p2 = hardy_path(HardyKind(PLUS), exp_path(), [0.5, 1.0])
    assert np.allclose(p2(np.array([0.5, 1.0])), [math.exp(-0.5), math.exp(-1)], rtol=1e-12)
    p3 = hardy_path(HardyKind(MINUS, 2), constant_path(2.0), [1.0, 2.0])
    assert np.allclose(p3(np.array([1.0, 2.0])), [1.0, 4.0], rtol=1e-13)
    assert len(p3.params["errors"]) == 2


def test_hardy_path_rejects_bad_grid():
    with pytest.raises(HypothesisError):
        hardy_path(HardyKind(), exp_path(), [2.0, 1.0])


def test_kind_validation():
    with pytest.raises(HypothesisError):
        HardyKind("sideways")
    with pytest.raises(HypothesisError):
        HardyKind(MINUS, 0)
    assert HardyKind("+").direction == PLUS


def test_accumulator_matches_single_integrals():
    F = exp_path(0.5)
    xs = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 9.0])
    for direction in (MINUS, PLUS):
        acc = HardyAccumulator(F, direction, 3)
        vals, errs = acc.evaluate_all(xs)
        for j in range(3):
            ref = [hardy_apply(HardyKind(direction, j + 1), F, x) for x in xs]
            assert np.allclose(vals[:, j], ref, rtol=1e-11, atol=1e-14)
        assert np.all(errs >= 0)


def test_linearity():
    F, G = exp_path(1.0), power_tail_path(-3.0, 1.0)
    H = custom_path(lambda x: 2 * F(x) - 3 * G(x), breakpoints=(1.0,), lead_exponent=0.0, tail_exponent=-3.0)
    for direction in (MINUS, PLUS):
        k = HardyKind(direction)
        for x in (0.5, 1.5, 4.0):
            lhs = hardy_apply(k, H, x)
            rhs = 2 * hardy_apply(k, F, x) - 3 * hardy_apply(k, G, x)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-13)


def test_monotone_in_the_integrand():
    small, big = exp_path(2.0), exp_path(1.0)
    for direction in (MINUS, PLUS):
        for ell in (1, 2):
            k = HardyKind(direction, ell)
            for x in (0.2, 1.0, 3.0):
                assert hardy_apply(k, small, x) <= hardy_apply(k, big, x)
