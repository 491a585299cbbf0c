import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hardy_lab.constants import PowerParams, birman_product_constant, optimal_power_constant
from hardy_lab.opvalued import MatrixPath, check_operator_ineq, check_trace_ineq, schatten_norm
from hardy_lab.paths import gauss_path, step_path
from hardy_lab.verify import check_power

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def psd_paths(draw, max_dim=3, max_steps=3, psd=True):
    d = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_steps))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    grid = np.sort(np.exp(rng.uniform(np.log(0.1), np.log(10.0), n + 1)))
    if np.any(np.diff(grid) <= 1e-6 * grid[1:]):
        grid = np.geomspace(0.1, 10.0, n + 1)
    A = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d)) * draw(st.booleans())
    V = A @ np.conj(np.swapaxes(A, 1, 2))
    if not psd:
        V = V - np.trace(V, axis1=1, axis2=2).real[:, None, None] / d * np.eye(d)
    return MatrixPath(grid, V, psd=psd)


def _alpha(branch, p, offset):
    return p - 1 - offset if branch == "minus" else p - 1 + offset


@SETTINGS
@given(F=psd_paths(), p=st.sampled_from([1.0, 1.5, 2.0, 3.0]), branch=st.sampled_from(["minus", "plus"]),
       offset=st.floats(0.2, 2.0))
def test_trace_inequality_holds(F, p, branch, offset):
    rep = check_trace_ineq(branch, p, _alpha(branch, p, offset), F)
    assert rep.trace_holds


@SETTINGS
@given(F=psd_paths(psd=False), p=st.sampled_from([1.0, 2.0, 3.0]), offset=st.floats(0.2, 2.0))
def test_trace_inequality_holds_for_hermitian_paths(F, p, offset):
    rep = check_trace_ineq("minus", p, _alpha("minus", p, offset), F)
    assert rep.trace_holds


@SETTINGS
@given(F=psd_paths(), p=st.floats(1.0, 2.0), branch=st.sampled_from(["minus", "plus"]),
       offset=st.floats(0.2, 2.0))
def test_loewner_inequality_holds_up_to_two(F, p, branch, offset):
    rep = check_operator_ineq(branch, p, _alpha(branch, p, offset), F, proof_checks=False)
    assert rep.min_eig_diff >= -rep.tol


@SETTINGS
@given(F=psd_paths(), c=st.floats(0.1, 10.0), p=st.sampled_from([1.5, 2.0, 3.0]))
def test_trace_sides_are_p_homogeneous(F, c, p):
    a = check_trace_ineq("minus", p, 0.0, F)
    b = check_trace_ineq("minus", p, 0.0, MatrixPath(F.grid, c * F.values))
    assert math.isclose(b.trace_lhs, c ** p * a.trace_lhs, rel_tol=1e-9)
    assert math.isclose(b.trace_rhs, c ** p * a.trace_rhs, rel_tol=1e-9)


@SETTINGS
@given(F=psd_paths(max_dim=2), xs=st.lists(st.floats(0.01, 20.0), min_size=2, max_size=6))
def test_minus_operator_is_monotone_in_x(F, xs):
    x = np.sort(np.array(xs))
    H = F.hardy(x)
    for lo, hi in zip(H[:-1], H[1:]):
        assert np.linalg.eigvalsh(hi - lo).min() >= -1e-12 * max(1.0, np.linalg.norm(hi))


@SETTINGS
@given(F=psd_paths(max_dim=2), x=st.floats(0.01, 20.0))
def test_minus_plus_sum_is_total(F, x):
    total = F.hardy(np.array([x]))[0] + F.hardy(np.array([x]), "plus")[0]
    assert np.allclose(total, F.total(), rtol=1e-12, atol=1e-12 * np.abs(F.total()).max())


@SETTINGS
@given(vals=st.lists(st.floats(0.1, 5.0), min_size=1, max_size=4), p=st.sampled_from([1.5, 2.0, 2.5, 3.0]),
       offset=st.floats(0.2, 2.0))
def test_scalar_power_inequality_on_steps(vals, p, offset):
    grid = np.geomspace(0.2, 5.0, len(vals) + 1)
    rep = check_power("minus", p, p - 1 - offset, math.inf, step_path(grid, vals))
    assert rep.ok and rep.margin > 0


@settings(max_examples=15, deadline=None)
@given(lam=st.floats(0.3, 3.0), p=st.sampled_from([1.5, 2.0, 3.0]))
def test_dilation_invariance_of_ratio(lam, p):
    a = check_power("minus", p, 0.0, math.inf, gauss_path(1.0)).ratio
    b = check_power("minus", p, 0.0, math.inf, gauss_path(lam)).ratio
    assert math.isclose(a, b, rel_tol=1e-8)


@SETTINGS
@given(p=st.floats(1.0, 4.0), offset=st.floats(0.05, 3.0), k=st.integers(1, 3))
def test_product_constant_factorizes(p, offset, k):
    alpha = p - 1 - offset
    prod = 1.0
    for j in range(1, k + 1):
        beta = alpha - (j - 1) * p
        prod *= optimal_power_constant(PowerParams(p, beta))
    assert math.isclose(birman_product_constant(p, alpha, k), prod, rel_tol=1e-12)


@SETTINGS
@given(seed=st.integers(0, 2 ** 32 - 1), p=st.floats(1.0, 6.0))
def test_schatten_norm_properties(seed, p):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((2, 3, 3))
    assert schatten_norm(A + B, p) <= schatten_norm(A, p) + schatten_norm(B, p) + 1e-12
    assert schatten_norm(A, p) >= schatten_norm(A, p + 1) - 1e-12
    assert math.isclose(schatten_norm(A, 2), np.linalg.norm(A, "fro"), rel_tol=1e-12)
