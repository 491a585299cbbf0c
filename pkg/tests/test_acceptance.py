"""Acceptance gate: one test per criterion, each logging a PASS/FAIL line."""
import json
import math
import time

import numpy as np
import pytest

from hardy_lab.cli import run
from hardy_lab.constants import (adhoc_weights, adhoc_closed_form_constant, adhoc_maximizer_level,
                                 muckenhoupt_A, muckenhoupt_A_tilde)
from hardy_lab.opvalued import (LoewnerVerdict, check_operator_ineq, counterexample_search,
                                random_psd_step_path)
from hardy_lab.paths import exp_path
from hardy_lab.verify import Verdict, check_power, sharpness_probe
from hardy_lab.weights import (ExpDecay, FunctionWeight, Interval, MonotoneWeight, Power, ScaledPower,
                               ShiftedPower, Tabulated)


def _log(log, k, ok, detail):
    line = f"[{k}] {'PASS' if ok else 'FAIL'}: {detail}"
    log.append(line)
    print(line)
    return ok


def _report(tmp_path, argv, name="out.json"):
    out = tmp_path / name
    code = run(argv + ["--json", str(out), "--deterministic"])
    return code, json.loads(out.read_text())


# 1 -------------------------------------------------------------------------

def test_1_classical_constant(tmp_path, acceptance_log):
    t0 = time.perf_counter()
    code, rep = _report(tmp_path, ["constant", "--kind", "power", "--p", "2", "--alpha", "0",
                                   "--direction", "minus"])
    br = muckenhoupt_A(Power(-2.0), Power(0.0), 2.0, "minus")
    dt = time.perf_counter() - t0
    res = rep["result"]
    smallest = res["optimal_constant"] ** (-1 / 2)  # norm constant from the sharp 1/4
    ok = (code == 0 and abs(res["A"] - 1) < 1e-6 and abs(res["C0_lower"] - 1) < 1e-6
          and abs(res["C0_upper"] - 2) < 1e-6 and abs(res["C0_upper"] - smallest) < 1e-6
          and abs(br.A - 1) < 1e-6 and abs(br.upper - 2) < 1e-6 and dt < 1.0)
    _log(acceptance_log, 1, ok, f"A={res['A']:.12g} bracket=[{res['C0_lower']:.12g}, {res['C0_upper']:.12g}] "
                               f"sharp={smallest:.12g} t={dt:.2f}s")
    assert ok


# 2 -------------------------------------------------------------------------

_H = Interval(0, math.inf)


def _fw(f, d, iv, lim):
    return FunctionWeight(f, iv, derivative=d, limits=lim)


_DECREASING = [
    ("exp", ExpDecay(1)),
    ("exp_finite", ExpDecay(1, Interval(0, 2))),
    ("shifted_inverse", ShiftedPower(1, -1)),
    ("shifted_inverse_sq_finite", ShiftedPower(1, -2, interval=Interval(0, 1))),
    ("inverse", ScaledPower(1, -1)),
    ("rational", _fw(lambda x: (2 + x) / (1 + x), lambda x: -1 / (1 + x) ** 2, _H, {0: 2, math.inf: 1})),
    ("tabulated", Tabulated([0, 1, 2, 3], [3, 2, 1.5, 1.2])),
]
_INCREASING = [
    ("shifted_linear", ShiftedPower(1, 1)),
    ("square", Power(2)),
    ("one_minus_exp", _fw(lambda x: -np.expm1(-x), lambda x: np.exp(-x), _H, {0: 0, math.inf: 1})),
    ("sqrt_finite", ShiftedPower(1, 0.5, interval=Interval(0, 3))),
    ("rational", _fw(lambda x: (1 + 2 * x) / (1 + x), lambda x: 1 / (1 + x) ** 2, _H, {0: 1, math.inf: 2})),
]


def test_2_closed_form_agreement(acceptance_log):
    t0 = time.perf_counter()
    worst, worst_max, n = 0.0, 0.0, 0
    for direction, family, mono in [("minus", _DECREASING, "decreasing"), ("plus", _INCREASING, "increasing")]:
        for _, base in family:
            w1 = MonotoneWeight(base, mono)
            for p in (1.0, 1.5, 2.0, 3.0):
                v, w, phi, psi = adhoc_weights(w1, Power(0, base.interval), p)
                br = muckenhoupt_A_tilde(v, w, phi, psi, p, direction)
                cf = adhoc_closed_form_constant(w1, p, direction)
                worst = max(worst, abs(br.A - cf) / cf)
                n += 1
                la, lb = w1.endpoint_limits
                if p > 1 and 0 < la < math.inf and 0 < lb < math.inf:
                    level = adhoc_maximizer_level(w1, p, direction)
                    got = float(np.asarray(w1(np.array([br.c_star])))[0])
                    worst_max = max(worst_max, abs(got - level) / level)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and worst_max <= 1e-4 and dt < 30 and n >= 5 * 4 * 2
    _log(acceptance_log, 2, ok, f"{n} cases, worst rel {worst:.2e}, maximizer rel {worst_max:.2e}, t={dt:.1f}s")
    assert ok


# 3 -------------------------------------------------------------------------

def test_3_sharpness_ladder(acceptance_log):
    ladder = [0.2, 0.1, 0.05, 0.02, 0.01]
    ok = True
    notes = []
    for p, alpha in [(2, 0), (2, 0.5), (3, 0), (1.5, -1)]:
        assert alpha < p - 1
        ratios = [r for _, r in sharpness_probe("minus", p, alpha, ladder)]
        mono = all(a < b for a, b in zip(ratios, ratios[1:]))
        ok &= mono
        notes.append(f"({p},{alpha}) last={ratios[-1]:.6f}")
        if (p, alpha) == (2, 0):
            closed = [0.25 / (0.5 + e) ** 2 for e in ladder]
            err = max(abs(a - b) for a, b in zip(ratios, closed))
            ok &= ratios[-1] > 0.95 and err < 1e-6
            notes.append(f"closed-form err {err:.1e}")
    _log(acceptance_log, 3, ok, "; ".join(notes))
    assert ok


# 4 -------------------------------------------------------------------------

_PS = [1.5, 2.0, 2.5, 3.0]
_BUMP = {"family": "bump", "m": 6, "lo": 0.5, "hi": 2.0}
_FAMS = [{"family": "exp"}, {"family": "poly_exp", "m": 1}, {"family": "gauss"}, {"family": "bump", "m": 4,
                                                                                 "lo": 0.5, "hi": 2.0}]


def _suite_config():
    sweeps = [
        {"base": {"ineq": "power-minus"}, "grid": {"p": _PS, "alpha": [-0.75, -0.5, 0.0, 0.25], "family": _FAMS}},
        {"base": {"ineq": "power-plus"}, "grid": {"p": _PS, "alpha": [3.5, 4.0, 5.0], "family": _FAMS[:3]}},
        {"base": {"ineq": "iterated", "branch": "minus"},
         "grid": {"p": _PS, "alpha": [-0.5, 0.0], "ell": [2, 3], "family": _FAMS[:2]}},
        {"base": {"ineq": "iterated", "branch": "plus", "family": "exp"},
         "grid": {"p": _PS, "alpha": [9.0, 10.0], "ell": [2, 3]}},
        {"base": {"ineq": "diff-form"}, "grid": {"p": _PS, "alpha": [0.0, 2.0], "family": [_BUMP]}},
    ]
    for n in (1, 2, 3):
        sweeps.append({"base": {"ineq": "birman-chain", "n": n},
                       "grid": {"p": _PS, "alpha": [0.0, 1.0], "k": list(range(1, n + 1)), "family": [_BUMP]}})
    return {"schema": "hardy-lab/v1", "sweeps": sweeps}


def test_4_inequality_suite(tmp_path, acceptance_log):
    conf = tmp_path / "suite.json"
    conf.write_text(json.dumps(_suite_config()))
    t0 = time.perf_counter()
    code, rep = _report(tmp_path, ["sweep", str(conf), "--csv", str(tmp_path / "suite.csv")])
    dt = time.perf_counter() - t0
    rows = rep["result"]["rows"]
    violated = [r for r in rows if r["verdict"] == Verdict.VIOLATED.value]
    bad = [r for r in rows if r["verdict"] != Verdict.HOLDS.value or not r["margin"] > 0]
    ok = code == 0 and len(rows) >= 200 and not violated and not bad and dt < 300
    _log(acceptance_log, 4, ok, f"{len(rows)} cells, {len(violated)} violated, {len(bad)} non-strict, t={dt:.1f}s")
    assert ok, bad[:3]


# 5 -------------------------------------------------------------------------

def test_5_frullani(acceptance_log):
    rep = check_power("minus", 2.0, 0.0, math.inf, exp_path())
    ok = abs(rep.lhs - 0.5) < 1e-8 and abs(rep.rhs - math.log(2) / 2) < 1e-8
    _log(acceptance_log, 5, ok, f"lhs={rep.lhs:.15g} rhs={rep.rhs:.15g} (ln2/2={math.log(2) / 2:.15g})")
    assert ok


# 6 -------------------------------------------------------------------------

def _cells_6():
    for p in (1.0, 1.5, 2.0):
        for alpha in (0.0, -0.5, 0.3 * (p - 1)):
            yield p, alpha


def test_6_operator_suite(acceptance_log):
    t0 = time.perf_counter()
    worst, n, failures, skipped = math.inf, 0, 0, []
    for p, alpha in _cells_6():
        if alpha == p - 1:
            # degenerate exponent (alpha = p - 1): no inequality to check
            skipped.append((p, alpha))
            continue
        rng = np.random.default_rng([int(10 * p), int(round(100 * alpha)) + 100])
        for _ in range(1000):
            F = random_psd_step_path(rng, 2, 2)
            rep = check_operator_ineq("minus", p, alpha, F, proof_checks=False)
            scale = float(np.linalg.norm(rep.lhs_matrix, 2))
            rel = rep.min_eig_diff / scale
            worst = min(worst, rel)
            n += 1
            if rep.verdict != LoewnerVerdict.LOEWNER_HOLDS or rep.min_eig_diff < -1e-8 * scale:
                failures += 1
    # dimension-1 consistency
    rng = np.random.default_rng(7)
    d1 = 0.0
    for p, alpha, br in [(1.5, 0.0, "minus"), (2.0, -0.5, "minus"), (1.5, 2.0, "plus"), (2.0, 3.0, "plus")]:
        for _ in range(10):
            F = random_psd_step_path(rng, 1, 3)
            rep = check_operator_ineq(br, p, alpha, F, proof_checks=False)
            sc = check_power(br, p, alpha, math.inf, F.scalar_path())
            d1 = max(d1, abs(rep.min_eig_diff - sc.margin) / max(1.0, abs(sc.lhs)))
    dt = time.perf_counter() - t0
    ok = failures == 0 and d1 <= 1e-9 and dt < 300
    _log(acceptance_log, 6, ok, f"{n} paths in {len(list(_cells_6())) - len(skipped)} cells "
                               f"(degenerate skipped: {skipped}), failures={failures}, "
                               f"worst rel min_eig={worst:.3e}, d=1 diff={d1:.1e}, t={dt:.1f}s")
    assert ok


# 7 -------------------------------------------------------------------------

def test_7_trace_vs_loewner(acceptance_log):
    t0 = time.perf_counter()
    res = counterexample_search(3.0, 0.0, dim=2, n_steps=2, seed=42, budget=100_000)
    dt = time.perf_counter() - t0
    ok = res.trace_invariant_ok and res.n_candidates == 100_000 and res.best.trace_holds
    found = res.best.min_eig_diff < -res.best.tol
    _log(acceptance_log, 7, ok, f"{res.n_candidates} candidates, trace invariant "
                               f"{'intact' if res.trace_invariant_ok else 'BROKEN'} (min rel trace margin "
                               f"{res.min_trace_margin:.3e}); most negative Loewner margin "
                               f"{res.best.min_eig_diff:.6e} ({'violation found' if found else 'no violation'}), "
                               f"t={dt:.1f}s")
    assert ok


# 8 -------------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["counterexample", "--p", "3", "--budget", "3000", "--seed", "42"],
    ["verify", "--ineq", "power-minus", "--p", "2", "--alpha", "0", "--family", "exp", "--seed", "1"],
    ["sharpness", "--p", "2", "--alpha", "0", "--seed", "3"],
])
def test_8_reproducible(tmp_path, acceptance_log, argv):
    out = tmp_path / "rep.json"
    bodies = []
    for _ in range(2):
        assert run(argv + ["--json", str(out), "--deterministic"]) == 0
        bodies.append(out.read_bytes())
    ok = bodies[0] == bodies[1]
    _log(acceptance_log, 8, ok, f"byte-identical reports for `{' '.join(argv[:1])}` ({len(bodies[0])} bytes)")
    assert ok
