"""Two-sided evaluation of the scalar Hardy-type inequalities.

Every check returns an :class:`InequalityReport` with both sides, their error
bars and a verdict.  Inequalities are stated as ``LHS >= RHS`` with the
constant folded into the right side.

The right side needs ``H F`` at every quadrature node; a single
:class:`~hardy_lab.hardy_ops.HardyAccumulator` per check supplies those values
and the per-node errors, which are pushed through ``t -> t**p`` and integrated
alongside the main integrand so the RHS error bar contains them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .constants import PowerParams, birman_product_constant, optimal_power_constant
from .errors import (
    DivergentIntegral,
    HypothesisError,
    HypothesisGap,
)
from .hardy_ops import MINUS, PLUS, HardyAccumulator, _direction
from .paths import ScalarPath, norm_path, power_cutoff_path, power_tail_path
from .quadrature import DEFAULT_CONFIG, QuadConfig, integrate
from .weights import MonotoneWeight, WeightSpec, validate_weight_pair

__all__ = [
    "InequalityId",
    "Verdict",
    "InequalityReport",
    "classify",
    "check_adhoc",
    "check_power",
    "check_iterated",
    "check_diff_form",
    "check_birman_chain",
    "sharpness_family",
    "sharpness_probe",
]

VERDICT_FACTOR = 10.0


class InequalityId(str, Enum):
    ADHOC_MINUS = "adhoc-minus"
    ADHOC_PLUS = "adhoc-plus"
    POWER_MINUS = "power-minus"
    POWER_PLUS = "power-plus"
    ITERATED = "iterated"
    DIFF_FORM = "diff-form"
    BIRMAN_CHAIN = "birman-chain"


class Verdict(str, Enum):
    HOLDS = "Holds"
    HOLDS_WITHIN_ERROR = "HoldsWithinError"
    VIOLATED = "Violated"
    INCONCLUSIVE_DIVERGENT = "InconclusiveDivergent"
    # sweep rows only: the cell could not be evaluated
    DEGENERATE_EXPONENT = "DegenerateExponent"
    FAILED = "Failed"


def classify(margin: float, err_sum: float) -> Verdict:
    """Verdict from the margin and the summed error bars (threshold 10x errors)."""
    thr = VERDICT_FACTOR * err_sum
    if margin >= thr:
        return Verdict.HOLDS
    if abs(margin) < thr:
        return Verdict.HOLDS_WITHIN_ERROR
    return Verdict.VIOLATED


@dataclass
class InequalityReport:
    """Both sides of one inequality, ``LHS >= RHS``."""

    ineq: InequalityId
    params: dict
    lhs: float
    rhs: float
    quad_errors: tuple = (0.0, 0.0)
    verdict: Optional[Verdict] = None
    constant: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ineq = InequalityId(self.ineq)
        if self.verdict is None:
            if not (math.isfinite(self.lhs) and math.isfinite(self.rhs)):
                self.verdict = Verdict.INCONCLUSIVE_DIVERGENT
            else:
                self.verdict = classify(self.margin, sum(self.quad_errors))
        self.verdict = Verdict(self.verdict)

    @property
    def ratio(self) -> float:
        """``rhs / lhs``; NaN when both sides vanish."""
        if self.lhs == 0:
            return float("nan") if self.rhs == 0 else math.inf
        return self.rhs / self.lhs

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def ok(self) -> bool:
        return self.verdict in (Verdict.HOLDS, Verdict.HOLDS_WITHIN_ERROR)

    def to_dict(self) -> dict:
        return {
            "ineq": self.ineq.value,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "margin": self.margin,
            "quad_errors": list(self.quad_errors),
            "constant": self.constant,
            "verdict": self.verdict.value,
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# helpers


def _scalar(F) -> ScalarPath:
    """Reduce a vector of paths to its norm path and take absolute values."""
    if isinstance(F, (list, tuple)):
        return norm_path(F)
    if F.nonnegative:
        return F
    f = F.func
    return replace(F, func=lambda x: np.abs(f(x)), derivs=(), antiderivative=None, nonnegative=True)


def _path_json(F):
    try:
        return F.to_json()
    except (TypeError, AttributeError):
        return getattr(F, "name", "custom")


def _finite(*gs):
    return all(g is not None and math.isfinite(g) for g in gs)


def _safe_hint(e, g):
    """Keep a heuristic RHS hint only where it cannot flag divergence by itself."""
    if g is None or not math.isfinite(g):
        return None
    if math.isinf(e):
        return (e, g) if g < -1 else None
    return (e, g) if g > -1 else None


def _integral(f, lo, hi, cfg, hints=(), points=()):
    """(value, err); value = inf when the integral diverges."""
    if not lo < hi:
        return 0.0, 0.0
    hints = [h for h in hints if h is not None]
    try:
        r = integrate(f, lo, hi, cfg, points=points, hints=hints)
    except DivergentIntegral:
        return math.inf, 0.0
    val = np.asarray(r.value, dtype=float)
    if not np.all(np.isfinite(val)):
        return math.inf, 0.0
    return val, float(r.err_estimate)


def _rhs_with_inner(acc: HardyAccumulator, root, p, lo, hi, cfg, hints, points):
    """``int (root * H F)**p`` and the propagated error of ``H F``.

    ``root`` is the p-th root of the weight, applied before the power so
    far tails do not form ``0 * inf``.  Returns ``(value, outer_err + inner_err)``.
    """

    def f(x):
        vals, errs = acc.evaluate_all(x)
        h = np.abs(vals[:, -1])
        e = errs[:, -1]
        with np.errstate(all="ignore"):
            r = root(x)
            rh = r * h
            main = rh ** p
            inner = p * rh ** (p - 1.0) * r * e
        return np.stack([main, np.nan_to_num(inner, nan=0.0, posinf=0.0)], axis=-1)

    val, err = _integral(f, lo, hi, cfg, hints, points)
    if np.ndim(val) == 0:
        return math.inf, 0.0
    return float(val[0]), float(err + abs(val[1]))


def _zero_report(ineq, params, constant):
    return InequalityReport(ineq, params, 0.0, 0.0, (0.0, 0.0), None, constant,
                            {"note": "F vanishes identically"})


def _support_range(F, lo, hi):
    return max(lo, F.support[0]), min(hi, F.support[1])


# ---------------------------------------------------------------------------
# ad hoc inequality


def check_adhoc(branch: str, w1: MonotoneWeight, w2: WeightSpec, p: float, F,
                cfg: Optional[QuadConfig] = None, validate: bool = True) -> InequalityReport:
    """Ad hoc two-weight inequality built from a monotone ``w1``.

    ``LHS = int w1^p |w1'|^(1-p) w2^p F^p`` and
    ``RHS = p^(-p) int |w1'| (H(w2 F))^p`` with H integrating from the end
    where ``w1`` is largest.
    """
    cfg = cfg or DEFAULT_CONFIG
    branch = _direction(branch)
    ineq = InequalityId.ADHOC_MINUS if branch == MINUS else InequalityId.ADHOC_PLUS
    if validate:
        res = validate_weight_pair(w1, w2, p, branch, cfg)
        if not res.passed:
            raise HypothesisError(f"hypothesis check failed at '{res.failed_clause}': {res.message}")
    F = _scalar(F)
    iv = w1.interval
    a, b = iv.a, iv.b
    params = {"p": p, "branch": branch, "w1": repr(w1), "w2": type(w2).__name__, "F": _path_json(F)}
    const = p ** (-p)
    if F.is_zero:
        return _zero_report(ineq, params, const)

    def lhs_f(x):
        with np.errstate(all="ignore"):
            return w1.adhoc_factor(x, p) * w2(x) ** p * F(x) ** p

    s0, s1 = _support_range(F, a, b)
    points = F.cut_points(s0, s1)
    hints = []
    for e in (s0, s1):
        gF = F.exponent_at(e)
        if e in (a, b):
            g = [w1.exponent_at(e), w1.rate_exponent_at(e), w2.exponent_at(e), gF]
            if _finite(*g):
                hints.append((e, p * g[0] + (1 - p) * g[1] + p * g[2] + p * g[3]))
        elif _finite(gF):
            hints.append((e, p * gF))
    lhs, lhs_err = _integral(lhs_f, s0, s1, cfg, hints, points)
    lhs = float(lhs)
    diag = {}
    if math.isinf(lhs):
        return InequalityReport(ineq, params, math.inf, float("nan"), (0.0, 0.0),
                                Verdict.INCONCLUSIVE_DIVERGENT, const, {"reason": "LHS diverges"})

    acc = HardyAccumulator(F, branch, 1, cfg, a, b, psi=w2)
    lo, hi = (s0, b) if branch == MINUS else (a, s1)

    def root(x):
        with np.errstate(all="ignore"):
            return np.asarray(w1.rate(x), dtype=float) ** (1.0 / p)

    rhs, rhs_err = _rhs_with_inner(acc, root, p, lo, hi, cfg, [], F.cut_points(lo, hi))
    diag["inner_adaptive"] = acc.n_adaptive
    return InequalityReport(ineq, params, lhs, const * rhs, (lhs_err, const * rhs_err), None, const, diag)


# ---------------------------------------------------------------------------
# power weights, first order and iterated


def _iterated_params(branch, p, alpha, ell, b):
    if ell < 1 or int(ell) != ell:
        raise HypothesisError(f"order must be a positive integer, got {ell}")
    br = _direction(branch) if branch is not None else (MINUS if alpha < p - 1 else PLUS)
    if ell > 1 and br == PLUS and p - 1 < alpha <= ell * p - 1:
        raise HypothesisGap(
            f"plus branch of order {int(ell)} needs alpha > l p - 1 = {ell * p - 1}; "
            f"alpha = {alpha} lies in the excluded gap ({p - 1}, {ell * p - 1}]"
        )
    return PowerParams(p, alpha, br, b)


def _power_report(ineq, params: PowerParams, ell, F, cfg, extra=None):
    cfg = cfg or DEFAULT_CONFIG
    p, alpha, b, branch = params.p, params.alpha, params.b, params.branch
    F = _scalar(F)
    const = birman_product_constant(p, alpha, ell) if ell > 1 else optimal_power_constant(params)
    info = {"p": p, "alpha": alpha, "branch": branch, "b": b, "order": ell, "F": _path_json(F)}
    if extra:
        info.update(extra)
    if F.is_zero:
        return _zero_report(ineq, info, const)
    s0, s1 = _support_range(F, 0.0, b)
    if not s0 < s1:
        return _zero_report(ineq, info, const)
    g0, g1 = F.exponent_at(F.support[0]), F.exponent_at(F.support[1])

    def local(e, g, at_zero_exp):
        # exponent of x^alpha F^p near a support end
        if not _finite(g):
            return None
        if e == 0.0:
            return (e, at_zero_exp + p * g)
        if math.isinf(e):
            return (e, alpha + p * g)
        return (e, p * g)

    lhs_hints = []
    if s0 == F.support[0]:
        lhs_hints.append(local(s0, g0, alpha))
    if s1 == F.support[1]:
        lhs_hints.append(local(s1, g1, alpha))

    def lhs_f(x):
        with np.errstate(all="ignore"):
            return x ** alpha * F(x) ** p

    points = F.cut_points(s0, s1)
    lhs, lhs_err = _integral(lhs_f, s0, s1, cfg, lhs_hints, points)
    lhs = float(lhs)
    if math.isinf(lhs):
        return InequalityReport(ineq, info, math.inf, float("nan"), (0.0, 0.0),
                                Verdict.INCONCLUSIVE_DIVERGENT, const, {"reason": "LHS diverges"})

    beta = alpha - ell * p
    acc = HardyAccumulator(F, branch, ell, cfg, 0.0, b)
    if branch == MINUS:
        lo, hi = s0, b
        hints = []
        if _finite(g0):
            hints.append(_safe_hint(lo, alpha + p * g0 if lo == 0 else p * (ell + g0)))
        if math.isinf(hi) and _finite(g1):
            hints.append(_safe_hint(hi, alpha - p if (F.support[1] < hi or g1 < -1) else alpha + p * g1))
        elif math.isinf(hi) and g1 == -math.inf:
            hints.append(_safe_hint(hi, alpha - p))
    else:
        lo, hi = 0.0, s1
        hints = [_safe_hint(0.0, beta)] if s0 > 0 or (_finite(g0) and g0 > -1) else []
        if _finite(g1):
            hints.append(_safe_hint(hi, p * (ell + g1) if math.isfinite(hi) else alpha + p * g1))

    def root(x):
        with np.errstate(all="ignore"):
            return x ** (beta / p)

    rhs, rhs_err = _rhs_with_inner(acc, root, p, lo, hi, cfg, hints, F.cut_points(lo, hi))
    diag = {"inner_adaptive": acc.n_adaptive}
    if math.isinf(rhs):
        diag["reason"] = "RHS diverges"
    return InequalityReport(ineq, info, lhs, const * rhs, (lhs_err, const * rhs_err), None, const, diag)


def check_power(branch: Optional[str], p: float, alpha: float, b: float, F,
                cfg: Optional[QuadConfig] = None) -> InequalityReport:
    """``int_0^b x^alpha F^p >= (|alpha-p+1|/p)^p int_0^b x^(alpha-p) (H F)^p``."""
    params = PowerParams(p, alpha, branch, b)
    ineq = InequalityId.POWER_MINUS if params.branch == MINUS else InequalityId.POWER_PLUS
    return _power_report(ineq, params, 1, F, cfg)


def check_iterated(branch: Optional[str], p: float, alpha: float, ell: int, b: float, F,
                   cfg: Optional[QuadConfig] = None) -> InequalityReport:
    """Iterated inequality with the product constant and ``H_l``.

    The Plus branch requires ``alpha > l p - 1``; values in the gap raise
    :class:`HypothesisGap`.
    """
    params = _iterated_params(branch, p, alpha, ell, b)
    if int(ell) == 1:
        ineq = InequalityId.POWER_MINUS if params.branch == MINUS else InequalityId.POWER_PLUS
        return _power_report(ineq, params, 1, F, cfg)
    return _power_report(InequalityId.ITERATED, params, int(ell), F, cfg)


# ---------------------------------------------------------------------------
# differential forms


def _deriv_exponent(g, j):
    """Local exponent of the j-th derivative of ``|x - e|**g`` behaviour."""
    if not _finite(g):
        return None
    if float(g).is_integer() and g >= 0 and j > g:
        return 0.0
    return g - j


def check_birman_chain(p: float, alpha: float, n: int, k: int, f: ScalarPath, b: float = math.inf,
                       cfg: Optional[QuadConfig] = None,
                       ineq: InequalityId = InequalityId.BIRMAN_CHAIN) -> InequalityReport:
    """``int x^alpha |f^(n)|^p >= K int x^(alpha - k p) |f^(n-k)|^p`` for compactly supported f."""
    cfg = cfg or DEFAULT_CONFIG
    if not p >= 1:
        raise HypothesisError(f"p must be >= 1, got {p}")
    if int(n) != n or int(k) != k or not 1 <= k <= n:
        raise HypothesisError(f"need integers 1 <= k <= n, got n={n}, k={k}")
    n, k = int(n), int(k)
    const = birman_product_constant(p, alpha, k)
    info = {"p": p, "alpha": alpha, "n": n, "k": k, "b": b, "f": _path_json(f)}
    if f.is_zero:
        return _zero_report(ineq, info, const)
    s0, s1 = f.support
    if s0 < 0 or s1 > b or math.isinf(s1):
        raise HypothesisError(f"f must be compactly supported in (0, {b}); support is {f.support}")
    dn = f.derivative(n)
    dnk = f.derivative(n - k)
    points = f.cut_points(s0, s1)

    def hint(e, j, wexp):
        g = _deriv_exponent(f.exponent_at(e), j)
        if g is None:
            return None
        return (e, (wexp if e == 0 else 0.0) + p * g)

    def lhs_f(x):
        with np.errstate(all="ignore"):
            return x ** alpha * np.abs(dn(x)) ** p

    def rhs_f(x):
        with np.errstate(all="ignore"):
            return x ** (alpha - k * p) * np.abs(dnk(x)) ** p

    lhs, le = _integral(lhs_f, s0, s1, cfg, [hint(s0, n, alpha), hint(s1, n, alpha)], points)
    lhs = float(lhs)
    if math.isinf(lhs):
        return InequalityReport(ineq, info, math.inf, float("nan"), (0.0, 0.0),
                                Verdict.INCONCLUSIVE_DIVERGENT, const, {"reason": "LHS diverges"})
    beta = alpha - k * p
    rh = [hint(s0, n - k, beta), hint(s1, n - k, beta)]
    rhs, re = _integral(rhs_f, s0, s1, cfg, [h for h in rh if h and h[1] > -1], points)
    rhs = float(rhs)
    return InequalityReport(ineq, info, lhs, const * rhs, (le, const * re), None, const, {})


def check_diff_form(p: float, alpha: float, f: ScalarPath, b: float = math.inf,
                    cfg: Optional[QuadConfig] = None) -> InequalityReport:
    """First-derivative form ``int x^alpha |f'|^p >= C int x^(alpha-p) |f|^p`` (any alpha)."""
    return check_birman_chain(p, alpha, 1, 1, f, b, cfg, ineq=InequalityId.DIFF_FORM)


# ---------------------------------------------------------------------------
# sharpness


def sharpness_family(branch: str, p: float, alpha: float, eps: float) -> tuple:
    """Near-extremal ``F_eps`` and the upper end ``b`` it is tested on.

    Minus: ``x**((p-1-alpha)/p - 1 + eps)`` on (0, 1] and ``b = 1``.
    Plus: ``x**(-(alpha-p+1)/p - 1 - eps)`` on [1, inf) and ``b = inf``.
    """
    params = PowerParams(p, alpha, branch)
    if not 0 < eps < 1:
        raise HypothesisError(f"eps must lie in (0, 1), got {eps}")
    k = abs(alpha - p + 1.0)
    if params.branch == MINUS:
        return power_cutoff_path(k / p - 1.0 + eps, 1.0), 1.0
    return power_tail_path(-k / p - 1.0 - eps, 1.0), math.inf


def sharpness_probe(branch: str, p: float, alpha: float, eps_ladder: Sequence[float],
                    cfg: Optional[QuadConfig] = None) -> list:
    """``[(eps, rhs/lhs), ...]`` for the near-extremal family; ratios approach 1 as eps -> 0."""
    out = []
    for eps in eps_ladder:
        F, b = sharpness_family(branch, p, alpha, eps)
        rep = check_power(branch, p, alpha, b, F, cfg)
        out.append((float(eps), rep.ratio))
    return out
