"""Optimal power constants, Muckenhoupt functionals and their closed forms.

``muckenhoupt_A_tilde`` evaluates the split-point functional

    B(c) = (int_c^b v phi^p)^(1/p) * (int_a^c w^(-p'/p) psi^p')^(1/p')

(mirrored for the Plus direction) on the scan grid of :func:`sup_search`
using cumulative segment integrals, then refines the best node.  For
``p = 1`` the second factor is the running supremum of ``psi / w``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    BranchViolation,
    DegenerateExponent,
    DivergentIntegral,
    EvaluationFailure,
    HypothesisError,
    IntervalMismatch,
    QuadratureError,
)
from .hardy_ops import MINUS, PLUS, _direction
from .quadrature import DEFAULT_CONFIG, QuadConfig, _WG, _WGK, _XGK, integrate, scan_grid, sup_search
from .weights import DECREASING, INCREASING, FunctionWeight, Interval, MonotoneWeight, Power, WeightSpec

__all__ = [
    "PowerParams",
    "ConstantBracket",
    "holder_conjugate",
    "bracket_factor",
    "optimal_power_constant",
    "birman_product_constant",
    "iterated_power_constant",
    "muckenhoupt_A",
    "muckenhoupt_A_tilde",
    "adhoc_weights",
    "adhoc_closed_form_constant",
    "adhoc_maximizer_level",
    "power_weights",
    "power_bracket",
]


def holder_conjugate(p: float) -> float:
    return math.inf if p == 1 else p / (p - 1.0)


def bracket_factor(p: float) -> float:
    """``p**(1/p) * p'**(1/p')``, equal to 1 at ``p = 1``."""
    if p == 1:
        return 1.0
    q = holder_conjugate(p)
    return p ** (1.0 / p) * q ** (1.0 / q)


@dataclass(frozen=True)
class PowerParams:
    """Exponents of the power-weighted inequality on (0, b)."""

    p: float
    alpha: float
    branch: Optional[str] = None
    b: float = math.inf

    def __post_init__(self):
        if not self.p >= 1:
            raise HypothesisError(f"p must be >= 1, got {self.p}")
        k = self.alpha - self.p + 1.0
        if k == 0:
            raise DegenerateExponent(f"alpha = p - 1 = {self.alpha}: the constant degenerates to 0")
        natural = MINUS if k < 0 else PLUS
        br = natural if self.branch is None else _direction(self.branch)
        if br != natural:
            need = "alpha < p - 1" if br == MINUS else "alpha > p - 1"
            raise BranchViolation(f"{br} branch needs {need}; got p={self.p}, alpha={self.alpha}")
        object.__setattr__(self, "branch", br)
        if not self.b > 0:
            raise HypothesisError("upper endpoint b must be positive")


def optimal_power_constant(params: PowerParams) -> float:
    """``(|alpha - p + 1| / p)**p``."""
    if not isinstance(params, PowerParams):
        params = PowerParams(*params)
    return (abs(params.alpha - params.p + 1.0) / params.p) ** params.p


def birman_product_constant(p: float, alpha: float, k: int) -> float:
    """``prod_{j=1..k} |alpha - j p + 1|**p / p**(k p)``; zero when a factor vanishes."""
    if int(k) != k or k < 1:
        raise HypothesisError(f"k must be a positive integer, got {k}")
    out = 1.0
    for j in range(1, int(k) + 1):
        out *= (abs(alpha - j * p + 1.0) / p) ** p
    return out


def iterated_power_constant(p: float, alpha: float, ell: int) -> float:
    """Constant of the l-fold iterated inequality (same product as the chain)."""
    return birman_product_constant(p, alpha, ell)


@dataclass
class ConstantBracket:
    """``A`` together with the two-sided bound ``[A, p^(1/p) p'^(1/p') A]``."""

    A: float
    lower: float
    upper: float
    p: float
    c_star: float
    at_endpoint: Optional[str] = None
    unbounded: bool = False
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_A(cls, A, p, c_star, **kw):
        up = A if p == 1 else bracket_factor(p) * A
        return cls(A=A, lower=A, upper=up, p=p, c_star=c_star, **kw)

    def to_dict(self):
        d = asdict(self)
        d["C0_lower"] = d.pop("lower")
        d["C0_upper"] = d.pop("upper")
        return d


# ---------------------------------------------------------------------------
# numerical functional


def _exp_of(wt: Optional[WeightSpec], e):
    if wt is None:
        return 0.0
    if e not in (wt.interval.a, wt.interval.b):
        return 0.0
    return wt.exponent_at(e)


def _combo_hint(terms, e):
    """Exponent of ``prod wt**power`` at ``e``, or None."""
    total = 0.0
    for wt, pw in terms:
        g = _exp_of(wt, e)
        if g is None or not math.isfinite(g):
            return None
        total += pw * g
    return total


def _segment_integrals(f, nodes, cfg):
    """Integrals of ``f`` over consecutive node gaps; NaN where ``f`` overflows."""
    lo, hi = nodes[:-1], nodes[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[:, None] + half[:, None] * _XGK[None, :]
    with np.errstate(all="ignore"):
        vals = np.asarray(f(t.ravel()), dtype=float).reshape(t.shape)
        finite = np.all(np.isfinite(vals), axis=1)
        k = half * (vals @ _WGK)
        g = half * (vals @ _WG)
        err = np.abs(k - g)
    out = np.where(finite, k, np.nan)
    errs = np.where(finite, err, np.nan)
    redo = finite & (err > np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(k)))
    for i in np.flatnonzero(redo):
        try:
            r = integrate(f, lo[i], hi[i], cfg)
            out[i], errs[i] = r.value, r.err_estimate
        except QuadratureError:
            out[i] = errs[i] = np.nan
    with np.errstate(all="ignore"):
        smax = np.max(np.where(np.isfinite(vals), vals, -np.inf), axis=1)
    return out, errs, smax


def _trimmed_run(ok):
    """Longest run of True (the usable stretch of the scan grid)."""
    best, cur, start, best_start = 0, 0, 0, 0
    for i, v in enumerate(ok):
        if v:
            if cur == 0:
                start = i
            cur += 1
            if cur > best:
                best, best_start = cur, start
        else:
            cur = 0
    return best_start, best_start + best


def _end_integral(f, lo, hi, cfg, hint):
    """Integral reaching an endpoint: (value, err), value = inf when divergent."""
    if lo == hi:
        return 0.0, 0.0
    try:
        r = integrate(f, lo, hi, cfg, hints=[hint] if hint is not None else ())
    except DivergentIntegral:
        return math.inf, 0.0
    v = float(r.value)
    if not math.isfinite(v):
        return math.inf, 0.0
    return v, float(r.err_estimate)


def _end_sup(g, lo, hi, limit):
    """Supremum of ``g`` on (lo, hi) near an endpoint: dense log sample plus the limit."""
    a, b = lo, hi
    with np.errstate(all="ignore"):
        xs = _end_nodes(a, b, limit)
        xs = xs[(xs > min(a, b)) & (xs < max(a, b))]
        v = np.asarray(g(xs), dtype=float)
    v = v[~np.isnan(v)]
    return float(np.max(v)) if v.size else -math.inf


def _end_nodes(a, b, limit):
    if math.isinf(a):
        xs = b - np.logspace(0, 300, 400) * max(1.0, abs(b))
    elif math.isinf(b):
        xs = a + np.logspace(0, 300, 400) * max(1.0, abs(a))
    else:
        xs = a + (b - a) * np.logspace(-300, 0, 400) if limit == "lo" else b - (b - a) * np.logspace(-300, 0, 400)
    return xs


def muckenhoupt_A_tilde(v: WeightSpec, w: WeightSpec, phi: Optional[WeightSpec],
                        psi: Optional[WeightSpec], p: float, direction: str = MINUS,
                        cfg: Optional[QuadConfig] = None, n_grid: int = 512) -> ConstantBracket:
    """Two-weight Muckenhoupt functional and the bracket for the smallest constant.

    ``phi``/``psi`` default to 1.  ``A = inf`` is returned (not raised) when a
    factor diverges for every split point or the functional is unbounded.
    """
    cfg = cfg or DEFAULT_CONFIG
    # factors span hundreds of orders of magnitude: only relative accuracy is meaningful
    cfg = replace(cfg, abs_tol=1e-300)
    if not p >= 1:
        raise HypothesisError(f"p must be >= 1, got {p}")
    if v.interval != w.interval:
        raise IntervalMismatch("v and w must share an interval")
    direction = _direction(direction)
    iv = v.interval
    a, b = iv.a, iv.b
    q = holder_conjugate(p)

    def first(x):
        out = v(x)
        if phi is not None:
            out = out * phi(x) ** p
        return out

    def second(x):
        # p = 1: psi / w (sup-factor); p > 1: w^(-p'/p) psi^p'
        if p == 1:
            out = 1.0 / w(x)
            return out * psi(x) if psi is not None else out
        out = w(x) ** (-q / p)
        return out * psi(x) ** q if psi is not None else out

    first_terms = [(v, 1.0), (phi, p)]
    second_terms = [(w, -q / p if p > 1 else -1.0), (psi, q if p > 1 else 1.0)]

    _, nodes, _ = scan_grid(iv, n_grid)
    seg1, err1, _ = _segment_integrals(first, nodes, cfg)
    seg2, err2, smax = _segment_integrals(second, nodes, cfg)
    ok = np.isfinite(seg1) & np.isfinite(seg2)
    if not ok.any():
        raise EvaluationFailure("no finite segment on the scan grid", c=float(nodes[len(nodes) // 2]))
    s, e = _trimmed_run(ok)
    c = nodes[s:e + 1]
    seg1, seg2 = seg1[s:e], seg2[s:e]

    def end_hint(terms, e):
        g = _combo_hint(terms, e)
        return (e, g) if g is not None else None

    diag = {"grid": [float(c[0]), float(c[-1])], "nodes_used": int(len(c)), "nodes_total": int(len(nodes))}
    if p == 1:
        # running sup of psi/w over (a, c) for Minus, over (c, b) for Plus
        nv = np.asarray(second(c), dtype=float)
        segsup = np.fmax(np.fmax(smax[s:e], nv[:-1]), nv[1:])
        if direction == MINUS:
            end = _end_sup(second, a, c[0], "lo")
            W = np.maximum.accumulate(np.concatenate([[np.fmax(end, nv[0])], segsup]))
        else:
            end = _end_sup(second, c[-1], b, "hi")
            W = np.maximum.accumulate(np.concatenate([[np.fmax(end, nv[-1])], segsup[::-1]]))[::-1]
        h2 = None
    with np.errstate(all="ignore"):
        if direction == MINUS:
            h1, _ = _end_integral(first, c[-1], b, cfg, end_hint(first_terms, b))
            V = np.concatenate([np.cumsum(seg1[::-1])[::-1], [0.0]]) + h1
            if p > 1:
                h2, _ = _end_integral(second, a, c[0], cfg, end_hint(second_terms, a))
                W = np.concatenate([[0.0], np.cumsum(seg2)]) + h2
        else:
            h1, _ = _end_integral(first, a, c[0], cfg, end_hint(first_terms, a))
            V = np.concatenate([[0.0], np.cumsum(seg1)]) + h1
            if p > 1:
                h2, _ = _end_integral(second, c[-1], b, cfg, end_hint(second_terms, b))
                W = np.concatenate([np.cumsum(seg2[::-1])[::-1], [0.0]]) + h2
        diag["endpoint_integrals"] = {"first": h1, "second": h2}
        if math.isinf(h1) or (h2 is not None and math.isinf(h2)) or (p == 1 and np.isposinf(W).all()):
            return ConstantBracket(math.inf, math.inf, math.inf, p, float("nan"), None, True,
                                   {**diag, "reason": "a factor diverges for every split point"})
        logB = np.log(V) / p + (np.log(W) / q if p > 1 else np.log(W))
        B = np.exp(logB)
        B[~np.isfinite(V) | np.isnan(W)] = np.nan
        B[(V == 0) | (W == 0)] = 0.0

    # V and W are prefix (from a) or suffix (to b) integrals; each is refreshed
    # from the node on its own side so that only positive mass is added
    V_prefix = direction == PLUS
    W_prefix = direction == MINUS

    def side(x, prefix):
        if prefix:
            return int(np.clip(np.searchsorted(c, x, side="right") - 1, 0, len(c) - 1))
        return int(np.clip(np.searchsorted(c, x, side="left"), 0, len(c) - 1))

    def extend(arr, f, x, prefix):
        j = side(x, prefix)
        cj = c[j]
        if x == cj:
            return arr[j]
        d = integrate(f, cj, x, cfg).value
        return arr[j] + d if prefix else arr[j] - d

    def B_at(x):
        Vx = extend(V, first, x, V_prefix)
        if p == 1:
            j = side(x, W_prefix)
            pts = np.linspace(min(c[j], x), max(c[j], x), 65)
            with np.errstate(all="ignore"):
                loc = float(np.nanmax(second(pts)))
            Wx = max(W[j], loc)
            return float(Vx * Wx) if Vx > 0 else 0.0
        Wx = extend(W, second, x, W_prefix)
        if Vx <= 0 or Wx <= 0:
            return 0.0
        return float(math.exp(math.log(Vx) / p + math.log(Wx) / q))

    full = np.full(len(nodes), np.nan)
    full[s:e + 1] = B

    res = sup_search(B_at, iv, cfg, n_grid=n_grid, batch=lambda _: full)
    A = res.sup_value
    diag.update({"n_evals": res.n_evals, "grid_size": res.grid_size})
    if res.unbounded or not math.isfinite(A):
        return ConstantBracket(math.inf, math.inf, math.inf, p, res.c_star, res.at_endpoint, True, diag)
    return ConstantBracket.from_A(float(A), p, float(res.c_star), at_endpoint=res.at_endpoint,
                                  unbounded=False, diagnostics=diag)


def muckenhoupt_A(v: WeightSpec, w: WeightSpec, p: float, direction: str = MINUS,
                  cfg: Optional[QuadConfig] = None, n_grid: int = 512) -> ConstantBracket:
    """Muckenhoupt functional for the plain Hardy operator (``phi = psi = 1``)."""
    return muckenhoupt_A_tilde(v, w, None, None, p, direction, cfg, n_grid)


# ---------------------------------------------------------------------------
# ad hoc weights and closed forms


def adhoc_weights(w1: MonotoneWeight, w2: WeightSpec, p: float):
    """``(v, w, phi, psi)`` realizing the ad hoc inequality as a two-weight one.

    ``v = |w1'|``, ``w = w1^p |w1'|^(1-p) w2^p``, ``phi = 1``, ``psi = w2``.
    """
    if w1.interval != w2.interval:
        raise IntervalMismatch("w1 and w2 must share an interval")
    iv = w1.interval
    ends = (iv.a, iv.b)
    v = w1.rate_weight()

    def wfun(x):
        return w1.adhoc_factor(x, p) * w2(x) ** p

    exps = {}
    for e in ends:
        g1, gr = w1.exponent_at(e), w1.rate_exponent_at(e)
        g2 = w2.exponent_at(e) if e in (w2.interval.a, w2.interval.b) else 0.0
        if None not in (g1, gr, g2) and all(math.isfinite(t) for t in (g1, gr, g2)):
            exps[e] = p * g1 + (1.0 - p) * gr + p * g2
    w = FunctionWeight(wfun, iv, exponents=exps, name="adhoc_w")
    return v, w, None, w2


def _limits(w1: MonotoneWeight, direction):
    direction = _direction(direction)
    want = DECREASING if direction == MINUS else INCREASING
    if w1.direction != want:
        raise BranchViolation(f"{direction} direction needs a {want} w1, got {w1.direction}")
    la, lb = w1.endpoint_limits
    if not w1.limits_consistent():
        raise HypothesisError(f"endpoint limits {w1.endpoint_limits} contradict a {want} weight")
    # (start, end) ordered so that start >= end along the monotone direction
    return (la, lb) if direction == MINUS else (lb, la)


def adhoc_closed_form_constant(w1: MonotoneWeight, p: float, direction: str = MINUS) -> float:
    """Exact ``A~`` for the ad hoc weights, from the endpoint limits of ``w1``."""
    if not p >= 1:
        raise HypothesisError(f"p must be >= 1, got {p}")
    hi_lim, lo_lim = _limits(w1, direction)
    if hi_lim == 0 or (math.isinf(hi_lim) and math.isinf(lo_lim)):
        raise HypothesisError("w1 must have a positive finite limit on at least one side")
    ratio = 0.0 if (lo_lim == 0 or math.isinf(hi_lim)) else lo_lim / hi_lim
    if p == 1:
        return 1.0 - ratio
    q = holder_conjugate(p)
    return (p / q) ** (1.0 / q) * (1.0 - ratio ** (1.0 / p))


def adhoc_maximizer_level(w1: MonotoneWeight, p: float, direction: str = MINUS) -> float:
    """Value of ``w1`` at the interior maximizer (both limits finite and nonzero)."""
    hi_lim, lo_lim = _limits(w1, direction)
    q = holder_conjugate(p)
    return hi_lim ** (1.0 / p) * lo_lim ** (1.0 / q)


# ---------------------------------------------------------------------------
# power weights


def power_weights(p: float, alpha: float, b: float = math.inf):
    """``(v, w) = (x^(alpha-p), x^alpha)`` on (0, b)."""
    iv = Interval(0.0, b)
    return Power(alpha - p, iv), Power(alpha, iv)


def power_bracket(params: PowerParams, cfg: Optional[QuadConfig] = None, n_grid: int = 512) -> ConstantBracket:
    """Bracket of the power-weighted inequality's norm constant."""
    v, w = power_weights(params.p, params.alpha, params.b)
    return muckenhoupt_A(v, w, params.p, params.branch, cfg, n_grid)
