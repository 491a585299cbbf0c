"""Hardy-type integral operators: first order, iterated, and two-weight.

Three independent evaluation routes are provided:

* :func:`hardy_apply` -- one adaptive integral of the factorial kernel;
* :class:`HardyAccumulator` -- all orders ``1..l`` at once, propagated between
  cached anchor points with the Taylor-shift identity
  ``H_k(x) = local_k(y, x) + sum_m (x - y)**m / m! * H_{k-m}(y)``;
* :func:`iterated_equals_kernel` -- genuinely nested first-order integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import HypothesisError, NonConvergent
from .paths import ScalarPath, custom_path, sampled_path
from .quadrature import _EPS, DEFAULT_CONFIG, QuadConfig, QuadResult, _WG, _WGK, _XGK, integrate
from .weights import WeightSpec

__all__ = [
    "MINUS",
    "PLUS",
    "HardyKind",
    "HardyAccumulator",
    "hardy_apply",
    "hardy_path",
    "iterated_equals_kernel",
]

MINUS = "minus"
PLUS = "plus"


def _direction(d: str) -> str:
    d = str(d).lower()
    if d in ("minus", "-", "m"):
        return MINUS
    if d in ("plus", "+", "p"):
        return PLUS
    raise HypothesisError(f"direction must be 'minus' or 'plus', got {d!r}")


@dataclass(frozen=True)
class HardyKind:
    direction: str = MINUS
    order: int = 1
    phi: Optional[WeightSpec] = None
    psi: Optional[WeightSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "direction", _direction(self.direction))
        if int(self.order) != self.order or self.order < 1:
            raise HypothesisError(f"order must be a positive integer, got {self.order}")
        object.__setattr__(self, "order", int(self.order))
        if (self.phi is not None or self.psi is not None) and self.order != 1:
            raise HypothesisError("two-weight operators are first order only")

    @property
    def generalized(self) -> bool:
        return self.phi is not None or self.psi is not None


def _weighted_integrand(F: ScalarPath, psi: Optional[WeightSpec]):
    if psi is None:
        return F
    return lambda t: F(t) * psi(t)


def _ends(F: ScalarPath, lo, hi):
    lo = F.interval.a if lo is None else float(lo)
    hi = F.interval.b if hi is None else float(hi)
    return lo, hi


def _hints_for(F: ScalarPath, psi, lo, hi, extra=0.0):
    """Singularity hints for ``int psi F`` over (lo, hi)."""
    hints = []
    for e in (lo, hi):
        g = F.exponent_at(e)
        if g is None or not math.isfinite(g):
            continue
        if psi is not None:
            gp = psi.exponent_at(e) if e in (psi.interval.a, psi.interval.b) else 0.0
            if gp is None or not math.isfinite(gp):
                continue
            g += gp
        if math.isinf(e):
            g += extra
        hints.append((e, g))
    return hints


def hardy_apply(kind: HardyKind, F: ScalarPath, x: float, cfg: Optional[QuadConfig] = None,
                lo: Optional[float] = None, hi: Optional[float] = None) -> float:
    """``(H F)(x)`` by a single adaptive integral of the factorial kernel.

    ``lo``/``hi`` default to the ends of ``F``'s interval; for the Plus
    direction the kernel is ``(t - x)**(l - 1) / (l - 1)!``.
    """
    return _apply(kind, F, x, cfg, lo, hi).value


def _apply(kind, F, x, cfg, lo, hi):
    cfg = cfg or DEFAULT_CONFIG
    lo, hi = _ends(F, lo, hi)
    x = float(x)
    if not lo <= x <= hi:
        raise HypothesisError(f"x={x} lies outside [{lo}, {hi}]")
    if kind.generalized and F.nonnegative is False:
        raise HypothesisError("two-weight operators are applied to nonnegative F only")
    ell = kind.order
    fact = math.factorial(ell - 1)
    g = _weighted_integrand(F, kind.psi)
    if kind.direction == MINUS:
        a, b = max(lo, F.support[0]), min(x, F.support[1])

        def integrand(t):
            return (x - t) ** (ell - 1) / fact * g(t)
    else:
        a, b = max(x, F.support[0]), min(hi, F.support[1])

        def integrand(t):
            return (t - x) ** (ell - 1) / fact * g(t)

    if not a < b:
        return QuadResult(0.0, 0.0, 0, True)
    hints = _hints_for(F, kind.psi, a, b, extra=float(ell - 1))
    if kind.direction == MINUS and ell > 1 and b == x:
        hints = [h for h in hints if h[0] != b]
    res = integrate(integrand, a, b, cfg, points=F.cut_points(a, b), hints=hints)
    if kind.phi is not None:
        ph = float(kind.phi(np.array([x]))[0])
        return QuadResult(ph * res.value, abs(ph) * res.err_estimate, res.subdivisions_used, res.converged)
    return res


class HardyAccumulator:
    """Evaluate ``H_1 F, ..., H_l F`` at many points, reusing earlier work.

    Every evaluated point becomes an anchor.  A new point is reached from the
    nearest anchor on the integration side: a single 21-point Kronrod panel
    covers the gap when its embedded error estimate is small enough, and an
    adaptive integral is used otherwise.  Errors are propagated through the
    Taylor-shift formula and reported per point.

    Tolerances are applied relative to the values only: ``H F`` may be tiny
    near the starting end while a singular outer weight magnifies it.
    """

    def __init__(self, F: ScalarPath, direction: str = MINUS, order: int = 1,
                 cfg: Optional[QuadConfig] = None, lo: Optional[float] = None,
                 hi: Optional[float] = None, psi: Optional[WeightSpec] = None,
                 phi: Optional[WeightSpec] = None):
        self.F = F
        self.direction = _direction(direction)
        self.order = int(order)
        self.user_cfg = cfg or DEFAULT_CONFIG
        self.cfg = replace(self.user_cfg, abs_tol=1e-300)
        self.lo, self.hi = _ends(F, lo, hi)
        self.psi = psi
        self.phi = phi
        self._g = _weighted_integrand(F, psi)
        self._fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        self._cuts = np.array(F.cut_points(self.lo, self.hi))
        start = self.lo if self.direction == MINUS else self.hi
        if math.isinf(start) and self.direction == MINUS:
            raise HypothesisError("the Minus operator needs a finite lower end")
        # anchors sorted by key (x for Minus, -x for Plus)
        self._keys = np.array([self._key(start)])
        self._vals = np.zeros((1, self.order))
        self._errs = np.zeros((1, self.order))
        self.n_adaptive = 0

    def _key(self, x):
        return x if self.direction == MINUS else -x

    # local pieces ------------------------------------------------------
    def _local_gk(self, y, x):
        """GK21 of the kernels on the gaps between anchors ``y`` and targets ``x``."""
        lo = np.minimum(x, y)
        hi = np.maximum(x, y)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        t = mid[:, None] + half[:, None] * _XGK[None, :]
        gv = np.asarray(self._g(t.ravel()), dtype=float).reshape(t.shape)
        dist = np.abs(x[:, None] - t)
        ks = np.arange(self.order)
        kern = dist[:, :, None] ** ks[None, None, :] / self._fact[ks][None, None, :]
        vals = kern * gv[:, :, None]
        k = half[:, None] * np.einsum("j,njk->nk", _WGK, vals)
        g = half[:, None] * np.einsum("j,njk->nk", _WG, vals)
        err = np.abs(k - g)
        return k, err

    def _local_adaptive(self, y, x):
        lo, hi = (y, x) if self.direction == MINUS else (x, y)
        ks = np.arange(self.order)
        fact = self._fact[ks]

        def f(t):
            d = np.abs(x - t)
            return (d[:, None] ** ks[None, :] / fact[None, :]) * np.asarray(self._g(t))[:, None]

        hints = _hints_for(self.F, self.psi, lo, hi, extra=float(self.order - 1))
        try:
            res = integrate(f, lo, hi, self.cfg, points=self.F.cut_points(lo, hi), hints=hints)
        except NonConvergent as exc:
            # relative accuracy can stall on rounding noise; the caller's abs_tol is still met
            res = exc.result
            if res is None or not np.all(np.isfinite(res.value)) or res.err_estimate > self.user_cfg.abs_tol:
                raise
        self.n_adaptive += 1
        return np.asarray(res.value, dtype=float), np.full(self.order, float(res.err_estimate))

    def _shift(self, dx, vals):
        """``sum_{m<k} dx**m / m! * vals[k-m-1]`` for k = 1..l (anchor moved by ``dx``)."""
        out = np.zeros(self.order)
        if math.isinf(dx):
            return out
        for k in range(1, self.order + 1):
            out[k - 1] = sum(dx ** m / self._fact[m] * vals[k - m - 1] for m in range(k))
        return out

    # public ---------------------------------------------------------------
    def evaluate_all(self, xq):
        """Return ``(values, errors)`` of shape ``(n, order)`` for H_1..H_l."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        n = len(xq)
        vals = np.zeros((n, self.order))
        errs = np.zeros((n, self.order))
        if self.direction == MINUS:
            inside = (xq > self.lo) & (xq <= self.hi) & np.isfinite(xq)
        else:
            inside = (xq >= self.lo) & (xq < self.hi) & np.isfinite(xq)
        if self.direction == MINUS:
            order = np.argsort(xq, kind="stable")
        else:
            order = np.argsort(-xq, kind="stable")
        order = order[inside[order]]
        if not len(order):
            return self._finish(xq, vals, errs)
        xs = xq[order]
        keys = self._key(xs)
        # anchor for each target: previous target in the sweep, or a cached
        # anchor when one sits between consecutive targets
        pos = np.searchsorted(self._keys, keys, side="right") - 1
        anchors = np.empty(len(xs))
        anchors[0] = self._key(self._keys[pos[0]])
        anchors[1:] = xs[:-1]
        use_cache = np.zeros(len(xs), dtype=bool)
        use_cache[0] = True
        use_cache[1:] = self._keys[pos[1:]] > keys[:-1]
        cached = np.flatnonzero(use_cache)
        anchors[cached] = self._key(self._keys[pos[cached]])
        finite_gap = np.isfinite(anchors)
        loc = np.zeros((len(xs), self.order))
        lerr = np.zeros((len(xs), self.order))
        gk_ok = np.zeros(len(xs), dtype=bool)
        if finite_gap.any():
            idx = np.flatnonzero(finite_gap)
            k, e = self._local_gk(anchors[idx], xs[idx])
            a_lo = np.minimum(anchors[idx], xs[idx])
            a_hi = np.maximum(anchors[idx], xs[idx])
            singular_end = np.zeros(len(idx), dtype=bool)
            for end in (self.F.support[0], self.F.support[1]):
                g = self.F.exponent_at(end)
                if g is not None and g < 0:
                    singular_end |= (a_lo == end) | (a_hi == end)
            has_cut = np.zeros(len(idx), dtype=bool)
            if len(self._cuts):
                has_cut = np.searchsorted(self._cuts, a_lo, side="right") < np.searchsorted(self._cuts, a_hi, side="left")
            ok = np.all(np.isfinite(k), axis=1) & ~singular_end & ~has_cut
            loc[idx] = k
            lerr[idx] = e
            gk_ok[idx] = ok
        cfg = self.cfg
        running = None
        running_err = None
        for j in range(len(xs)):
            if use_cache[j]:
                base_v, base_e = self._vals[pos[j]], self._errs[pos[j]]
            else:
                base_v, base_e = running, running_err
            dx = abs(xs[j] - anchors[j])
            shifted = self._shift(dx, base_v)
            shifted_e = self._shift(dx, base_e)
            lv, le = loc[j], lerr[j]
            tol = np.maximum(cfg.abs_tol, cfg.rel_tol * 1e-2 * np.abs(shifted + lv))
            if not (gk_ok[j] and np.all(le <= tol)):
                lv, le = self._local_adaptive(anchors[j], xs[j])
            running = shifted + lv
            # rounding in the shift sum and the local piece
            running_err = shifted_e + le + 4.0 * _EPS * (np.abs(shifted) + np.abs(lv))
            out_i = order[j]
            vals[out_i] = running
            errs[out_i] = running_err
        self._insert(keys, vals[order], errs[order])
        return self._finish(xq, vals, errs)

    def _finish(self, xq, vals, errs):
        if self.phi is not None:
            ph = np.asarray(self.phi(xq), dtype=float)[:, None]
            return vals * ph, errs * np.abs(ph)
        return vals, errs

    def _insert(self, keys, vals, errs):
        k = np.concatenate([self._keys, keys])
        # existing anchors first so they win ties
        k, first = np.unique(k, return_index=True)
        self._keys = k
        self._vals = np.concatenate([self._vals, vals])[first]
        self._errs = np.concatenate([self._errs, errs])[first]

    def __call__(self, xq):
        """Highest-order values ``H_l F`` at ``xq``."""
        return self.evaluate_all(xq)[0][:, -1]

    def with_errors(self, xq):
        v, e = self.evaluate_all(xq)
        return v[:, -1], e[:, -1]


def hardy_path(kind: HardyKind, F: ScalarPath, grid, cfg: Optional[QuadConfig] = None,
               lo: Optional[float] = None, hi: Optional[float] = None) -> ScalarPath:
    """Sampled path of ``(H F)`` on ``grid`` (prefix/suffix reuse via anchors)."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise HypothesisError("grid must be strictly ascending")
    llo, hhi = _ends(F, lo, hi)
    if grid[0] < llo or grid[-1] > hhi:
        raise HypothesisError("grid must lie inside the operator's interval")
    acc = HardyAccumulator(F, kind.direction, kind.order, cfg, llo, hhi, psi=kind.psi, phi=kind.phi)
    vals, errs = acc.evaluate_all(grid)
    v = vals[:, -1]
    if len(grid) == 1:
        path = custom_path(lambda x, c=v[0]: np.full_like(np.asarray(x, dtype=float), c),
                           F.interval, name="hardy_sampled")
    else:
        path = sampled_path(grid, v, F.interval)
    object.__setattr__(path, "params", {**path.params, "errors": errs[:, -1].tolist()})
    return path


def iterated_equals_kernel(F: ScalarPath, ell: int, x: float, cfg: Optional[QuadConfig] = None,
                           direction: str = MINUS, lo: Optional[float] = None,
                           hi: Optional[float] = None):
    """Compare the nested l-fold integral with the one-shot kernel form at ``x``.

    The nested route composes first-order operators: level ``j`` is a
    first-order accumulator applied to level ``j - 1`` as a black-box path,
    so it shares no formula with the kernel route.  Returns
    ``(nested, kernel, diff)``.
    """
    if ell not in (1, 2, 3, 4):
        raise HypothesisError("nested evaluation supports l in {1, 2, 3, 4}")
    direction = _direction(direction)
    llo, hhi = _ends(F, lo, hi)
    kernel = hardy_apply(HardyKind(direction, ell), F, x, cfg, llo, hhi)
    level = F
    for _ in range(ell - 1):
        acc = HardyAccumulator(level, direction, 1, cfg, llo, hhi)
        lead = level.exponent_at(llo) if direction == MINUS else None
        tail = None
        if direction == PLUS and level.tail_exponent is not None:
            tail = level.tail_exponent + 1.0
        if direction == MINUS and lead is not None:
            lead = lead + 1.0
        level = custom_path(acc, level.interval, name="nested",
                            breakpoints=level.breakpoints + tuple(level.support),
                            lead_exponent=lead, tail_exponent=tail)
    nested = hardy_apply(HardyKind(direction, 1), level, x, cfg, llo, hhi)
    return nested, kernel, nested - kernel
