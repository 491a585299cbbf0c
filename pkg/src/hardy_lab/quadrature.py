"""Adaptive Gauss-Kronrod integration and a scan-plus-golden supremum search.

Integrands are vectorized: ``f(x)`` receives a 1-d float array and returns an
array of shape ``(len(x),)`` or ``(len(x), *shape)``.  Improper ranges are
mapped onto finite ones (``x = t/(1-t)`` by default), and endpoint power
singularities ``x**gamma`` are removed by ``x = u**(1/(1+gamma))`` when the
caller supplies a hint.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DivergentIntegral, EvaluationFailure, NonConvergent

__all__ = [
    "QuadConfig",
    "QuadResult",
    "SupResult",
    "integrate",
    "integrate_vector",
    "sup_search",
    "scan_grid",
    "golden_section_max",
]

# Gauss-Kronrod (10, 21) pair, QUADPACK qk21 constants.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_XGK = np.concatenate([_XGK, -_XGK[-2::-1]])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WGK = np.concatenate([_WGK, _WGK[-2::-1]])
_WG10 = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])
_WG = np.zeros(21)
_WG[1:10:2] = _WG10
_WG[11:20:2] = _WG10[::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and budget for :func:`integrate`.

    ``singularity_exponent_hints`` is a tuple of ``(endpoint, exponent)``
    pairs: near a finite endpoint ``e`` the integrand behaves like
    ``|x - e|**exponent``; for ``endpoint = inf`` it decays like ``x**exponent``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    singularity_exponent_hints: tuple = ()

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        object.__setattr__(
            self,
            "singularity_exponent_hints",
            tuple((float(e), float(g)) for e, g in self.singularity_exponent_hints),
        )

    def with_hints(self, *hints):
        """Return a copy with extra hints; ``None`` exponents are dropped."""
        extra = tuple((e, g) for e, g in hints if g is not None and np.isfinite(g))
        return replace(self, singularity_exponent_hints=self.singularity_exponent_hints + extra)

    def without_hints(self):
        return replace(self, singularity_exponent_hints=())


DEFAULT_CONFIG = QuadConfig()


@dataclass
class QuadResult:
    value: object
    err_estimate: object
    subdivisions_used: int = 0
    converged: bool = True

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# variable maps


@dataclass
class _Piece:
    s_lo: float
    s_hi: float
    xmap: Callable  # s -> (x, |dx/ds|)
    label: str = ""
    # (x_edge, factor): the part of the range beyond x_edge is added as
    # factor * f(x_edge), exact for a pure power law with the hinted exponent
    tail: Optional[tuple] = None


# hinted power maps stop this far from the singular end (relative to the
# piece scale) so that x and integrand products stay inside double range
_TAIL_REACH = 1e60


def _identity(s):
    return s, np.ones_like(s)


def _left_power(u, m):
    def xmap(s):
        return u + s ** m, m * s ** (m - 1.0)

    return xmap


def _right_power(v, m):
    def xmap(s):
        return v - s ** m, m * s ** (m - 1.0)

    return xmap


def _right_inf_rational(u, c):
    def xmap(t):
        d = 1.0 - t
        return u + c * t / d, c / (d * d)

    return xmap


def _right_inf_power(u, c, m):
    def xmap(s):
        return u + c * (s ** (-m) - 1.0), c * m * s ** (-m - 1.0)

    return xmap


def _negate(xmap):
    def wrapped(s):
        x, j = xmap(s)
        return -x, j

    return wrapped


def _hint_lookup(hints, endpoint):
    for e, g in hints:
        if e == endpoint:
            return g
    return None


def _finite_piece(u, v, gu, gv):
    """Pieces covering the finite range [u, v] with optional endpoint hints."""
    use_u = gu is not None and gu < 0
    use_v = gv is not None and gv < 0
    if use_u and use_v:
        mid = 0.5 * (u + v)
        return _finite_piece(u, mid, gu, None) + _finite_piece(mid, v, None, gv)
    if use_u:
        m = 1.0 / (1.0 + gu)
        d = _min_offset(u, v)
        return [_Piece(d ** (1.0 / m), (v - u) ** (1.0 / m), _left_power(u, m), "left-power",
                       (u + d, d / (1.0 + gu)))]
    if use_v:
        m = 1.0 / (1.0 + gv)
        d = _min_offset(v, u)
        return [_Piece(d ** (1.0 / m), (v - u) ** (1.0 / m), _right_power(v, m), "right-power",
                       (v - d, d / (1.0 + gv)))]
    return [_Piece(u, v, _identity, "plain")]


def _min_offset(e, other):
    """Smallest offset from a singular end that is still resolved in x."""
    width = abs(other - e)
    return min(max(width / _TAIL_REACH, 1024 * _EPS * abs(e)), 1e-3 * width)


def _upper_inf_piece(u, gu, ginf):
    """Pieces covering [u, inf)."""
    c = max(1.0, abs(u))
    if gu is not None and gu < 0:
        split = u + c
        return _finite_piece(u, split, gu, None) + _upper_inf_piece(split, None, ginf)
    if ginf is not None and ginf < -1:
        m = -1.0 / (ginf + 1.0)
        s_min = (_TAIL_REACH + 1.0) ** (-1.0 / m)
        x_far = u + c * _TAIL_REACH
        return [_Piece(s_min, 1.0, _right_inf_power(u, c, m), "inf-power",
                       (x_far, x_far / (-1.0 - ginf)))]
    return [_Piece(0.0, 1.0, _right_inf_rational(u, c), "inf-rational")]


def _build_pieces(lo, hi, points, hints):
    for e, g in hints:
        if e in (lo, hi) and math.isfinite(e) and g <= -1:
            raise DivergentIntegral(f"endpoint {e}: integrand ~ |x-e|^{g} is not integrable")
        if e in (lo, hi) and math.isinf(e) and g >= -1:
            raise DivergentIntegral(f"tail ~ x^{g} at {e} is not integrable")
    cuts = [lo] + sorted({float(p) for p in points if lo < p < hi}) + [hi]
    if math.isinf(lo) and math.isinf(hi) and len(cuts) == 2:
        cuts = [lo, 0.0, hi]
    pieces = []
    for i in range(len(cuts) - 1):
        u, v = cuts[i], cuts[i + 1]
        gu = _hint_lookup(hints, u) if i == 0 else None
        gv = _hint_lookup(hints, v) if i == len(cuts) - 2 else None
        if math.isfinite(u) and math.isfinite(v):
            pieces += _finite_piece(u, v, gu, gv)
        elif math.isfinite(u):
            pieces += _upper_inf_piece(u, gu, gv)
        else:
            # (-inf, v]: mirror onto [-v, inf)
            for pc in _upper_inf_piece(-v, gv, gu):
                tail = (-pc.tail[0], pc.tail[1]) if pc.tail else None
                pieces.append(_Piece(pc.s_lo, pc.s_hi, _negate(pc.xmap), pc.label + "-neg", tail))
    return pieces


# ---------------------------------------------------------------------------
# adaptive core


def _eval_panels(f, piece, a, b):
    """Evaluate GK21 on panels [a_i, b_i] of one piece; arrays a, b of equal length."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    s = (mid[:, None] + half[:, None] * _XGK[None, :]).ravel()
    with np.errstate(all="ignore"):
        x, jac = piece.xmap(s)
        fx = np.asarray(f(x))
        if fx.shape[0] != s.shape[0]:
            raise ValueError("integrand must return one value per node")
        extra = fx.shape[1:]
        fx = fx * jac.reshape((-1,) + (1,) * len(extra))
    fx = fx.reshape((len(a), 21) + extra)
    kron = np.einsum("k,pk...->p...", _WGK, fx)
    gauss = np.einsum("k,pk...->p...", _WG, fx)
    hw = half.reshape((-1,) + (1,) * len(extra))
    kron = kron * hw
    gauss = gauss * hw
    resabs = np.einsum("k,pk...->p...", _WGK, np.abs(fx)) * np.abs(hw)
    diff = np.abs(kron - gauss)
    floor = 50.0 * _EPS * resabs
    errs = np.maximum(diff, floor)
    if extra:
        errs = errs.reshape(len(a), -1).max(axis=1)
    bad = ~np.isfinite(kron)
    if extra:
        bad = bad.reshape(len(a), -1).any(axis=1)
    errs = np.where(bad, np.inf, errs)
    return kron, errs


def _norm(v):
    return float(np.max(np.abs(v))) if np.ndim(v) else abs(float(v))


def _adaptive(f, pieces, cfg, probe=None):
    heap = []
    probed = False
    frozen = []
    counter = 0
    value_shape = None
    for pi, pc in enumerate(pieces):
        vals, errs = _eval_panels(f, pc, np.array([pc.s_lo]), np.array([pc.s_hi]))
        value_shape = vals.shape[1:]
        heapq.heappush(heap, (-float(errs[0]), counter, pi, pc.s_lo, pc.s_hi, vals[0]))
        counter += 1

    def totals():
        items = [(it[2], it[3], it[5], -it[0]) for it in heap] + frozen
        items.sort(key=lambda t: (t[0], t[1]))
        if value_shape:
            val = np.sum(np.stack([t[2] for t in items]), axis=0)
        else:
            val = math.fsum(float(t[2]) for t in items) if all(np.isfinite(t[2]) for t in items) else float("nan")
        err = math.fsum(t[3] for t in items)
        return val, err

    total_val, total_err = totals()
    n_split = 0
    while True:
        tol = max(cfg.abs_tol, cfg.rel_tol * _norm(total_val)) if np.all(np.isfinite(total_val)) else 0.0
        if total_err <= tol and np.isfinite(total_err):
            return QuadResult(total_val, total_err, n_split, True), None
        if n_split >= cfg.max_subdivisions or not heap:
            break
        negerr, _, pi, a, b, val = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        width = b - a
        pc = pieces[pi]
        if (probe is not None and not probed and (a == pc.s_lo or b == pc.s_hi)
                and width < 1e-9 * (pc.s_hi - pc.s_lo)):
            probed = True
            if probe(pc, a, b):
                heapq.heappush(heap, (negerr, counter, pi, a, b, val))
                total_val, total_err = totals()
                return QuadResult(total_val, total_err, n_split, False), (-negerr, pi, a, b)
        if width <= 8 * _EPS * max(abs(mid), 1e-280) or not (a < mid < b):
            frozen.append((pi, a, val, -negerr))
            continue
        vals, errs = _eval_panels(f, pieces[pi], np.array([a, mid]), np.array([mid, b]))
        for k, (lo_k, hi_k) in enumerate(((a, mid), (mid, b))):
            heapq.heappush(heap, (-float(errs[k]), counter, pi, lo_k, hi_k, vals[k]))
            counter += 1
        n_split += 1
        if n_split % 64 == 0 or not np.isfinite(total_err):
            total_val, total_err = totals()
        else:
            total_val = total_val - val + vals[0] + vals[1]
            total_err = total_err + negerr + float(errs[0]) + float(errs[1])
    total_val, total_err = totals()
    worst = None
    items = [(-it[0], it[2], it[3], it[4]) for it in heap]
    if items:
        worst = max(items, key=lambda t: t[0])
    return QuadResult(total_val, total_err, n_split, False), worst


def _probe_divergence(f, piece, s_a, s_b, cfg):
    """Ladder of truncations toward the end of ``piece`` nearest the given panel.

    Returns True if successive increments fail to shrink (value keeps growing).
    """
    at_lo = abs(s_a - piece.s_lo) <= abs(piece.s_hi - s_b)
    edge = piece.s_lo if at_lo else piece.s_hi
    h = (piece.s_hi - piece.s_lo) / 2.0
    sub = replace(cfg, max_subdivisions=400, singularity_exponent_hints=())
    values = []
    floor = 64 * _EPS * abs(edge)
    for k in range(12):
        delta = h * 10.0 ** (-3 * (k + 1))
        if delta <= floor or delta < 1e-300:
            break
        lo_s, hi_s = (edge + delta, edge + h) if at_lo else (edge - h, edge - delta)
        res, _ = _adaptive(f, [_Piece(lo_s, hi_s, piece.xmap)], sub)
        values.append(_norm(res.value))
    if not np.all(np.isfinite(values)):
        return True
    incs = np.diff(values)[-3:]
    if len(incs) < 3:
        return False
    return bool(all(abs(incs[i]) > 0 and abs(incs[i + 1]) >= 0.7 * abs(incs[i]) for i in range(2)))


def _tail_sum(f, pieces):
    tails = [pc.tail for pc in pieces if pc.tail is not None]
    if not tails:
        return None
    xs = np.array([t[0] for t in tails])
    with np.errstate(all="ignore"):
        fx = np.asarray(f(xs))
    w = np.array([t[1] for t in tails]).reshape((-1,) + (1,) * (fx.ndim - 1))
    return np.sum(fx * w, axis=0)


def integrate(f, lo, hi, cfg: Optional[QuadConfig] = None, *, points: Iterable[float] = (),
              hints: Sequence = ()) -> QuadResult:
    """Integrate a vectorized ``f`` over ``(lo, hi)``; endpoints may be infinite.

    ``points`` are interior breakpoints (kinks, jumps); ``hints`` are extra
    ``(endpoint, exponent)`` pairs merged with those in ``cfg``.

    Raises :class:`DivergentIntegral` or :class:`NonConvergent`.
    """
    cfg = cfg or DEFAULT_CONFIG
    lo = float(lo)
    hi = float(hi)
    if lo == hi:
        return QuadResult(0.0, 0.0, 0, True)
    if lo > hi:
        res = integrate(f, hi, lo, cfg, points=points, hints=hints)
        return QuadResult(-res.value, res.err_estimate, res.subdivisions_used, res.converged)
    all_hints = tuple(cfg.singularity_exponent_hints) + tuple(
        (float(e), float(g)) for e, g in hints if g is not None and np.isfinite(g)
    )
    pieces = _build_pieces(lo, hi, points, all_hints)
    res, worst = _adaptive(f, pieces, cfg, probe=lambda pc, a, b: _probe_divergence(f, pc, a, b, cfg))
    if res.converged:
        corr = _tail_sum(f, pieces)
        if corr is None:
            return res
        if not np.all(np.isfinite(corr)):
            raise NonConvergent(f"power-law remainder at an end of ({lo}, {hi}) is not finite", res)
        return QuadResult(res.value + corr, res.err_estimate + 50 * _EPS * _norm(corr),
                          res.subdivisions_used, True)
    if worst is not None:
        _, pi, s_a, s_b = worst
        if _probe_divergence(f, pieces[pi], s_a, s_b, cfg):
            raise DivergentIntegral(
                f"integral over ({lo}, {hi}) diverges (truncation ladder keeps growing)", res
            )
    raise NonConvergent(
        f"integral over ({lo}, {hi}) did not reach tolerance after "
        f"{res.subdivisions_used} subdivisions (err {res.err_estimate:.3e})",
        res,
    )


def integrate_vector(f, lo, hi, cfg: Optional[QuadConfig] = None, *, points=(), hints=()) -> QuadResult:
    """Entrywise integral of a Hermitian-matrix-valued integrand.

    All entries share one subdivision tree; integrand samples are replaced by
    their Hermitian part so the returned matrix is exactly Hermitian.
    ``err_estimate`` is the matrix of per-entry bounds (all equal to the
    global max-entry bound).
    """

    def herm(x):
        v = np.asarray(f(x))
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ValueError("matrix integrand must return shape (n, d, d)")
        return 0.5 * (v + np.conj(np.swapaxes(v, 1, 2)))

    res = integrate(herm, lo, hi, cfg, points=points, hints=hints)
    val = 0.5 * (res.value + np.conj(res.value.T))
    err = np.full(val.shape, float(res.err_estimate))
    return QuadResult(val, err, res.subdivisions_used, res.converged)


# ---------------------------------------------------------------------------
# supremum search


@dataclass
class SupResult:
    c_star: float
    sup_value: float
    at_endpoint: Optional[str] = None  # None, "lower" or "upper"
    unbounded: bool = False
    n_evals: int = 0
    grid_size: int = 0

    def __iter__(self):
        yield self.c_star
        yield self.sup_value


def _endpoints(interval):
    if hasattr(interval, "a"):
        return float(interval.a), float(interval.b)
    a, b = interval
    return float(a), float(b)


def scan_grid(interval, n=512):
    """Scan nodes clustered (log-like) toward every endpoint.

    Returns ``(u, c, to_c)`` where ``c = to_c(u)`` and ``u`` is uniform.
    """
    a, b = _endpoints(interval)
    if math.isfinite(a) and math.isfinite(b):
        width = b - a
        lim = math.log(1e12)

        def to_c(u):
            return a + width / (1.0 + np.exp(-u))

    elif math.isfinite(a):
        s = max(1.0, abs(a))
        lo_u, hi_u = (math.log(1e-16), math.log(1e16)) if a == 0 else (math.log(1e-12), math.log(1e15))

        def to_c(u):
            return a + s * np.exp(u)

        u = np.linspace(lo_u, hi_u, n)
        return u, to_c(u), to_c
    elif math.isfinite(b):
        s = max(1.0, abs(b))
        lo_u, hi_u = (math.log(1e-16), math.log(1e16)) if b == 0 else (math.log(1e-12), math.log(1e15))

        def to_c(u):
            return b - s * np.exp(-u)

        u = np.linspace(-hi_u, -lo_u, n)
        return u, to_c(u), to_c
    else:
        lim = math.asinh(1e15)

        def to_c(u):
            return np.sinh(u)

    u = np.linspace(-lim, lim, n)
    c = to_c(u)
    return u, c, to_c


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(h, lo, hi, tol=1e-12, max_iter=200):
    """Maximize a unimodal scalar ``h`` on [lo, hi]; returns (argmax, max, evals)."""
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = h(x1), h(x2)
    n = 2
    while hi - lo > tol * max(1.0, abs(lo) + abs(hi)) and n < max_iter:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = h(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = h(x2)
        n += 1
    return (x1, f1, n) if f1 >= f2 else (x2, f2, n)


def _nonshrinking(vals):
    """True when the last three 16-node block increments do not shrink."""
    if len(vals) < 49:
        return False
    blocks = vals[-49::16]
    d = np.diff(blocks)
    # growth must also be visible relative to the value (not quadrature drift)
    if d.sum() < 1e-4 * abs(blocks[-1]):
        return False
    return bool(d[0] > 0 and d[1] >= 0.9 * d[0] and d[2] >= 0.9 * d[1])


def sup_search(g: Callable[[float], float], interval, cfg: Optional[QuadConfig] = None, *,
               n_grid: int = 512, batch: Optional[Callable] = None) -> SupResult:
    """Supremum of ``g`` over the open interval by grid scan + golden refinement.

    ``batch`` optionally evaluates ``g`` on the whole sorted scan grid at once
    (used for cumulative integrals).  NaN values are treated as out of
    numerical range and skipped; exceptions become :class:`EvaluationFailure`.
    """
    n_grid = max(int(n_grid), 256)
    u, c, to_c = scan_grid(interval, n_grid)

    def safe(ci):
        try:
            return float(g(float(ci)))
        except EvaluationFailure:
            raise
        except Exception as exc:  # noqa: BLE001 - rewrapped with location
            raise EvaluationFailure(f"evaluation failed at c={ci!r}: {exc}", c=float(ci)) from exc

    if batch is not None:
        vals = np.asarray(batch(c), dtype=float)
    else:
        vals = np.array([safe(ci) for ci in c])
    n_evals = len(c)
    ok = ~np.isnan(vals)
    if not ok.any():
        raise EvaluationFailure("function is NaN on the whole scan grid", c=float(c[0]))
    if np.isposinf(vals[ok]).any():
        i = int(np.flatnonzero(ok & np.isposinf(vals))[0])
        return SupResult(float(c[i]), math.inf, None, True, n_evals, n_grid)
    idx = np.flatnonzero(ok)
    best = int(idx[np.argmax(vals[idx])])
    if best == idx[-1] and best >= n_grid - 2:
        tail = vals[idx]
        if _nonshrinking(tail):
            return SupResult(float(c[best]), math.inf, "upper", True, n_evals, n_grid)
        return SupResult(float(c[best]), float(vals[best]), "upper", False, n_evals, n_grid)
    if best == idx[0] and best <= 1:
        head = vals[idx][::-1]
        if _nonshrinking(head):
            return SupResult(float(c[best]), math.inf, "lower", True, n_evals, n_grid)
        return SupResult(float(c[best]), float(vals[best]), "lower", False, n_evals, n_grid)
    lo_i = idx[max(np.searchsorted(idx, best) - 1, 0)]
    hi_i = idx[min(np.searchsorted(idx, best) + 1, len(idx) - 1)]

    def h(uu):
        v = safe(to_c(uu))
        return -math.inf if math.isnan(v) else v

    u_star, v_star, n_gold = golden_section_max(h, float(u[lo_i]), float(u[hi_i]))
    n_evals += n_gold
    if v_star >= vals[best]:
        return SupResult(float(to_c(u_star)), v_star, None, False, n_evals, n_grid)
    return SupResult(float(c[best]), float(vals[best]), None, False, n_evals, n_grid)
