"""Scalar test functions F on an interval, closed-form or sampled.

A :class:`ScalarPath` wraps a vectorized callable together with what the
integrators need to know about it: kinks and jumps, local power exponents at
the ends of its support, and optional derivative / antiderivative oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, HypothesisError, MissingOracle
from .weights import Interval, _as_interval

__all__ = [
    "ScalarPath",
    "exp_path",
    "poly_exp_path",
    "gauss_path",
    "constant_path",
    "zero_path",
    "power_path",
    "power_cutoff_path",
    "power_tail_path",
    "bump_path",
    "step_path",
    "sampled_path",
    "custom_path",
    "norm_path",
    "path_from_json",
    "FAMILIES",
]


@dataclass(frozen=True, eq=False)
class ScalarPath:
    """A scalar function on ``interval``.

    ``support`` is a closed range outside of which the function vanishes.
    ``lead_exponent`` / ``tail_exponent`` describe the behaviour
    ``|x - s0|**g`` at the lower end of the support and ``|x|**g`` (or
    ``|s1 - x|**g``) at the upper end; ``-inf`` marks super-polynomial decay.
    ``derivs[n]`` is the n-th derivative (``derivs[0]`` is the function).
    """

    func: Callable
    interval: Interval
    name: str = "custom"
    params: dict = field(default_factory=dict)
    breakpoints: tuple = ()
    support: Optional[tuple] = None
    lead_exponent: Optional[float] = None
    tail_exponent: Optional[float] = None
    derivs: tuple = ()
    antiderivative: Optional[Callable] = None
    nonnegative: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, "interval", _as_interval(self.interval))
        sup = self.support if self.support is not None else (self.interval.a, self.interval.b)
        sup = (max(float(sup[0]), self.interval.a), min(float(sup[1]), self.interval.b))
        object.__setattr__(self, "support", sup)
        bps = sorted({float(b) for b in self.breakpoints if self.interval.a < b < self.interval.b})
        object.__setattr__(self, "breakpoints", tuple(bps))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.func(x), dtype=float) * np.ones_like(x)
        s0, s1 = self.support
        return np.where((x >= s0) & (x <= s1), out, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"

    def derivative(self, n: int = 1) -> Callable:
        if n == 0:
            return self
        if n < len(self.derivs) and self.derivs[n] is not None:
            return self.derivs[n]
        raise MissingOracle(f"path '{self.name}' has no derivative oracle of order {n}")

    def exponent_at(self, endpoint) -> Optional[float]:
        """Local exponent at a support end (``None`` if unknown, 0 if smooth and nonzero)."""
        e = float(endpoint)
        s0, s1 = self.support
        if e == s0:
            return self.lead_exponent
        if e == s1:
            return self.tail_exponent
        return None

    def cut_points(self, lo, hi):
        """Breakpoints and support ends strictly inside (lo, hi)."""
        pts = set(self.breakpoints) | {float(s) for s in self.support if math.isfinite(s)}
        return tuple(sorted(p for p in pts if lo < p < hi))

    def scaled(self, lam: float) -> "ScalarPath":
        f = self.func
        ds = tuple((lambda x, d=d: lam * np.asarray(d(x))) if d is not None else None for d in self.derivs)
        anti = self.antiderivative
        return replace(
            self,
            func=lambda x: lam * np.asarray(f(x)),
            name="zero" if lam == 0 else self.name,
            params={**self.params, "scale": lam * self.params.get("scale", 1.0)},
            derivs=ds,
            antiderivative=(lambda x: lam * np.asarray(anti(x))) if anti is not None else None,
            nonnegative=self.nonnegative if lam >= 0 else None,
        )

    def __add__(self, other: "ScalarPath") -> "ScalarPath":
        if not isinstance(other, ScalarPath):
            return NotImplemented
        iv = Interval(min(self.interval.a, other.interval.a), max(self.interval.b, other.interval.b))
        sup = (min(self.support[0], other.support[0]), max(self.support[1], other.support[1]))
        lead = _min_opt(self.exponent_at(sup[0]) if self.support[0] == sup[0] else None,
                        other.exponent_at(sup[0]) if other.support[0] == sup[0] else None)
        tail = _max_opt(self.exponent_at(sup[1]) if self.support[1] == sup[1] else None,
                        other.exponent_at(sup[1]) if other.support[1] == sup[1] else None)
        return ScalarPath(
            lambda x: self(x) + other(x), iv, name=f"({self.name}+{other.name})",
            breakpoints=self.breakpoints + other.breakpoints + tuple(self.support) + tuple(other.support),
            support=sup, lead_exponent=lead, tail_exponent=tail,
            nonnegative=bool(self.nonnegative and other.nonnegative),
        )

    def to_json(self) -> dict:
        if self.name not in FAMILIES:
            raise TypeError(f"path '{self.name}' has no JSON form")
        return {"family": self.name, **self.params, "interval": self.interval.to_json()}


def _min_opt(*vals):
    v = [x for x in vals if x is not None]
    return min(v) if v else None


def _max_opt(*vals):
    v = [x for x in vals if x is not None]
    return max(v) if v else None


_HALF_LINE = Interval(0.0, math.inf)


def exp_path(rate: float = 1.0, interval=_HALF_LINE, nderiv: int = 6) -> ScalarPath:
    """``exp(-rate x)``."""
    r = float(rate)
    ds = tuple((lambda x, n=n: (-r) ** n * np.exp(-r * x)) for n in range(nderiv + 1))
    return ScalarPath(ds[0], interval, "exp", {"rate": r}, lead_exponent=0.0,
                      tail_exponent=-math.inf, derivs=ds,
                      antiderivative=lambda x: -np.exp(-r * x) / r, nonnegative=True)


def poly_exp_path(m: int = 1, rate: float = 1.0, interval=_HALF_LINE, nderiv: int = 6) -> ScalarPath:
    """``x**m exp(-rate x)`` with exact derivatives via polynomial algebra."""
    m, r = int(m), float(rate)
    # f^(n) = P_n(x) e^{-r x},  P_{n+1} = P_n' - r P_n
    polys = [Polynomial([0] * m + [1])]
    for _ in range(nderiv):
        polys.append(polys[-1].deriv() - r * polys[-1])
    ds = tuple((lambda x, P=P: P(x) * np.exp(-r * x)) for P in polys)
    return ScalarPath(ds[0], interval, "poly_exp", {"m": m, "rate": r},
                      lead_exponent=float(m), tail_exponent=-math.inf, derivs=ds, nonnegative=True)


def gauss_path(width: float = 1.0, interval=_HALF_LINE) -> ScalarPath:
    """``exp(-(x/width)**2)``."""
    s = float(width)
    return ScalarPath(lambda x: np.exp(-(x / s) ** 2), interval, "gauss", {"width": s},
                      lead_exponent=0.0, tail_exponent=-math.inf, nonnegative=True)


def constant_path(value: float = 1.0, interval=_HALF_LINE) -> ScalarPath:
    c = float(value)
    iv = _as_interval(interval)
    ds = (lambda x: np.full_like(np.asarray(x, dtype=float), c),) + (lambda x: np.zeros_like(np.asarray(x, dtype=float)),) * 4
    return ScalarPath(ds[0], iv, "constant" if c else "zero", {"value": c},
                      lead_exponent=0.0, tail_exponent=0.0, derivs=ds,
                      antiderivative=lambda x: c * np.asarray(x, dtype=float), nonnegative=c >= 0)


def zero_path(interval=_HALF_LINE) -> ScalarPath:
    return constant_path(0.0, interval)


def power_path(sigma: float, interval=_HALF_LINE) -> ScalarPath:
    """``x**sigma`` on a subinterval of (0, inf)."""
    s = float(sigma)
    iv = _as_interval(interval)

    def d(n):
        coef = float(np.prod([s - j for j in range(n)])) if n else 1.0
        return lambda x: coef * np.power(x, s - n)

    return ScalarPath(d(0), iv, "power", {"sigma": s},
                      lead_exponent=s if iv.a == 0 else 0.0,
                      tail_exponent=s if math.isinf(iv.b) else 0.0,
                      derivs=tuple(d(n) for n in range(6)), nonnegative=True)


def power_cutoff_path(sigma: float, x_cut: float = 1.0, interval=_HALF_LINE) -> ScalarPath:
    """``x**sigma`` on (0, x_cut], zero beyond."""
    s, c = float(sigma), float(x_cut)
    return ScalarPath(lambda x: np.power(x, s), interval, "power_cutoff", {"sigma": s, "x_cut": c},
                      breakpoints=(c,), support=(0.0, c), lead_exponent=s, tail_exponent=0.0,
                      nonnegative=True)


def power_tail_path(sigma: float, x_start: float = 1.0, interval=_HALF_LINE) -> ScalarPath:
    """``x**sigma`` on [x_start, inf), zero before."""
    s, c = float(sigma), float(x_start)
    return ScalarPath(lambda x: np.power(x, s), interval, "power_tail", {"sigma": s, "x_start": c},
                      breakpoints=(c,), support=(c, math.inf), lead_exponent=0.0, tail_exponent=s,
                      nonnegative=True)


def bump_path(m: int = 4, lo: float = 0.0, hi: float = 1.0, interval=_HALF_LINE) -> ScalarPath:
    """Polynomial bump ``((x-lo)(hi-x))**m`` on [lo, hi], zero elsewhere.

    It is ``C^(m-1)`` globally, so derivatives up to order ``m - 1`` are exact
    everywhere.
    """
    m, lo, hi = int(m), float(lo), float(hi)
    if not hi > lo:
        raise DomainError("bump needs lo < hi")
    P = Polynomial([-lo, 1.0]) * Polynomial([hi, -1.0])
    P = P ** m
    polys = [P]
    for _ in range(max(m - 1, 0)):
        polys.append(polys[-1].deriv())
    # factored value: no cancellation near the support ends
    ds = (lambda x: ((np.asarray(x, dtype=float) - lo) * (hi - np.asarray(x, dtype=float))) ** m,)
    ds += tuple((lambda x, Q=Q: Q(x)) for Q in polys[1:])
    return ScalarPath(ds[0], interval, "bump", {"m": m, "lo": lo, "hi": hi},
                      breakpoints=(lo, hi), support=(lo, hi), lead_exponent=float(m),
                      tail_exponent=float(m), derivs=tuple(_supported(d, lo, hi) for d in ds),
                      nonnegative=True)


def _supported(d, lo, hi):
    def g(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), d(x), 0.0)
    return g


def step_path(grid: Sequence[float], values: Sequence[float], interval=_HALF_LINE) -> ScalarPath:
    """Right-continuous step function: ``values[i]`` on ``[grid[i], grid[i+1])``."""
    g = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(g) != len(v) + 1 or np.any(np.diff(g) <= 0):
        raise HypothesisError("step path needs ascending grid with len(grid) == len(values) + 1")

    def f(x):
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(g, x, side="right") - 1
        inside = (i >= 0) & (i < len(v))
        return np.where(inside, v[np.clip(i, 0, len(v) - 1)], 0.0)

    return ScalarPath(f, interval, "step", {"grid": g.tolist(), "values": v.tolist()},
                      breakpoints=tuple(g), support=(g[0], g[-1]), lead_exponent=0.0,
                      tail_exponent=0.0, nonnegative=bool(np.all(v >= 0)))


def sampled_path(grid: Sequence[float], values: Sequence[float], interval=None) -> ScalarPath:
    """Piecewise-linear interpolant of samples, zero outside the grid."""
    g = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=float)
    if g.ndim != 1 or g.shape != v.shape or len(g) < 2 or np.any(np.diff(g) <= 0):
        raise HypothesisError("sampled path needs a strictly ascending grid matching its values")
    if not np.all(np.isfinite(v)):
        raise HypothesisError("sampled values must be finite")
    iv = _as_interval(interval) if interval is not None else Interval(g[0], g[-1])
    slopes = np.diff(v) / np.diff(g)

    def d1(x):
        i = np.clip(np.searchsorted(g, x, side="right") - 1, 0, len(slopes) - 1)
        return np.where((x >= g[0]) & (x <= g[-1]), slopes[i], 0.0)

    return ScalarPath(lambda x: np.interp(x, g, v), iv, "sampled",
                      {"grid": g.tolist(), "values": v.tolist()},
                      breakpoints=tuple(g), support=(g[0], g[-1]), lead_exponent=0.0,
                      tail_exponent=0.0, derivs=(None, d1), nonnegative=bool(np.all(v >= 0)))


def custom_path(func: Callable, interval=_HALF_LINE, **kw) -> ScalarPath:
    return ScalarPath(func, interval, kw.pop("name", "custom"), **kw)


def norm_path(components: Sequence[ScalarPath]) -> ScalarPath:
    """Euclidean norm ``x -> ||(F_1(x), ..., F_d(x))||`` of a vector of paths."""
    comps = list(components)
    if not comps:
        raise HypothesisError("norm of an empty vector path")
    iv = Interval(min(c.interval.a for c in comps), max(c.interval.b for c in comps))
    sup = (min(c.support[0] for c in comps), max(c.support[1] for c in comps))
    bps = tuple(b for c in comps for b in c.breakpoints + tuple(c.support))

    def f(x):
        return np.sqrt(sum(np.asarray(c(x)) ** 2 for c in comps))

    lead = _min_opt(*[c.exponent_at(sup[0]) for c in comps if c.support[0] == sup[0]])
    tail = _max_opt(*[c.exponent_at(sup[1]) for c in comps if c.support[1] == sup[1]])
    return ScalarPath(f, iv, "norm", {}, breakpoints=bps, support=sup,
                      lead_exponent=lead, tail_exponent=tail, nonnegative=True)


FAMILIES = {
    "exp": exp_path,
    "poly_exp": poly_exp_path,
    "gauss": gauss_path,
    "constant": constant_path,
    "zero": zero_path,
    "power": power_path,
    "power_cutoff": power_cutoff_path,
    "power_tail": power_tail_path,
    "bump": bump_path,
    "step": step_path,
    "sampled": sampled_path,
}


def path_from_json(obj) -> ScalarPath:
    obj = dict(obj)
    fam = obj.pop("family")
    if fam not in FAMILIES:
        raise HypothesisError(f"unknown path family {fam!r}; choose from {sorted(FAMILIES)}")
    obj.pop("scale", None)
    if fam == "zero":
        obj.pop("value", None)
    return FAMILIES[fam](**obj)
