"""Weight functions on real intervals, with exact values where closed forms exist.

Every weight is an immutable object that evaluates vectorially, knows its
derivative, its endpoint limits and its local power exponents at the
endpoints.  The exponents feed singularity hints to the quadrature module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DivergentIntegral,
    DomainError,
    HypothesisError,
    IntervalMismatch,
    QuadratureError,
)
from .quadrature import QuadConfig, QuadResult, integrate

__all__ = [
    "Interval",
    "WeightSpec",
    "Power",
    "ExpDecay",
    "ScaledPower",
    "ShiftedPower",
    "Tabulated",
    "Product",
    "FunctionWeight",
    "MonotoneWeight",
    "ValidationResult",
    "eval_weight",
    "weight_antiderivative",
    "validate_weight_pair",
    "weight_from_json",
    "DECREASING",
    "INCREASING",
]

DECREASING = "decreasing"
INCREASING = "increasing"


def _ext(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        return float(s)
    return float(v)


def _ext_json(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass(frozen=True)
class Interval:
    """Open interval (a, b) with extended-real endpoints."""

    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", _ext(self.a))
        object.__setattr__(self, "b", _ext(self.b))
        if math.isnan(self.a) or math.isnan(self.b) or not self.a < self.b:
            raise DomainError(f"interval needs a < b, got ({self.a}, {self.b})")

    def __iter__(self):
        yield self.a
        yield self.b

    def contains(self, x, closed=False):
        x = np.asarray(x, dtype=float)
        if closed:
            return (x >= self.a) & (x <= self.b)
        return (x > self.a) & (x < self.b)

    def to_json(self):
        return [_ext_json(self.a), _ext_json(self.b)]

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, Interval):
            return obj
        a, b = obj
        return cls(a, b)

    def interior_points(self, n=64):
        """Deterministic sample of ``n`` interior points, log-clustered at the ends."""
        a, b = self.a, self.b
        t = (np.arange(n) + 0.5) / n
        if math.isfinite(a) and math.isfinite(b):
            s = 0.5 * (1 - np.cos(np.pi * t))
            return a + (b - a) * s
        if math.isfinite(a):
            return a + np.logspace(-6, 6, n)
        if math.isfinite(b):
            return b - np.logspace(6, -6, n)
        return np.sinh(np.linspace(-14, 14, n))


def _as_interval(obj) -> Interval:
    if obj is None:
        return Interval(0.0, math.inf)
    if isinstance(obj, Interval):
        return obj
    return Interval.from_json(obj)


class WeightSpec:
    """Base class.  Subclasses implement ``_value`` and ``_deriv``.

    ``exponent_at(e)`` returns gamma with ``w(x) ~ C |x - e|**gamma`` near a
    finite endpoint ``e`` (``C |x|**gamma`` at an infinite one); ``-inf``
    means faster-than-power decay and ``None`` means unknown.
    """

    kind = "abstract"
    interval: Interval

    # evaluation -----------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return self._value(x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return self._deriv(x)

    def _value(self, x):
        raise NotImplementedError

    def _deriv(self, x):
        raise NotImplementedError

    # analytic metadata ----------------------------------------------------
    def exponent_at(self, endpoint) -> Optional[float]:
        return None

    def deriv_exponent_at(self, endpoint) -> Optional[float]:
        return None

    def limit(self, endpoint) -> float:
        """One-sided limit of the weight at an endpoint of its interval."""
        e = _ext(endpoint)
        if math.isinf(e):
            x = np.array([math.copysign(1e300, e)])
        else:
            inward = 1.0 if e == self.interval.a else -1.0
            x = np.array([e + inward * 1e-300 if e == 0 else e * (1 + inward * 1e-15) + inward * 1e-300])
        return float(self(x)[0])

    def is_closed_form(self) -> bool:
        return True

    def integral(self, lo, hi, cfg: Optional[QuadConfig] = None) -> QuadResult:
        """``int_lo^hi w``; exact (zero error) for closed forms."""
        return self._quad_integral(lo, hi, cfg)

    def _quad_integral(self, lo, hi, cfg=None):
        hints = []
        for e in (lo, hi):
            g = self.exponent_at(e) if e in (self.interval.a, self.interval.b) else None
            if g is not None and math.isfinite(g):
                hints.append((e, g))
        return integrate(lambda x: self(x), lo, hi, cfg, hints=hints)

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        raise NotImplementedError

    def __mul__(self, other):
        if isinstance(other, WeightSpec):
            return Product([self, other], self.interval)
        return NotImplemented


def _check_range(w: WeightSpec, lo, hi):
    lo, hi = _ext(lo), _ext(hi)
    iv = w.interval
    if lo < iv.a or hi > iv.b or lo > hi:
        raise DomainError(f"[{lo}, {hi}] is not inside the closure of ({iv.a}, {iv.b})")
    return lo, hi


def _power_integral(alpha, lo, hi):
    """Exact ``int_lo^hi x**alpha`` for 0 <= lo <= hi <= inf."""
    if lo == hi:
        return 0.0
    if alpha == -1.0:
        if lo == 0.0 or math.isinf(hi):
            raise DivergentIntegral(f"int x^-1 over ({lo}, {hi}) diverges")
        return math.log(hi / lo)
    q = alpha + 1.0
    if lo == 0.0 and q < 0:
        raise DivergentIntegral(f"int x^{alpha} near 0 diverges")
    if math.isinf(hi):
        if q > 0:
            raise DivergentIntegral(f"int x^{alpha} near infinity diverges")
        return -lo ** q / q
    return (hi ** q - lo ** q) / q


@dataclass(frozen=True, eq=False)
class ScaledPower(WeightSpec):
    """``coef * x**alpha`` on a subinterval of (0, inf)."""

    coef: float
    alpha: float
    interval: Interval = field(default_factory=lambda: Interval(0.0, math.inf))

    kind = "scaled_power"

    def __post_init__(self):
        object.__setattr__(self, "interval", _as_interval(self.interval))
        if not self.coef > 0:
            raise HypothesisError(f"coefficient must be positive, got {self.coef}")
        if self.interval.a < 0:
            raise DomainError("power weights live on subintervals of (0, inf)")

    def _value(self, x):
        return self.coef * np.power(x, self.alpha)

    def _deriv(self, x):
        if self.alpha == 0:
            return np.zeros_like(x)
        return self.coef * self.alpha * np.power(x, self.alpha - 1.0)

    def exponent_at(self, endpoint):
        e = _ext(endpoint)
        return self.alpha if e == 0 or math.isinf(e) else 0.0

    def deriv_exponent_at(self, endpoint):
        e = _ext(endpoint)
        if self.alpha == 0:
            return None
        return self.alpha - 1.0 if e == 0 or math.isinf(e) else 0.0

    def limit(self, endpoint):
        e = _ext(endpoint)
        if e == 0:
            return 0.0 if self.alpha > 0 else (self.coef if self.alpha == 0 else math.inf)
        if math.isinf(e):
            return math.inf if self.alpha > 0 else (self.coef if self.alpha == 0 else 0.0)
        return self.coef * e ** self.alpha

    def integral(self, lo, hi, cfg=None):
        lo, hi = _check_range(self, lo, hi)
        return QuadResult(self.coef * _power_integral(self.alpha, lo, hi), 0.0, 0, True)

    def validate_local_integrability(self):
        if self.interval.a == 0 and self.alpha <= -1:
            raise HypothesisError(f"x^{self.alpha} is not locally integrable at 0")
        return True

    def to_json(self):
        return {"kind": "scaled_power", "coef": self.coef, "alpha": self.alpha,
                "interval": self.interval.to_json()}


class Power(ScaledPower):
    """``x**alpha``."""

    kind = "power"

    def __init__(self, alpha, interval=None):
        object.__setattr__(self, "coef", 1.0)
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "interval", _as_interval(interval))
        self.__post_init__()

    def to_json(self):
        return {"kind": "power", "alpha": self.alpha, "interval": self.interval.to_json()}


@dataclass(frozen=True, eq=False)
class ShiftedPower(WeightSpec):
    """``coef * (x + shift)**alpha``; smooth on [0, inf) when ``shift > 0``."""

    shift: float
    alpha: float
    coef: float = 1.0
    interval: Interval = field(default_factory=lambda: Interval(0.0, math.inf))

    kind = "shifted_power"

    def __post_init__(self):
        object.__setattr__(self, "interval", _as_interval(self.interval))
        if self.interval.a + self.shift < 0 or not self.coef > 0:
            raise DomainError("x + shift must stay nonnegative and coef positive")

    def _value(self, x):
        return self.coef * np.power(x + self.shift, self.alpha)

    def _deriv(self, x):
        return self.coef * self.alpha * np.power(x + self.shift, self.alpha - 1.0)

    def exponent_at(self, endpoint):
        e = _ext(endpoint)
        if math.isinf(e) or e + self.shift == 0:
            return self.alpha
        return 0.0

    def deriv_exponent_at(self, endpoint):
        g = self.exponent_at(endpoint)
        e = _ext(endpoint)
        if self.alpha == 0:
            return None
        return g - 1.0 if (math.isinf(e) or e + self.shift == 0) else 0.0

    def limit(self, endpoint):
        e = _ext(endpoint)
        if math.isinf(e):
            return math.inf if self.alpha > 0 else (self.coef if self.alpha == 0 else 0.0)
        y = e + self.shift
        if y == 0:
            return 0.0 if self.alpha > 0 else (self.coef if self.alpha == 0 else math.inf)
        return self.coef * y ** self.alpha

    def integral(self, lo, hi, cfg=None):
        lo, hi = _check_range(self, lo, hi)
        v = _power_integral(self.alpha, lo + self.shift, hi + self.shift)
        return QuadResult(self.coef * v, 0.0, 0, True)

    def to_json(self):
        return {"kind": "shifted_power", "shift": self.shift, "alpha": self.alpha,
                "coef": self.coef, "interval": self.interval.to_json()}


@dataclass(frozen=True, eq=False)
class ExpDecay(WeightSpec):
    """``exp(-rate * x)``."""

    rate: float
    interval: Interval = field(default_factory=lambda: Interval(0.0, math.inf))

    kind = "exp_decay"

    def __post_init__(self):
        object.__setattr__(self, "interval", _as_interval(self.interval))
        if not self.rate > 0:
            raise HypothesisError(f"decay rate must be positive, got {self.rate}")

    def _value(self, x):
        return np.exp(-self.rate * x)

    def _deriv(self, x):
        return -self.rate * np.exp(-self.rate * x)

    def exponent_at(self, endpoint):
        e = _ext(endpoint)
        if e == math.inf:
            return -math.inf
        if e == -math.inf:
            return math.inf
        return 0.0

    deriv_exponent_at = exponent_at

    def limit(self, endpoint):
        e = _ext(endpoint)
        if e == math.inf:
            return 0.0
        if e == -math.inf:
            return math.inf
        return math.exp(-self.rate * e)

    def integral(self, lo, hi, cfg=None):
        lo, hi = _check_range(self, lo, hi)
        if lo == -math.inf:
            raise DivergentIntegral("exp(-rate x) is not integrable at -inf")
        v = -math.expm1(-self.rate * (hi - lo)) * math.exp(-self.rate * lo) / self.rate
        return QuadResult(v, 0.0, 0, True)

    def to_json(self):
        return {"kind": "exp_decay", "rate": self.rate, "interval": self.interval.to_json()}


class Tabulated(WeightSpec):
    """Piecewise-linear interpolant of nonnegative samples.

    The derivative is the piecewise slope (right-continuous, left slope at
    the last node).  The interval defaults to ``(grid[0], grid[-1])`` and
    must lie inside it.
    """

    kind = "tabulated"

    def __init__(self, grid: Sequence[float], values: Sequence[float], interval=None):
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or len(g) < 2:
            raise HypothesisError("grid and values must be 1-d of equal length >= 2")
        if np.any(np.diff(g) <= 0):
            raise HypothesisError("grid must be strictly ascending")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise HypothesisError("tabulated values must be finite and nonnegative")
        self.grid = g
        self.values = v
        self.slopes = np.diff(v) / np.diff(g)
        iv = _as_interval(interval) if interval is not None else Interval(g[0], g[-1])
        if iv.a < g[0] or iv.b > g[-1]:
            raise DomainError("tabulated weight interval must lie inside its grid")
        self.interval = iv

    def _value(self, x):
        return np.interp(x, self.grid, self.values)

    def _deriv(self, x):
        i = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0, len(self.slopes) - 1)
        return self.slopes[i]

    def exponent_at(self, endpoint):
        return 0.0

    def deriv_exponent_at(self, endpoint):
        return 0.0

    def limit(self, endpoint):
        return float(self._value(np.array([_ext(endpoint)]))[0])

    def integral(self, lo, hi, cfg=None):
        lo, hi = _check_range(self, lo, hi)
        inner = self.grid[(self.grid > lo) & (self.grid < hi)]
        xs = np.concatenate([[lo], inner, [hi]])
        ys = self._value(xs)
        return QuadResult(float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))), 0.0, 0, True)

    def to_json(self):
        return {"kind": "tabulated", "grid": self.grid.tolist(), "values": self.values.tolist(),
                "interval": self.interval.to_json()}


class Product(WeightSpec):
    """Pointwise product of weights sharing one interval."""

    kind = "product"

    def __init__(self, factors: Sequence[WeightSpec], interval=None):
        flat = []
        for f in factors:
            flat.extend(f.factors if isinstance(f, Product) else [f])
        if not flat:
            raise HypothesisError("a product weight needs at least one factor")
        iv = _as_interval(interval) if interval is not None else flat[0].interval
        for f in flat:
            if f.interval.a > iv.a or f.interval.b < iv.b:
                raise IntervalMismatch("product factors must be defined on the product's interval")
        self.factors = tuple(flat)
        self.interval = iv

    def _value(self, x):
        out = np.ones_like(x)
        for f in self.factors:
            out = out * f._value(x)
        return out

    def _deriv(self, x):
        vals = [f._value(x) for f in self.factors]
        out = np.zeros_like(x)
        for i, f in enumerate(self.factors):
            term = f._deriv(x)
            for j, v in enumerate(vals):
                if j != i:
                    term = term * v
            out = out + term
        return out

    def exponent_at(self, endpoint):
        gs = [f.exponent_at(endpoint) for f in self.factors]
        if any(g is None for g in gs):
            return None
        return float(sum(gs))

    def deriv_exponent_at(self, endpoint):
        e = _ext(endpoint)
        gs = [f.exponent_at(e) for f in self.factors]
        if any(g is None for g in gs):
            return None
        total = sum(gs)
        cands = []
        for f, g in zip(self.factors, gs):
            d = f.deriv_exponent_at(e)
            if d is not None:
                cands.append(total - g + d)
        if not cands:
            return None
        # the dominant term: smallest exponent near a finite end, largest at infinity
        return float(max(cands) if math.isinf(e) else min(cands))

    def limit(self, endpoint):
        vals = [f.limit(endpoint) for f in self.factors]
        if any(v == 0 for v in vals) and any(math.isinf(v) for v in vals):
            return WeightSpec.limit(self, endpoint)
        return float(np.prod(vals))

    def integral(self, lo, hi, cfg=None):
        lo, hi = _check_range(self, lo, hi)
        return self._quad_integral(lo, hi, cfg)

    def is_closed_form(self):
        return all(f.is_closed_form() for f in self.factors)

    def to_json(self):
        return {"kind": "product", "factors": [f.to_json() for f in self.factors],
                "interval": self.interval.to_json()}


class FunctionWeight(WeightSpec):
    """Weight given by vectorized callables, with optional analytic metadata.

    ``exponents`` maps endpoints to local power exponents (see
    :meth:`WeightSpec.exponent_at`); ``limits`` maps endpoints to one-sided
    limits.  Used for derived weights such as ``-w1'`` and for custom inputs.
    """

    kind = "function"

    def __init__(self, func: Callable, interval=None, derivative: Optional[Callable] = None,
                 exponents: Optional[dict] = None, deriv_exponents: Optional[dict] = None,
                 limits: Optional[dict] = None, name: str = "custom"):
        self.func = func
        self.deriv_func = derivative
        self.interval = _as_interval(interval)
        self.exponents = {_ext(k): v for k, v in (exponents or {}).items()}
        self.deriv_exponents = {_ext(k): v for k, v in (deriv_exponents or {}).items()}
        self.limits = {_ext(k): v for k, v in (limits or {}).items()}
        self.name = name

    def _value(self, x):
        return np.asarray(self.func(x), dtype=float) * np.ones_like(x)

    def _deriv(self, x):
        if self.deriv_func is None:
            # central difference; only used for diagnostics
            h = 1e-6 * np.maximum(1.0, np.abs(x))
            return (self._value(x + h) - self._value(x - h)) / (2 * h)
        return np.asarray(self.deriv_func(x), dtype=float) * np.ones_like(x)

    def exponent_at(self, endpoint):
        return self.exponents.get(_ext(endpoint))

    def deriv_exponent_at(self, endpoint):
        return self.deriv_exponents.get(_ext(endpoint))

    def limit(self, endpoint):
        e = _ext(endpoint)
        if e in self.limits:
            return float(self.limits[e])
        return WeightSpec.limit(self, e)

    def is_closed_form(self):
        return False

    def to_json(self):
        raise TypeError(f"function weight '{self.name}' has no JSON form")


def weight_from_json(obj) -> WeightSpec:
    """Inverse of ``WeightSpec.to_json``; accepts the CLI config format."""
    kind = obj["kind"]
    iv = obj.get("interval")
    iv = _as_interval(iv) if iv is not None else None
    if kind == "power":
        return Power(obj["alpha"], iv)
    if kind == "scaled_power":
        return ScaledPower(float(obj["coef"]), float(obj["alpha"]), iv or Interval(0, math.inf))
    if kind == "shifted_power":
        return ShiftedPower(float(obj["shift"]), float(obj["alpha"]), float(obj.get("coef", 1.0)),
                            iv or Interval(0, math.inf))
    if kind in ("exp_decay", "exp"):
        return ExpDecay(float(obj.get("rate", obj.get("lambda", 1.0))), iv or Interval(0, math.inf))
    if kind == "tabulated":
        return Tabulated(obj["grid"], obj["values"], iv)
    if kind == "product":
        return Product([weight_from_json(f) for f in obj["factors"]], iv)
    raise HypothesisError(f"unknown weight kind {kind!r}")


WeightSpec.from_json = staticmethod(weight_from_json)


# ---------------------------------------------------------------------------
# public operations


def eval_weight(w: WeightSpec, x: float) -> float:
    """Value of ``w`` at ``x``; at a finite endpoint the one-sided limit is returned."""
    x = float(x)
    if not w.interval.contains(x, closed=True):
        raise DomainError(f"x={x} lies outside ({w.interval.a}, {w.interval.b})")
    if x in (w.interval.a, w.interval.b):
        return w.limit(x)
    return float(w(np.array([x]))[0])


def weight_antiderivative(w: WeightSpec, lo, hi, cfg: Optional[QuadConfig] = None) -> QuadResult:
    """``int_lo^hi w``; zero error for closed forms, quadrature otherwise.

    Raises :class:`DivergentIntegral` for improper integrals that diverge.
    """
    lo, hi = _check_range(w, lo, hi)
    return w.integral(lo, hi, cfg)


# ---------------------------------------------------------------------------
# monotone weights and the hypothesis check


class MonotoneWeight:
    """A weight ``w1`` declared monotone, with stored endpoint limits.

    ``rate(x)`` is ``-w1'(x)`` for decreasing weights and ``w1'(x)`` for
    increasing ones, so it is nonnegative when the declaration is true.
    Endpoint limits default to the base's analytic limits.
    """

    def __init__(self, base: WeightSpec, direction: str = DECREASING,
                 endpoint_limits: Optional[tuple] = None):
        direction = direction.lower()
        if direction not in (DECREASING, INCREASING):
            raise HypothesisError(f"direction must be {DECREASING!r} or {INCREASING!r}")
        self.base = base
        self.direction = direction
        self.interval = base.interval
        if endpoint_limits is None:
            endpoint_limits = (base.limit(self.interval.a), base.limit(self.interval.b))
        self.endpoint_limits = tuple(_ext(v) for v in endpoint_limits)

    @property
    def sign(self) -> float:
        return -1.0 if self.direction == DECREASING else 1.0

    def __call__(self, x):
        return self.base(x)

    def rate(self, x):
        return self.sign * self.base.derivative(x)

    def adhoc_factor(self, x, p):
        """``w1**p * rate**(1-p)`` written as ``w1 * (w1/rate)**(p-1)``.

        The quotient stays finite where both factors underflow; points where
        ``w1`` has underflowed to 0 contribute 0.
        """
        v = np.asarray(self(x), dtype=float)
        if p == 1:
            return v
        r = np.asarray(self.rate(x), dtype=float)
        with np.errstate(all="ignore"):
            out = v * (v / r) ** (p - 1.0)
        return np.where(v > 0, out, 0.0)

    def rate_weight(self) -> WeightSpec:
        b = self.base
        iv = self.interval
        ends = [e for e in (iv.a, iv.b)]
        return FunctionWeight(
            self.rate, iv,
            exponents={e: b.deriv_exponent_at(e) for e in ends if b.deriv_exponent_at(e) is not None},
            name="rate",
        )

    def exponent_at(self, endpoint):
        return self.base.exponent_at(endpoint)

    def rate_exponent_at(self, endpoint):
        return self.base.deriv_exponent_at(endpoint)

    def limits_consistent(self) -> bool:
        la, lb = self.endpoint_limits
        return la >= lb if self.direction == DECREASING else la <= lb

    def __repr__(self):
        return f"MonotoneWeight({self.base!r}, {self.direction!r}, limits={self.endpoint_limits})"


@dataclass
class ValidationResult:
    passed: bool
    failed_clause: Optional[str] = None
    message: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def _compacta(iv: Interval, n_levels=6):
    """Ladder of nested interior compacta shrinking toward both endpoints."""
    a, b = iv.a, iv.b
    out = []
    for k in range(1, n_levels + 1):
        d = 10.0 ** (-k)
        if math.isfinite(a) and math.isfinite(b):
            w = b - a
            lo, hi = a + d * w / 2, b - d * w / 2
        # toward an infinite end every compactum is bounded, so grow it only
        # linearly (fast-varying weights would overflow on huge ranges)
        elif math.isfinite(a):
            s = max(1.0, abs(a))
            lo, hi = a + d * s, a + 10.0 * k * s
        elif math.isfinite(b):
            s = max(1.0, abs(b))
            lo, hi = b - 10.0 * k * s, b - d * s
        else:
            lo, hi = -10.0 * k, 10.0 * k
        out.append((lo, hi))
    return out


def validate_weight_pair(w1: MonotoneWeight, w2: WeightSpec, p: float, branch: str,
                            cfg: Optional[QuadConfig] = None, n_samples: int = 257) -> ValidationResult:
    """Sampled clause-by-clause check of the ad hoc inequality's weight hypotheses.

    ``branch`` is ``"minus"`` (needs a decreasing ``w1``) or ``"plus"``
    (increasing).  Local integrability is checked by quadrature on a fixed
    ladder of interior compacta, so a pass is evidence rather than proof.
    Weights whose derivative vanishes at sampled points are rejected: the
    factor ``rate**(1-p)`` is undefined there for ``p > 1``.
    """
    if not p >= 1:
        raise HypothesisError(f"p must be >= 1, got {p}")
    if w1.interval != w2.interval:
        raise IntervalMismatch(f"w1 on {tuple(w1.interval)} but w2 on {tuple(w2.interval)}")
    branch = branch.lower()
    if branch not in ("minus", "plus"):
        raise HypothesisError(f"branch must be 'minus' or 'plus', got {branch!r}")
    iv = w1.interval
    xs = iv.interior_points(n_samples)
    diag = {"n_samples": int(n_samples), "p": p, "branch": branch}

    def fail(clause, msg):
        return ValidationResult(False, clause, msg, diag)

    wanted = DECREASING if branch == "minus" else INCREASING
    if w1.direction != wanted:
        return fail("direction", f"{branch} branch needs a {wanted} w1, got {w1.direction}")
    v1 = w1(xs)
    if np.any(v1 < 0) or np.any(np.isnan(v1)):
        return fail("w1_nonnegative", "w1 takes negative or NaN values")
    r = w1.rate(xs)
    bad = np.flatnonzero(~(r >= 0))
    if bad.size:
        i = int(bad[0])
        return fail("monotonicity", f"w1 is not {wanted}: signed derivative {r[i]:.3e} at x={xs[i]:.6g}")
    if np.any(np.diff(v1) * w1.sign < -1e-12 * np.maximum(np.abs(v1[1:]), 1.0)):
        return fail("monotonicity", f"sampled w1 values are not {wanted}")
    if not w1.limits_consistent():
        return fail("endpoint_limits", f"stored limits {w1.endpoint_limits} contradict {wanted}")
    # where w1 itself has underflowed to 0 a zero derivative carries no information
    vanish = (r == 0) & (v1 > 0)
    if p > 1 and np.any(vanish):
        i = int(np.flatnonzero(vanish)[0])
        return fail("nonvanishing_derivative",
                    f"w1' vanishes at x={xs[i]:.6g}; rate**(1-p) is undefined there")
    v2 = w2(xs)
    if np.any(v2 < 0) or np.any(np.isnan(v2)):
        return fail("w2_nonnegative", "w2 takes negative or NaN values")

    def combo(x):
        with np.errstate(all="ignore"):
            rr = w1.rate(x)
            out = np.power(rr, 1.0 - p) * np.power(w2(x), p) if p > 1 else np.power(w2(x), p)
        return out

    checked = []
    for lo, hi in _compacta(iv):
        for name, fn in (("w2_locally_integrable", lambda x: w2(x)),
                         ("rate_w2_locally_integrable", combo)):
            try:
                res = integrate(fn, lo, hi, cfg)
            except QuadratureError as exc:
                return fail(name, f"integral over [{lo:.3g}, {hi:.3g}] failed: {exc}")
            if not np.isfinite(res.value):
                return fail(name, f"integral over [{lo:.3g}, {hi:.3g}] is not finite")
            checked.append((name, lo, hi, float(res.value)))
    diag["compacta"] = checked
    return ValidationResult(True, None, "all clauses hold on sampled points and compacta", diag)
