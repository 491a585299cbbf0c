"""Matrix-valued Hardy inequalities on step paths.

Operator values are ``d x d`` Hermitian matrices; a :class:`MatrixPath` is
constant on each ``[t_i, t_{i+1})`` and zero outside ``[t_0, t_m)``.  For such
paths the iterated Hardy operator has an exact piecewise-polynomial form

    (H_{-,l} F)(x) = sum_i F_i [(x - t_i)_+^l - (x - t_{i+1})_+^l] / l!

(mirrored for the Plus direction), so the only quadrature is the outer
integral of ``x^beta (H F)(x)^p`` between nodes.  Matrix powers use the
eigendecomposition of each sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .constants import PowerParams, birman_product_constant, optimal_power_constant
from .errors import HypothesisError, HypothesisGap, NotHermitian, NotPSD
from .hardy_ops import MINUS, PLUS, HardyAccumulator, _direction
from .paths import custom_path, step_path
from .quadrature import DEFAULT_CONFIG, QuadConfig, integrate, integrate_vector
from .weights import Interval

__all__ = [
    "MatrixPath",
    "LoewnerVerdict",
    "LoewnerReport",
    "schatten_norm",
    "matrix_power_psd",
    "random_psd_step_path",
    "check_trace_ineq",
    "check_hansen_base",
    "check_operator_ineq",
    "check_iterated_operator",
    "SearchResult",
    "counterexample_search",
]

HERM_TOL = 1e-12
DRIFT_TOL = 1e-10
PSD_CLAMP = 1e-9
LOEWNER_REL_TOL = 1e-8


def schatten_norm(T, p: float) -> float:
    """``(sum_j s_j**p)**(1/p)`` over the singular values of ``T``."""
    if not p >= 1:
        raise HypothesisError(f"Schatten index must be >= 1, got {p}")
    s = np.linalg.svd(np.atleast_2d(np.asarray(T)), compute_uv=False)
    if math.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s ** p) ** (1.0 / p))


def _herm(A):
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def _scale(A):
    return max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0


def _check_hermitian(A, tol, what="matrix"):
    drift = float(np.max(np.abs(A - np.conj(np.swapaxes(A, -1, -2))))) if A.size else 0.0
    if drift > tol * _scale(A):
        raise NotHermitian(f"{what} is not Hermitian (asymmetry {drift:.3e})")


def _power_batch(A, p, absolute=False):
    """``A**p`` (or ``|A|**p``) for a stack of Hermitian matrices; no checks."""
    lam, U = np.linalg.eigh(_herm(A))
    lam = np.abs(lam) if absolute else np.clip(lam, 0.0, None)
    with np.errstate(all="ignore"):
        lp = np.where(lam > 0, lam ** p, 0.0)
    out = np.einsum("...ij,...j,...kj->...ik", U, lp, np.conj(U))
    return _herm(out)


def matrix_power_psd(A, p: float):
    """``U diag(lam**p) U*`` for Hermitian PSD ``A``.

    Eigenvalues down to ``-1e-9`` (relative to the entry scale) are clamped
    to zero; anything more negative raises :class:`NotPSD`.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise HypothesisError("matrix_power_psd needs a square matrix")
    _check_hermitian(A, DRIFT_TOL)
    lam = np.linalg.eigvalsh(_herm(A))
    if lam.size and lam.min() < -PSD_CLAMP * _scale(A):
        raise NotPSD(f"smallest eigenvalue {lam.min():.3e} < 0")
    out = _power_batch(A, p)
    return out.real if np.isrealobj(A) else out


def _abs_power(A, p):
    """``|T|**p`` with ``|T| = (T* T)**(1/2)`` for a general square matrix."""
    A = np.asarray(A)
    return _power_batch(np.conj(A.T) @ A, p / 2.0)


# ---------------------------------------------------------------------------
# step paths


def _entry_json(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _entry_from_json(e):
    if isinstance(e, (list, tuple)):
        return complex(e[0], e[1])
    return complex(e)


@dataclass(eq=False)
class MatrixPath:
    """Step function ``x -> values[i]`` on ``[grid[i], grid[i+1])``, zero elsewhere."""

    grid: np.ndarray
    values: np.ndarray
    psd: bool = True

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values)
        if not np.iscomplexobj(v):
            v = v.astype(float)
        if g.ndim != 1 or len(g) < 2:
            raise HypothesisError("grid needs at least two nodes")
        if np.any(np.diff(g) <= 0) or g[0] <= 0 or not np.all(np.isfinite(g)):
            raise HypothesisError("grid must be strictly ascending, positive and finite")
        if v.ndim == 1 and v.shape[0] == len(g) - 1:
            v = v[:, None, None]
        if v.ndim != 3 or v.shape[0] != len(g) - 1 or v.shape[1] != v.shape[2]:
            raise HypothesisError("values must have shape (len(grid) - 1, d, d)")
        _check_hermitian(v, HERM_TOL, "step value")
        v = _herm(v)
        if np.iscomplexobj(v) and np.all(v.imag == 0):
            v = v.real
        if self.psd:
            lam = np.linalg.eigvalsh(v)
            if lam.min() < -HERM_TOL * _scale(v):
                raise NotPSD(f"step value has eigenvalue {lam.min():.3e} < 0")
        self.grid = g
        self.values = v

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def widths(self):
        return np.diff(self.grid)

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        i = np.searchsorted(self.grid, x, side="right") - 1
        inside = (i >= 0) & (i < len(self.values))
        out = self.values[np.clip(i, 0, len(self.values) - 1)]
        return np.where(inside[:, None, None], out, 0.0)

    def hardy(self, x, direction=MINUS, order: int = 1):
        """``(H_{direction,order} F)(x)`` for an array of points, exact."""
        c = _step_coeffs(self.grid, np.atleast_1d(np.asarray(x, dtype=float)), order, _direction(direction))
        return _herm(np.einsum("ki,i...->k...", c, self.values))

    def total(self):
        return np.einsum("i,i...->...", self.widths, self.values)

    def conjugated(self, U) -> "MatrixPath":
        U = np.asarray(U)
        vals = np.einsum("ij,njk,lk->nil", U, self.values, np.conj(U))
        return MatrixPath(self.grid, vals, self.psd)

    def scalar_path(self):
        """The step function itself when ``d = 1``."""
        if self.dim != 1:
            raise HypothesisError("scalar_path needs d = 1")
        return step_path(self.grid, np.abs(self.values[:, 0, 0].real))

    def to_json(self) -> dict:
        d = self.dim
        rows = [[_entry_json(z) for z in np.asarray(V).reshape(d * d)] for V in self.values]
        return {"dim": d, "grid": self.grid.tolist(), "values": rows, "psd": bool(self.psd)}

    @classmethod
    def from_json(cls, obj) -> "MatrixPath":
        rows = [[_entry_from_json(e) for e in row] for row in obj["values"]]
        d = int(obj["dim"]) if obj.get("dim") is not None else int(round(math.sqrt(len(rows[0]))))
        vals = np.array(rows).reshape(-1, d, d)
        if np.all(vals.imag == 0):
            vals = vals.real
        return cls(np.asarray(obj["grid"], dtype=float), vals, bool(obj.get("psd", True)))


def _pow_diff(a, b, delta, ell):
    """``(a**l - b**l) / l!`` with ``a - b = delta`` where ``b > 0`` (no cancellation)."""
    s = np.zeros_like(a)
    for j in range(ell):
        s = s + a ** j * b ** (ell - 1 - j)
    return np.where(b > 0, delta * s, a ** ell) / math.factorial(ell)


def _step_coeffs(grid, x, ell, direction):
    """Scalar weights ``c[k, i]`` with ``(H_l F)(x_k) = sum_i c[k, i] F_i``."""
    t0, t1 = grid[:-1][None, :], grid[1:][None, :]
    xx = x[:, None]
    delta = np.broadcast_to(t1 - t0, (len(x), len(grid) - 1))
    if direction == MINUS:
        a, b = np.maximum(xx - t0, 0.0), np.maximum(xx - t1, 0.0)
    else:
        a, b = np.maximum(t1 - xx, 0.0), np.maximum(t0 - xx, 0.0)
    return _pow_diff(a, b, delta, ell)


def random_psd_step_path(rng: np.random.Generator, dim: int = 2, n_steps: int = 2,
                         rank: Optional[int] = None, complex_entries: bool = False,
                         t_range=(0.1, 10.0)) -> MatrixPath:
    """Random PSD step path: log-uniform nodes, values ``A A*`` with Gaussian ``A``."""
    lo, hi = np.log(t_range[0]), np.log(t_range[1])
    grid = np.sort(np.exp(rng.uniform(lo, hi, n_steps + 1)))
    r = dim if rank is None else rank
    A = rng.standard_normal((n_steps, dim, r))
    if complex_entries:
        A = A + 1j * rng.standard_normal((n_steps, dim, r))
    return MatrixPath(grid, A @ np.conj(np.swapaxes(A, 1, 2)))


# ---------------------------------------------------------------------------
# reports


class LoewnerVerdict(str, Enum):
    LOEWNER_HOLDS = "LoewnerHolds"
    LOEWNER_VIOLATED = "LoewnerViolated"
    TRACE_ONLY_HOLDS = "TraceOnlyHolds"


@dataclass
class LoewnerReport:
    """``LHS >= RHS`` in the Loewner order, with traces."""

    ineq: str
    params: dict
    lhs_matrix: np.ndarray
    rhs_matrix: np.ndarray
    quad_error: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs_matrix = _herm(np.asarray(self.lhs_matrix))
        self.rhs_matrix = _herm(np.asarray(self.rhs_matrix))

    @property
    def diff(self):
        return _herm(self.lhs_matrix - self.rhs_matrix)

    @property
    def min_eig_diff(self) -> float:
        return float(np.linalg.eigvalsh(self.diff).min())

    @property
    def trace_lhs(self) -> float:
        return float(np.trace(self.lhs_matrix).real)

    @property
    def trace_rhs(self) -> float:
        return float(np.trace(self.rhs_matrix).real)

    @property
    def tol(self) -> float:
        """Loewner tolerance: ``1e-8 * ||LHS||`` (spectral norm)."""
        return LOEWNER_REL_TOL * float(np.linalg.norm(self.lhs_matrix, 2))

    @property
    def trace_margin(self) -> float:
        return self.trace_lhs - self.trace_rhs

    @property
    def trace_holds(self) -> bool:
        return self.trace_margin >= -self.tol * max(1, self.lhs_matrix.shape[0])

    @property
    def verdict(self) -> LoewnerVerdict:
        if self.min_eig_diff >= -self.tol:
            return LoewnerVerdict.LOEWNER_HOLDS
        if self.trace_holds:
            return LoewnerVerdict.TRACE_ONLY_HOLDS
        return LoewnerVerdict.LOEWNER_VIOLATED

    def to_dict(self) -> dict:
        def mat(M):
            return [[_entry_json(z) for z in row] for row in np.asarray(M)]

        return {
            "ineq": self.ineq,
            "params": self.params,
            "lhs_matrix": mat(self.lhs_matrix),
            "rhs_matrix": mat(self.rhs_matrix),
            "min_eig_diff": self.min_eig_diff,
            "tol": self.tol,
            "trace_lhs": self.trace_lhs,
            "trace_rhs": self.trace_rhs,
            "quad_error": self.quad_error,
            "verdict": self.verdict.value,
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# evaluation engine


def _weight_integral(alpha, lo, hi):
    """``int_lo^hi x^alpha dx`` for ``0 <= lo < hi <= inf`` (caller ensures convergence)."""
    if alpha == -1.0:
        return math.log(hi / lo)
    e = alpha + 1.0
    if math.isinf(hi):
        return -lo ** e / e
    if lo == 0:
        return hi ** e / e
    # hi^e - lo^e without cancellation for close nodes
    return lo ** e * math.expm1(e * math.log(hi / lo)) / e


def _lhs(F: MatrixPath, alpha, p, absolute=False):
    powers = _power_batch(F.values, p, absolute=absolute)
    w = np.array([_weight_integral(alpha, a, b) for a, b in zip(F.grid[:-1], F.grid[1:])])
    return _herm(np.einsum("i,i...->...", w, powers))


def _rhs_integral(F: MatrixPath, alpha, p, ell, direction, cfg, absolute=False):
    """``int_0^inf x^(alpha - l p) |(H_l F)(x)|^p dx`` as a matrix, and its error."""
    beta = alpha - ell * p
    g = F.grid
    total = 0.0
    err = 0.0

    def integrand(x):
        H = F.hardy(x, direction, ell)
        with np.errstate(all="ignore"):
            return x[:, None, None] ** beta * _power_batch(H, p, absolute=absolute)

    if direction == MINUS:
        lo, hi = g[0], (g[-1] if ell == 1 else math.inf)
        hints = [] if ell == 1 else [(math.inf, alpha - p)]
    else:
        lo, hi = (g[0] if ell == 1 else 0.0), g[-1]
        hints = [] if ell == 1 else [(0.0, beta)]
    res = integrate_vector(integrand, lo, hi, cfg, points=g[1:-1] if ell == 1 else g, hints=hints)
    total = res.value
    err = float(np.max(res.err_estimate))
    if ell == 1:
        # H F is constant (the full integral) beyond the support on the integration side
        tail = _power_batch(F.total()[None], p, absolute=absolute)[0]
        if direction == MINUS:
            total = total + tail * _weight_integral(beta, g[-1], math.inf)
        else:
            total = total + tail * _weight_integral(beta, 0.0, g[0])
    return _herm(total), err


def _matrix_check(name, F: MatrixPath, p, alpha, ell, branch, cfg, absolute=False, extra=None):
    cfg = cfg or DEFAULT_CONFIG
    const = birman_product_constant(p, alpha, ell)
    L = _lhs(F, alpha, p, absolute)
    R, err = _rhs_integral(F, alpha, p, ell, branch, cfg, absolute)
    params = {"p": p, "alpha": alpha, "order": ell, "branch": branch, "dim": F.dim,
              "constant": const, **(extra or {})}
    return LoewnerReport(name, params, L, const * R, const * err * F.dim)


def _branch_params(branch, p, alpha, ell=1):
    br = _direction(branch) if branch is not None else (MINUS if alpha < p - 1 else PLUS)
    if ell > 1 and br == PLUS and p - 1 < alpha <= ell * p - 1:
        raise HypothesisGap(f"plus branch of order {ell} needs alpha > {ell * p - 1}, got {alpha}")
    return PowerParams(p, alpha, br)


def _require_psd(F: MatrixPath):
    if not F.psd:
        raise NotPSD("operator inequalities need a PSD path")


def _require_operator_p(p):
    if not 1 <= p <= 2:
        raise HypothesisError(f"operator inequalities need p in [1, 2], got {p}")


def check_trace_ineq(branch: Optional[str], p: float, alpha: float, F: MatrixPath, b: float = math.inf,
                     cfg: Optional[QuadConfig] = None) -> LoewnerReport:
    """Trace form ``tr int x^alpha |F|^p >= C tr int x^(alpha-p) |H F|^p`` (any ``p >= 1``).

    Matrices are returned too; the trace fields are the authoritative ones.
    """
    if not math.isinf(b):
        raise HypothesisError("matrix checks are implemented on (0, inf)")
    params = _branch_params(branch, p, alpha)
    return _matrix_check("trace-" + params.branch, F, p, alpha, 1, params.branch, cfg,
                         absolute=not F.psd)


def check_hansen_base(F: MatrixPath, p: float, cfg: Optional[QuadConfig] = None) -> LoewnerReport:
    """``int x^-1 F^p >= int x^(-1-p) (int_0^x F)^p`` in the Loewner order."""
    _require_operator_p(p)
    _require_psd(F)
    return _matrix_check("hansen", F, p, -1.0, 1, MINUS, cfg)


def check_iterated_operator(branch: Optional[str], p: float, alpha: float, ell: int, F: MatrixPath,
                            cfg: Optional[QuadConfig] = None) -> LoewnerReport:
    """Loewner form of the l-fold iterated inequality with the product constant."""
    _require_operator_p(p)
    _require_psd(F)
    if int(ell) != ell or ell < 1:
        raise HypothesisError(f"order must be a positive integer, got {ell}")
    params = _branch_params(branch, p, alpha, int(ell))
    name = "operator-" + params.branch if ell == 1 else "iterated-operator-" + params.branch
    return _matrix_check(name, F, p, alpha, int(ell), params.branch, cfg)


def check_operator_ineq(branch: Optional[str], p: float, alpha: float, F: MatrixPath,
                        cfg: Optional[QuadConfig] = None, proof_checks: bool = True) -> LoewnerReport:
    """Loewner form of the power-weighted inequality for ``p`` in [1, 2].

    For ``d = 1`` the report also carries the substitution identities used
    to reduce the statement to the base case, evaluated by an independent
    scalar route (diagnostics ``change_of_variables`` or ``reflection``).
    """
    rep = check_iterated_operator(branch, p, alpha, 1, F, cfg)
    if proof_checks and F.dim == 1:
        if rep.params["branch"] == MINUS:
            rep.diagnostics["change_of_variables"] = _substitution_check(F, p, alpha, cfg)
        else:
            rep.diagnostics["reflection"] = _reflection_check(F, p, alpha, cfg)
    return rep


# ---------------------------------------------------------------------------
# proof devices, scalar route


def _scalar_sides(G, weight_exp, p, direction, lo, hi, cfg, cuts):
    """Quadrature of ``int x^a G^p`` and ``int x^(a-p) (H G)^p`` for a scalar path."""
    cfg = cfg or DEFAULT_CONFIG

    def lhs_f(x):
        with np.errstate(all="ignore"):
            return x ** weight_exp * np.abs(G(x)) ** p

    lhs = integrate(lhs_f, lo, hi, cfg, points=cuts).value
    acc = HardyAccumulator(G, direction, 1, cfg, 0.0, math.inf)

    def rhs_f(x):
        with np.errstate(all="ignore"):
            return x ** (weight_exp - p) * np.abs(acc(x)) ** p

    if direction == MINUS:
        a, bb = lo, math.inf
    else:
        a, bb = 0.0, hi
    rhs = integrate(rhs_f, a, bb, cfg, points=cuts).value
    return float(lhs), float(rhs)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _substitution_check(F: MatrixPath, p, alpha, cfg):
    """``G(x) = F(x^s) x^((1+alpha)/k)`` with ``s = p/k``: both sides scale by ``k/p``."""
    k = abs(alpha - p + 1.0)
    s = p / k
    f = F.scalar_path()
    g_nodes = F.grid ** (1.0 / s)
    e = (1.0 + alpha) / k

    def G(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return f(x ** s) * x ** e

    Gp = custom_path(G, Interval(0.0, math.inf), name="substituted", breakpoints=tuple(g_nodes),
                     support=(g_nodes[0], g_nodes[-1]), lead_exponent=0.0, tail_exponent=0.0,
                     nonnegative=True)
    lhs_g, rhs_g = _scalar_sides(Gp, -1.0, p, MINUS, g_nodes[0], g_nodes[-1], cfg, tuple(g_nodes))
    direct = _matrix_check("direct", F, p, alpha, 1, MINUS, cfg)
    L, R = direct.trace_lhs, direct.trace_rhs
    return {
        "lhs_transformed": lhs_g, "lhs_direct_scaled": (k / p) * L,
        "rhs_transformed": rhs_g, "rhs_direct_scaled": (k / p) * R,
        "lhs_rel_diff": _rel(lhs_g, (k / p) * L), "rhs_rel_diff": _rel(rhs_g, (k / p) * R),
    }


def _reflection_check(F: MatrixPath, p, alpha, cfg):
    """``G(y) = F(1/y) y^-2`` turns the Plus check at alpha into the Minus check at 2p-2-alpha."""
    beta = 2.0 * p - 2.0 - alpha
    f = F.scalar_path()
    nodes = np.sort(1.0 / F.grid)

    def G(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            return f(1.0 / y) * y ** -2.0

    Gp = custom_path(G, Interval(0.0, math.inf), name="reflected", breakpoints=tuple(nodes),
                     support=(nodes[0], nodes[-1]), lead_exponent=0.0, tail_exponent=0.0,
                     nonnegative=True)
    const = optimal_power_constant(PowerParams(p, beta, MINUS))
    lhs_g, rhs_g = _scalar_sides(Gp, beta, p, MINUS, nodes[0], nodes[-1], cfg, tuple(nodes))
    direct = _matrix_check("direct", F, p, alpha, 1, PLUS, cfg)
    return {
        "beta": beta,
        "lhs_reflected": lhs_g, "lhs_direct": direct.trace_lhs,
        "rhs_reflected": const * rhs_g, "rhs_direct": direct.trace_rhs,
        "lhs_rel_diff": _rel(lhs_g, direct.trace_lhs),
        "rhs_rel_diff": _rel(const * rhs_g, direct.trace_rhs),
    }


# ---------------------------------------------------------------------------
# counterexample search

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)


def _batch_margins(grids, vals, p, alpha, n_panels=1):
    """Loewner and trace margins of many two-or-more-step candidates at once.

    Fixed composite Gauss-Legendre rule between nodes; used for screening,
    the best candidates are re-evaluated adaptively.  Returns
    ``(min_eig / ||LHS||, trace margin / tr LHS)``.
    """
    m = vals.shape[1]
    const = optimal_power_constant(PowerParams(p, alpha, MINUS))
    beta = alpha - p
    e = alpha + 1.0
    a, b = grids[:, :-1], grids[:, 1:]
    if e == 0:
        w = np.log(b / a)
    else:
        w = a ** e * np.expm1(e * np.log(b / a)) / e
    L = np.einsum("ni,ni...->n...", w, _power_batch(vals, p))
    # composite rule on every step interval
    u = (np.arange(n_panels)[:, None] + 0.5 * (_GL_X[None, :] + 1.0)).ravel() / n_panels
    wq = np.tile(_GL_W / (2.0 * n_panels), n_panels)
    R = np.zeros_like(L)
    for i in range(m):
        x = a[:, i, None] + (b[:, i] - a[:, i])[:, None] * u[None, :]
        c = np.stack([_pow_diff(np.maximum(x - grids[:, j, None], 0.0),
                                np.maximum(x - grids[:, j + 1, None], 0.0),
                                (grids[:, j + 1] - grids[:, j])[:, None], 1) for j in range(m)], axis=-1)
        H = np.einsum("nkj,nj...->nk...", c, vals)
        P = _power_batch(H, p)
        R += np.einsum("nk,nk...->n...", (b[:, i] - a[:, i])[:, None] * wq[None, :] * x ** beta, P)
    tot = np.einsum("ni,ni...->n...", b - a, vals)
    R += _power_batch(tot, p) * (-(grids[:, -1] ** (beta + 1.0)) / (beta + 1.0))[:, None, None]
    D = _herm(L - const * R)
    lamD = np.linalg.eigvalsh(D)
    nL = np.linalg.eigvalsh(L)[:, -1]
    trL = np.trace(L, axis1=1, axis2=2).real
    trD = np.trace(D, axis1=1, axis2=2).real
    safe = nL > 0
    with np.errstate(all="ignore"):
        return (np.where(safe, lamD[:, 0] / np.where(safe, nL, 1.0), 0.0),
                np.where(safe, trD / np.where(safe, trL, 1.0), 0.0))


@dataclass
class SearchResult:
    best: LoewnerReport
    best_path: MatrixPath
    best_seed_index: int
    n_candidates: int
    min_trace_margin: float
    trace_invariant_ok: bool
    generator_state: dict
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "best_path": self.best_path.to_json(),
            "best_seed_index": self.best_seed_index,
            "n_candidates": self.n_candidates,
            "min_relative_trace_margin": self.min_trace_margin,
            "trace_invariant_ok": self.trace_invariant_ok,
            "loewner_violation_found": self.best.min_eig_diff < -self.best.tol,
            "generator_state": self.generator_state,
        }


def _search_chunk(args):
    """One independent stream of the search; pure given its seed sequence."""
    p, alpha, dim, n_steps, ss, n_random, n_descent, batch = args
    rng = np.random.default_rng(ss)
    best = (math.inf, None, None)
    min_tr = math.inf
    n = 0
    done = 0
    while done < n_random:
        k = min(batch, n_random - done)
        grids = np.sort(np.exp(rng.uniform(np.log(0.1), np.log(10.0), (k, n_steps + 1))), axis=1)
        A = rng.standard_normal((k, n_steps, dim, dim))
        # rank-deficient factors make projector-like, strongly noncommuting steps
        if dim > 1:
            mask = rng.random((k, n_steps, 1, dim)) < 0.5
            mask[..., 0] = True
            A = A * mask
        vals = A @ np.swapaxes(A, -1, -2)
        loew, tr = _batch_margins(grids, vals, p, alpha)
        n += k
        done += k
        min_tr = min(min_tr, float(tr.min()))
        j = int(np.argmin(loew))
        if loew[j] < best[0]:
            best = (float(loew[j]), grids[j].copy(), vals[j].copy())
    # local hill descent on the best random candidate
    score, g, V = best
    step = 0.2
    left = n_descent
    while left > 0:
        k = min(batch, left)
        lg = np.log(g)[None, :] + step * 0.3 * rng.standard_normal((k, n_steps + 1))
        grids = np.sort(np.exp(lg), axis=1)
        grids[:, 1:] = np.maximum(grids[:, 1:], grids[:, :-1] * (1 + 1e-9))
        L = np.linalg.cholesky(V + 1e-12 * np.eye(dim)[None])
        Ap = L[None] + step * rng.standard_normal((k, n_steps, dim, dim))
        vals = Ap @ np.swapaxes(Ap, -1, -2)
        loew, tr = _batch_margins(grids, vals, p, alpha)
        n += k
        left -= k
        min_tr = min(min_tr, float(tr.min()))
        j = int(np.argmin(loew))
        if loew[j] < score:
            score, g, V = float(loew[j]), grids[j].copy(), vals[j].copy()
        else:
            step *= 0.7
            if step < 1e-4:
                step = 0.2
    return score, g, V, n, min_tr


def counterexample_search(p: float, alpha: float = 0.0, dim: int = 2, n_steps: int = 2, seed: int = 0,
                          budget: int = 10000, cfg: Optional[QuadConfig] = None, workers: int = 1,
                          n_chunks: int = 8, allow_control: bool = False) -> SearchResult:
    """Randomized search for a Loewner violation of the Minus inequality.

    The budget is split over ``n_chunks`` independent streams spawned from
    ``seed`` (so the result does not depend on ``workers``); each stream
    spends 3/4 on random candidates and 1/4 on hill descent from its best.
    Every candidate's trace margin is tracked; the global best is
    re-evaluated with the adaptive engine.
    """
    if not (p > 2 or allow_control):
        raise HypothesisError("the search targets p > 2; pass allow_control=True for a p <= 2 control run")
    if budget < 1:
        raise HypothesisError("budget must be >= 1")
    _branch_params(MINUS, p, alpha)
    root = np.random.SeedSequence(seed)
    children = root.spawn(n_chunks)
    per = [budget // n_chunks + (1 if i < budget % n_chunks else 0) for i in range(n_chunks)]
    tasks = []
    for ss, nb in zip(children, per):
        n_desc = nb // 4
        tasks.append((p, alpha, dim, n_steps, ss, max(nb - n_desc, 1 if nb else 0), n_desc, 2048))
    tasks = [t for t in tasks if t[5] > 0]
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_search_chunk, tasks))
    else:
        results = [_search_chunk(t) for t in tasks]
    # deterministic reduction: lowest score, ties by chunk order
    bi = min(range(len(results)), key=lambda i: (results[i][0], i))
    score, g, V, _, _ = results[bi]
    n_total = int(sum(r[3] for r in results))
    min_tr = float(min(r[4] for r in results))
    path = MatrixPath(g, V)
    rep = _matrix_check("counterexample-minus", path, p, alpha, 1, MINUS, cfg)
    rep.diagnostics["screening_relative_margin"] = score
    tol_rel = LOEWNER_REL_TOL * dim
    return SearchResult(
        best=rep, best_path=path, best_seed_index=bi, n_candidates=n_total,
        min_trace_margin=min_tr, trace_invariant_ok=bool(min_tr >= -tol_rel and rep.trace_holds),
        generator_state={"seed": seed, "n_chunks": n_chunks, "spawn_keys": [list(c.spawn_key) for c in children]},
        history=[r[0] for r in results],
    )
