"""Command-line front end: ``hardy-lab <subcommand> ...``.

Exit codes: 0 all verdicts hold, 1 a violation, 2 usage or hypothesis
error, 3 numerical failure (divergence, non-convergence).
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Optional

import numpy as np

from . import __version__
from .constants import (PowerParams, adhoc_weights, birman_product_constant, iterated_power_constant,
                        adhoc_closed_form_constant, muckenhoupt_A_tilde, optimal_power_constant, power_bracket)
from .errors import DegenerateExponent, EvaluationFailure, HardyLabError, HypothesisError, QuadratureError
from .opvalued import (LoewnerVerdict, MatrixPath, check_hansen_base, check_iterated_operator,
                       check_operator_ineq, check_trace_ineq, counterexample_search)
from .paths import path_from_json
from .quadrature import QuadConfig
from .verify import (InequalityId, Verdict, check_adhoc, check_birman_chain, check_diff_form, check_iterated,
                     check_power, sharpness_probe)
from .weights import DECREASING, MonotoneWeight, weight_from_json

SCHEMA = "hardy-lab/v1"
CSV_COLUMNS = ["ineq", "p", "alpha", "extra", "lhs", "rhs", "ratio", "margin", "verdict"]

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization


def _fmt(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _plain(obj):
    """Reduce numpy, enums and dataclasses to JSON-ready Python values."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits (round-trip exact)."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return json.dumps(str(obj))


def _csv_cell(v):
    if isinstance(v, float):
        return _fmt(v).strip('"')
    return "" if v is None else str(v)


@dataclass
class RunManifest:
    command: str
    parameters: dict
    tool_version: str = __version__
    seed: Optional[int] = None
    timestamp: Optional[str] = None
    results_path: str = "-"

    @classmethod
    def build(cls, args, parameters):
        ts = None if args.deterministic else datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        out = args.json or args.csv or "-"
        return cls(args.command, parameters, __version__, args.seed, ts, out)


# ---------------------------------------------------------------------------
# helpers


def _cfg(args) -> QuadConfig:
    return QuadConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol, max_subdivisions=args.max_subdiv)


def _cfg_dict(cfg: QuadConfig) -> dict:
    return {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "max_subdiv": cfg.max_subdivisions}


def _load_json_arg(text):
    """Inline JSON or ``@file.json``."""
    if text is None:
        return None
    if text.startswith("@") or (os.path.exists(text) and not text.lstrip().startswith("{")):
        with open(text.lstrip("@")) as fh:
            return json.load(fh)
    return json.loads(text)


def _floats(text):
    if text is None or text.strip() == "":
        return []
    return [float(t) for t in text.split(",") if t.strip()]


def _ext(v):
    if isinstance(v, str):
        return float(v.replace("infinity", "inf"))
    return float(v)


def _workers():
    cap = os.environ.get("HARDY_LAB_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            raise UsageError(f"HARDY_LAB_THREADS must be an integer, got {cap!r}")
    return n


def _monotone(obj) -> MonotoneWeight:
    obj = dict(obj)
    direction = obj.pop("monotone", obj.pop("direction", DECREASING))
    limits = obj.pop("endpoint_limits", None)
    base = weight_from_json(obj)
    if limits is not None:
        limits = tuple(_ext(v) for v in limits)
    return MonotoneWeight(base, direction, limits)


# ---------------------------------------------------------------------------
# scalar inequality cells (shared by verify and sweep)

_BRANCH_OF = {"power-minus": "minus", "power-plus": "plus", "adhoc-minus": "minus", "adhoc-plus": "plus"}


def _cell_extra(cell) -> str:
    keys = [k for k in ("family", "ell", "n", "k", "b", "branch") if k in cell and cell[k] is not None]
    parts = [f"{k}={cell[k]}" for k in keys]
    if cell.get("family_params"):
        parts.append("params=" + json.dumps(cell["family_params"], sort_keys=True))
    return ";".join(parts)


def _run_cell(cell: dict, cfg: QuadConfig):
    ineq = cell["ineq"]
    p, alpha = float(cell["p"]), float(cell.get("alpha", 0.0))
    b = _ext(cell.get("b", "inf"))
    F = path_from_json({"family": cell.get("family", "exp"), **(cell.get("family_params") or {})})
    if ineq in ("power-minus", "power-plus"):
        return check_power(_BRANCH_OF[ineq], p, alpha, b, F, cfg)
    if ineq == "iterated":
        return check_iterated(cell.get("branch"), p, alpha, int(cell.get("ell", 1)), b, F, cfg)
    if ineq == "diff-form":
        return check_diff_form(p, alpha, F, b, cfg)
    if ineq == "birman-chain":
        return check_birman_chain(p, alpha, int(cell.get("n", 1)), int(cell.get("k", 1)), F, b, cfg)
    if ineq in ("adhoc-minus", "adhoc-plus"):
        if "w1" not in cell or "w2" not in cell:
            raise UsageError("ad hoc cells need 'w1' and 'w2' weight objects")
        return check_adhoc(_BRANCH_OF[ineq], _monotone(cell["w1"]), weight_from_json(cell["w2"]), p, F, cfg)
    raise UsageError(f"unknown inequality {ineq!r}; choose from {[i.value for i in InequalityId]}")


def _row(cell, rep=None, verdict=None, error=None, kind=None) -> dict:
    row = {"ineq": cell["ineq"], "p": float(cell["p"]), "alpha": float(cell.get("alpha", 0.0)),
           "extra": _cell_extra(cell)}
    if rep is not None:
        row.update(lhs=float(rep.lhs), rhs=float(rep.rhs), ratio=float(rep.ratio), margin=float(rep.margin),
                   verdict=rep.verdict.value)
    else:
        row.update(lhs=None, rhs=None, ratio=None, margin=None, verdict=verdict)
    if error:
        row["error"] = error
        row["error_kind"] = kind
    return row


def sweep_worker(task):
    """Evaluate one cell; never raises (failures become row verdicts)."""
    cell, cfg_d = task
    cfg = QuadConfig(rel_tol=cfg_d["rel_tol"], abs_tol=cfg_d["abs_tol"], max_subdivisions=cfg_d["max_subdiv"])
    try:
        rep = _run_cell(cell, cfg)
        return _row(cell, rep), (rep.to_dict() if hasattr(rep, "to_dict") else None)
    except DegenerateExponent as exc:
        return _row(cell, verdict=Verdict.DEGENERATE_EXPONENT.value, error=str(exc), kind="hypothesis"), None
    except (HypothesisError, UsageError) as exc:
        return _row(cell, verdict=Verdict.FAILED.value, error=str(exc), kind="hypothesis"), None
    except (QuadratureError, EvaluationFailure, FloatingPointError, ArithmeticError) as exc:
        return _row(cell, verdict=Verdict.FAILED.value, error=str(exc), kind="numerical"), None


def _run_cells(cells, cfg):
    tasks = [(c, _cfg_dict(cfg)) for c in cells]
    n = min(_workers(), len(tasks))
    if n <= 1:
        return [sweep_worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(sweep_worker, tasks))  # map keeps cell order


def _rows_exit(rows) -> int:
    verdicts = [r["verdict"] for r in rows]
    if Verdict.VIOLATED.value in verdicts:
        return EXIT_VIOLATED
    if any(r.get("error_kind") == "numerical" for r in rows) or Verdict.INCONCLUSIVE_DIVERGENT.value in verdicts:
        return EXIT_NUMERIC
    if any(r.get("error_kind") == "hypothesis" and r["verdict"] != Verdict.DEGENERATE_EXPONENT.value for r in rows):
        return EXIT_USAGE
    return EXIT_OK


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_csv_cell(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _grid_cells(base: dict, grid: dict):
    """Cartesian product of ``grid`` lists over the ``base`` cell (stable order)."""
    keys = [k for k in grid]
    vals = [grid[k] if isinstance(grid[k], list) else [grid[k]] for k in keys]
    for combo in itertools.product(*vals):
        cell = dict(base)
        cell.update(zip(keys, combo))
        if isinstance(cell.get("family"), dict):
            fam = dict(cell["family"])
            cell["family"] = fam.pop("family")
            cell["family_params"] = fam
        yield cell


# ---------------------------------------------------------------------------
# subcommands; each returns (report dict, exit code, summary line)


def cmd_constant(args):
    cfg = _cfg(args)
    kind = args.kind
    if kind in ("power", "birman", "iterated"):
        if args.alpha is None:
            raise UsageError(f"--kind {kind} needs --alpha")
        params = PowerParams(args.p, args.alpha, args.direction, _ext(args.b))
        if kind == "power":
            br = power_bracket(params, cfg)
            out = br.to_dict()
            out["optimal_constant"] = optimal_power_constant(params)
        else:
            k = args.k if kind == "birman" else args.ell
            fn = birman_product_constant if kind == "birman" else iterated_power_constant
            out = {"constant": fn(args.p, args.alpha, k), "k": k, "p": args.p, "alpha": args.alpha}
    elif kind == "adhoc":
        if args.w1 is None:
            raise UsageError("--kind adhoc needs --w1")
        w1 = _monotone(_load_json_arg(args.w1))
        direction = args.direction or ("minus" if w1.direction == DECREASING else "plus")
        w2 = weight_from_json(_load_json_arg(args.w2)) if args.w2 else weight_from_json(
            {"kind": "power", "alpha": 0.0, "interval": w1.interval.to_json()})
        v, w, phi, psi = adhoc_weights(w1, w2, args.p)
        out = muckenhoupt_A_tilde(v, w, phi, psi, args.p, direction, cfg).to_dict()
        out["closed_form_A"] = adhoc_closed_form_constant(w1, args.p, direction)
    else:
        raise UsageError(f"unknown --kind {kind!r}")
    out = {**out, "kind": kind}
    summary = f"constant {kind}: " + ", ".join(
        f"{k}={_fmt(float(out[k]))}" for k in ("A", "C0_lower", "C0_upper", "constant", "optimal_constant",
                                                 "closed_form_A") if k in out and out[k] is not None)
    return out, EXIT_OK, summary


def cmd_muckenhoupt(args):
    cfg = _cfg(args)
    v = weight_from_json(_load_json_arg(args.v))
    w = weight_from_json(_load_json_arg(args.w))
    phi = weight_from_json(_load_json_arg(args.phi)) if args.phi else None
    psi = weight_from_json(_load_json_arg(args.psi)) if args.psi else None
    br = muckenhoupt_A_tilde(v, w, phi, psi, args.p, args.direction or "minus", cfg)
    out = br.to_dict()
    return out, EXIT_OK, f"muckenhoupt: A={_fmt(br.A)} bracket=[{_fmt(br.lower)}, {_fmt(br.upper)}]"


def _verify_cell_from_args(args):
    cell = {"ineq": args.ineq, "p": args.p, "alpha": args.alpha, "family": args.family,
            "family_params": _load_json_arg(args.family_params) or {}, "b": args.b}
    for k in ("ell", "n", "k", "branch"):
        if getattr(args, k, None) is not None:
            cell[k] = getattr(args, k)
    if args.w1:
        cell["w1"] = _load_json_arg(args.w1)
    if args.w2:
        cell["w2"] = _load_json_arg(args.w2)
    return cell


def cmd_verify(args):
    cfg = _cfg(args)
    if args.p_grid or args.alpha_grid:
        base = _verify_cell_from_args(args)
        grid = {"p": _floats(args.p_grid) or [args.p], "alpha": _floats(args.alpha_grid) or [args.alpha]}
        res = _run_cells(list(_grid_cells(base, grid)), cfg)
        rows = [r for r, _ in res]
        code = _rows_exit(rows)
        return {"rows": rows, "csv": _csv_text(rows)}, code, f"verify grid: {len(rows)} rows, exit {code}"
    if args.p is None or args.alpha is None and args.ineq not in ("adhoc-minus", "adhoc-plus"):
        raise UsageError("verify needs --p and --alpha (or --p-grid/--alpha-grid)")
    rep = _run_cell(_verify_cell_from_args(args), cfg)
    code = {Verdict.VIOLATED: EXIT_VIOLATED, Verdict.INCONCLUSIVE_DIVERGENT: EXIT_NUMERIC,
            Verdict.FAILED: EXIT_NUMERIC}.get(rep.verdict, EXIT_OK)
    summary = (f"{args.ineq}: lhs={_fmt(rep.lhs)} rhs={_fmt(rep.rhs)} ratio={_fmt(rep.ratio)} "
               f"verdict={rep.verdict.value}")
    return rep.to_dict(), code, summary


def cmd_check_adhoc(args):
    if not args.w1:
        raise UsageError("check-adhoc needs --w1")
    args.ineq = "adhoc-" + ("minus" if args.branch in (None, "minus") else "plus")
    args.alpha = 0.0
    args.p_grid = args.alpha_grid = None
    for k in ("ell", "n", "k"):
        setattr(args, k, None)
    if not args.w2:
        w1 = _load_json_arg(args.w1)
        args.w2 = json.dumps({"kind": "power", "alpha": 0.0, "interval": w1.get("interval", [0, "inf"])})
    return cmd_verify(args)


def cmd_sharpness(args):
    eps = _floats(args.eps)
    ladder = sharpness_probe(args.branch, args.p, args.alpha, eps, _cfg(args))
    params = PowerParams(args.p, args.alpha, args.branch)
    k = abs(args.alpha - args.p + 1.0) / args.p
    power = args.p if params.branch == "minus" else args.p - 1.0
    rows = [{"eps": e, "ratio": r, "closed_form": (k / (k + e)) ** power} for e, r in ladder]
    ratios = [r for _, r in ladder]
    order = sorted(range(len(eps)), key=lambda i: -eps[i])
    monotone = all(ratios[order[i]] < ratios[order[i + 1]] for i in range(len(order) - 1))
    out = {"branch": params.branch, "p": args.p, "alpha": args.alpha, "ladder": rows,
           "monotone_increasing": monotone, "optimal_constant": optimal_power_constant(params)}
    last = rows[order[-1]] if rows else None
    summary = f"sharpness {params.branch}: monotone={monotone}" + (
        f" ratio(eps={last['eps']})={_fmt(last['ratio'])}" if last else "")
    return out, EXIT_OK, summary


def _load_steps(path, dim):
    obj = _load_json_arg("@" + path if not path.startswith("@") else path)
    if "values" in obj and "dim" not in obj:
        obj = {**obj, "dim": dim}
    return MatrixPath.from_json(obj)


def cmd_opcheck(args):
    cfg = _cfg(args)
    F = _load_steps(args.steps, args.dim)
    if F.dim != args.dim:
        raise UsageError(f"--dim {args.dim} does not match the step file (d = {F.dim})")
    kind = args.kind
    if kind == "hansen":
        rep = check_hansen_base(F, args.p, cfg)
    elif kind == "trace":
        rep = check_trace_ineq(args.branch, args.p, args.alpha, F, cfg=cfg)
    elif kind == "iterated":
        rep = check_iterated_operator(args.branch, args.p, args.alpha, args.ell, F, cfg)
    else:
        rep = check_operator_ineq(args.branch, args.p, args.alpha, F, cfg)
    if kind == "trace":
        code = EXIT_OK if rep.trace_holds else EXIT_VIOLATED
    else:
        code = EXIT_OK if rep.verdict == LoewnerVerdict.LOEWNER_HOLDS else EXIT_VIOLATED
    out = {**rep.to_dict(), "path": F.to_json()}
    summary = (f"opcheck {kind}: min_eig_diff={_fmt(rep.min_eig_diff)} tol={_fmt(rep.tol)} "
               f"trace {_fmt(rep.trace_lhs)} vs {_fmt(rep.trace_rhs)} verdict={rep.verdict.value}")
    return out, code, summary


def cmd_counterexample(args):
    seed = 0 if args.seed is None else args.seed
    args.seed = seed
    res = counterexample_search(args.p, args.alpha, args.dim, args.n_steps, seed, args.budget, _cfg(args),
                                workers=_workers(), allow_control=args.control)
    out = res.to_dict()
    # the same schema opcheck reads
    out["steps"] = res.best_path.to_json()
    code = EXIT_OK if res.trace_invariant_ok else EXIT_VIOLATED
    summary = (f"counterexample p={args.p}: {res.n_candidates} candidates, best min_eig_diff="
               f"{_fmt(res.best.min_eig_diff)} ({res.best.verdict.value}), trace invariant "
               f"{'intact' if res.trace_invariant_ok else 'BROKEN'}")
    return out, code, summary


def cmd_sweep(args):
    cfg = _cfg(args)
    conf = _load_json_arg("@" + args.config)
    if conf.get("schema") != SCHEMA:
        raise UsageError(f"config schema must be {SCHEMA!r}, got {conf.get('schema')!r}")
    blocks = conf.get("sweeps", [{"base": conf.get("base", {}), "grid": conf.get("grid", {})}])
    cells = []
    for blk in blocks:
        grid = blk.get("grid", {})
        if not grid or any(isinstance(v, list) and len(v) == 0 for v in grid.values()):
            continue
        cells.extend(_grid_cells(blk.get("base", {}), grid))
    res = _run_cells(cells, cfg)
    rows = [r for r, _ in res]
    code = _rows_exit(rows)
    return {"rows": rows, "csv": _csv_text(rows)}, code, f"sweep: {len(rows)} rows, exit {code}"


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rel-tol", type=float, default=1e-10)
    common.add_argument("--abs-tol", type=float, default=1e-12)
    common.add_argument("--max-subdiv", type=int, default=2000)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here (default: stdout)")
    common.add_argument("--csv", metavar="PATH", help="write CSV rows here (grid runs)")
    common.add_argument("--deterministic", action="store_true", help="omit timestamps from reports")
    common.add_argument("--seed", type=int, default=None)

    ap = argparse.ArgumentParser(prog="hardy-lab", description="Numerical checks of Hardy-type inequalities.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constant", parents=[common], help="optimal constants and Muckenhoupt brackets")
    c.add_argument("--kind", choices=["power", "birman", "iterated", "adhoc"], default="power")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--alpha", type=float)
    c.add_argument("--direction", choices=["minus", "plus"])
    c.add_argument("--b", default="inf")
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--ell", type=int, default=1)
    c.add_argument("--w1", help="monotone weight JSON (inline or @file)")
    c.add_argument("--w2", help="weight JSON (inline or @file)")

    m = sub.add_parser("muckenhoupt", parents=[common], help="two-weight Muckenhoupt functional")
    for name in ("v", "w"):
        m.add_argument(f"--{name}", required=True, help="weight JSON (inline or @file)")
    m.add_argument("--phi")
    m.add_argument("--psi")
    m.add_argument("--p", type=float, required=True)
    m.add_argument("--direction", choices=["minus", "plus"], default="minus")

    def scalar_args(sp):
        sp.add_argument("--p", type=float)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--b", default="inf")
        sp.add_argument("--family", default="exp")
        sp.add_argument("--family-params", help="JSON object of family parameters")
        sp.add_argument("--w1")
        sp.add_argument("--w2")

    v = sub.add_parser("verify", parents=[common], help="check one inequality (or a p/alpha grid)")
    v.add_argument("--ineq", choices=[i.value for i in InequalityId], required=True)
    scalar_args(v)
    v.add_argument("--ell", type=int)
    v.add_argument("--n", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--branch", choices=["minus", "plus"])
    v.add_argument("--p-grid")
    v.add_argument("--alpha-grid")

    a = sub.add_parser("check-adhoc", parents=[common], help="ad hoc inequality from a monotone weight")
    scalar_args(a)
    a.add_argument("--branch", choices=["minus", "plus"], default="minus")

    s = sub.add_parser("sharpness", parents=[common], help="near-extremal ratio ladder")
    s.add_argument("--branch", choices=["minus", "plus"], default="minus")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--eps", default="0.2,0.1,0.05,0.02,0.01")

    o = sub.add_parser("opcheck", parents=[common], help="matrix-valued check on a step path")
    o.add_argument("--kind", choices=["operator", "trace", "hansen", "iterated"], default="operator")
    o.add_argument("--branch", choices=["minus", "plus"])
    o.add_argument("--p", type=float, required=True)
    o.add_argument("--alpha", type=float, default=0.0)
    o.add_argument("--ell", type=int, default=1)
    o.add_argument("--dim", type=int, required=True)
    o.add_argument("--steps", required=True, help="step path JSON file")

    x = sub.add_parser("counterexample", parents=[common], help="search for a Loewner violation at p > 2")
    x.add_argument("--p", type=float, required=True)
    x.add_argument("--alpha", type=float, default=0.0)
    x.add_argument("--dim", type=int, default=2)
    x.add_argument("--n-steps", type=int, default=2)
    x.add_argument("--budget", type=int, default=10000)
    x.add_argument("--control", action="store_true", help="allow a p <= 2 control run")

    w = sub.add_parser("sweep", parents=[common], help="cartesian sweep from a JSON config")
    w.add_argument("config")
    return ap


COMMANDS = {
    "constant": cmd_constant,
    "muckenhoupt": cmd_muckenhoupt,
    "verify": cmd_verify,
    "check-adhoc": cmd_check_adhoc,
    "sharpness": cmd_sharpness,
    "opcheck": cmd_opcheck,
    "counterexample": cmd_counterexample,
    "sweep": cmd_sweep,
}


def _manifest_params(args) -> dict:
    skip = {"command", "json", "csv", "deterministic", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, out, summary):
    csv_text = out.pop("csv", None) if isinstance(out, dict) else None
    manifest = RunManifest.build(args, _manifest_params(args))
    body = dumps({"schema": SCHEMA, "manifest": asdict(manifest), "result": out}) + "\n"
    if csv_text is not None and args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(csv_text)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(body)
        print(summary)
    elif csv_text is not None and not args.csv:
        sys.stdout.write(csv_text)
        print(summary, file=sys.stderr)
    else:
        sys.stdout.write(body)
        print(summary, file=sys.stderr)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        out, code, summary = COMMANDS[args.command](args)
    except (UsageError, HypothesisError, json.JSONDecodeError, FileNotFoundError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, EvaluationFailure, HardyLabError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(args, out, summary)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
