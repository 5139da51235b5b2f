"""Command-line interface: ``normangle <subcommand> ...``.

Exit codes: 0 success, 1 regression failure, 2 parse error, 3 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import equiv, geometry, regression
from .errors import DomainError, NormError
from .gfunc import g_functional
from .norms import format_norm, norm_dim, parse_norm
from .plane import PolarProfile, g_planar

EXIT_OK, EXIT_REGRESSION, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol: float = 1e-6
    grid: int = 720
    refine: int = 3
    output: str = "table"
    t0: float = 0.1

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("--tol must be positive")
        if self.grid < 8:
            raise ValueError("--grid must be at least 8")
        if self.refine < 0:
            raise ValueError("--refine must be non-negative")
        if not self.t0 > 0:
            raise ValueError("--t0 must be positive")


class _ArgError(Exception):
    pass


def _vector(text: str) -> np.ndarray:
    try:
        v = np.array([float(p) for p in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None
    if not np.all(np.isfinite(v)):
        raise argparse.ArgumentTypeError("vector entries must be finite")
    return v


def _floats(text: str) -> List[float]:
    return list(_vector(text))


def _num(v) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _emit(args, record: dict, table_lines: Optional[List[str]] = None, csv_rows=None):
    """Write one record in the chosen format to --out or stdout."""
    fmt = args.output
    if fmt == "json":
        text = json.dumps(_jsonable(record), indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if csv_rows is None:
            flat = {k: v for k, v in record.items() if not isinstance(v, (list, dict))}
            w.writerow(list(flat))
            w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in flat.values()])
        else:
            for row in csv_rows:
                w.writerow(row)
        text = buf.getvalue()
    else:
        if table_lines is None:
            width = max(len(k) for k in record)
            table_lines = [f"{k:<{width}}  {_fmt(v)}" for k, v in record.items()]
        text = "\n".join(table_lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _config(args) -> RunConfig:
    return RunConfig(args.seed, args.tol, args.grid, args.refine, args.output, args.t0)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gfunc(args) -> int:
    cfg = _config(args)
    n = parse_norm(args.norm)
    gp = g_functional(n, args.x, args.y, method=args.method, t0=cfg.t0)
    rec = {"norm": format_norm(n), "x": list(args.x), "y": list(args.y)}
    rec.update(gp.to_dict())
    _emit(args, rec)
    return EXIT_OK


def cmd_angle(args) -> int:
    n = parse_norm(args.norm)
    if args.alpha is not None or args.beta is not None:
        if args.alpha is None or args.beta is None:
            raise _ArgError("--alpha and --beta must be given together")
        gp = g_planar(n, args.alpha, args.beta, args.a, args.b)
        rec = {"norm": format_norm(n), "alpha": args.alpha % (2 * math.pi),
               "beta": args.beta % (2 * math.pi), "a": args.a, "b": args.b}
    else:
        if args.x is None or args.y is None:
            raise _ArgError("give --x and --y, or --alpha and --beta")
        gp = g_functional(n, args.x, args.y, t0=args.t0)
        rec = {"norm": format_norm(n), "x": list(args.x), "y": list(args.y)}
    rec.update({"theta": gp.theta(), "tan_half": gp.tan_half(), "cos_theta": gp.cos_theta,
                "tan_half_sq": gp.tan_half_sq, "bracket_width": gp.bracket_width,
                "method": gp.method})
    _emit(args, rec)
    return EXIT_OK


def cmd_scan(args) -> int:
    cfg = _config(args)
    n1, n2 = parse_norm(args.norm1), parse_norm(args.norm2)
    dim = args.dim or n1.dim or n2.dim or 2
    rep = equiv.scan_constant(n1, n2, dim, grid=cfg.grid, refine=cfg.refine, seed=cfg.seed,
                              samples=args.samples, exclude_rtol=cfg.tol)
    rec = rep.to_dict()
    if args.output == "csv":
        rows = [["s", "ratio"]] + [[_num(s), _num(r)] for s, r in rep.divergence_schedule]
        _emit(args, rec, csv_rows=rows)
    elif args.output == "table":
        lines = [rep.summary(), "schedule (spacing, best ratio):"]
        lines += [f"  {s:.3e}  {r:.10g}" for s, r in rep.divergence_schedule]
        if rep.witness:
            lines.append(f"witness x = {_fmt(rep.witness[0])}, y = {_fmt(rep.witness[1])}")
        _emit(args, rec, table_lines=lines)
    else:
        _emit(args, rec)
    if args.out:
        print(rep.summary())
    return EXIT_OK


def cmd_probe(args) -> int:
    n1, n2 = parse_norm(args.norm1), parse_norm(args.norm2)
    sched = equiv.divergence_probe(n1, n2, args.u, args.v, s0=args.s0, factor=args.factor,
                                   steps=args.steps)
    div = equiv.is_diverging(sched)
    rec = {"schedule": [[s, r] for s, r in sched], "diverging": div}
    rows = [["s", "ratio"]] + [[_num(s), _num(r)] for s, r in sched]
    lines = ["s          ratio"] + [f"{s:.3e}  {r:.10g}" for s, r in sched]
    lines.append(f"diverging: {'yes' if div else 'no'}")
    _emit(args, rec, table_lines=lines, csv_rows=rows)
    return EXIT_OK


def cmd_polar(args) -> int:
    cfg = _config(args)
    n = parse_norm(args.norm)
    prof = PolarProfile.build(n, cfg.grid)
    if args.output == "csv":
        text = prof.to_csv(tol=cfg.tol)
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    vm, vp, _, _ = prof.phi_table()
    smooth = prof.smooth_flags(cfg.tol)
    rec = {"norm": format_norm(n), "r_min": prof.r_min, "r_max": prof.r_max,
           "samples": len(prof.grid), "non_smooth_samples": int(np.sum(~smooth)),
           "t": list(prof.grid), "r": list(prof.r_values), "phi_minus": list(vm),
           "phi_plus": list(vp), "smooth_flag": [bool(v) for v in smooth]}
    if args.output == "table":
        lines = [f"norm      {rec['norm']}", f"r_min     {prof.r_min:.12g}",
                 f"r_max     {prof.r_max:.12g}", f"samples   {rec['samples']}",
                 f"non-smooth samples  {rec['non_smooth_samples']}"]
        _emit(args, rec, table_lines=lines)
    else:
        _emit(args, rec)
    return EXIT_OK


def cmd_extremes(args) -> int:
    cfg = _config(args)
    n1 = parse_norm(args.norm1)
    if args.norm2 is None:
        rays = geometry.vertex_angles(n1, args.vertex_tol, grid=cfg.grid)
        rec = rays.to_dict()
        lines = [f"vertex angles: {_fmt(rays.vertex_angles)}",
                 "flat intervals: " + ", ".join(f"[{a:.6f}, {b:.6f}]" for a, b in rays.flat_intervals)]
        rows = [["kind", "start", "end"]] + [["vertex", _num(v), _num(v)] for v in rays.vertex_angles]
        rows += [["flat", _num(a), _num(b)] for a, b in rays.flat_intervals]
        _emit(args, rec, table_lines=lines, csv_rows=rows)
        return EXIT_OK
    n2 = parse_norm(args.norm2)
    cmp_ = geometry.compare_extreme_rays(n1, n2, args.vertex_tol, grid=cfg.grid)
    rec = cmp_.to_dict()
    lines = [f"verdict: {cmp_.verdict}", f"matched: {len(cmp_.matched)}",
             f"unmatched in first: {_fmt(cmp_.unmatched_first)}",
             f"unmatched in second: {_fmt(cmp_.unmatched_second)}"]
    rows = [["status", "angle_first", "angle_second"]]
    rows += [["matched", _num(a), _num(b)] for a, b in cmp_.matched]
    rows += [["first_only", _num(a), ""] for a in cmp_.unmatched_first]
    rows += [["second_only", "", _num(b)] for b in cmp_.unmatched_second]
    _emit(args, rec, table_lines=lines, csv_rows=rows)
    return EXIT_OK


def cmd_convexity(args) -> int:
    cfg = _config(args)
    n = parse_norm(args.norm)
    dim = args.dim or norm_dim(n)
    rep = geometry.convexity_report(n, dim, args.eps, args.samples, seed=cfg.seed, grid=cfg.grid,
                                    tol=args.witness_tol)
    rec = rep.to_dict()
    lines = [f"strictly_convex: {str(rep.strictly_convex).lower()}", f"verdict: {rep.verdict}"]
    if rep.witness is not None:
        lines.append(f"witness: y = {_fmt(rep.witness[0])}, z = {_fmt(rep.witness[1])}")
    lines.append("eps     delta (sampled)   delta_theta (sampled)")
    for e in rep.delta_table:
        lines.append(f"{e:<7g} {rep.delta_table[e]:<17.10g} {rep.delta_theta_table[e]:.10g}")
    rows = [["eps", "delta", "delta_theta"]]
    rows += [[_num(e), _num(rep.delta_table[e]), _num(rep.delta_theta_table[e])] for e in rep.delta_table]
    _emit(args, rec, table_lines=lines, csv_rows=rows)
    return EXIT_OK


def cmd_paper(args) -> int:
    try:
        rows = regression.run(args.only)
    except KeyError as exc:
        raise _ArgError(str(exc.args[0])) from None
    failed = [r for r in rows if not r.ok]
    rec = {"rows": [dict(zip(["key", "quantity", "computed", "expected", "tol", "ok"], r.as_list()))
                    for r in rows], "failed": len(failed)}
    w = max(len(r.quantity) for r in rows)
    lines = [f"{'check':<20} {'quantity':<{w}}  {'computed':>22}  {'expected':>22}  result"]
    for r in rows:
        lines.append(f"{r.key:<20} {r.quantity:<{w}}  {r.computed:>22.15g}  {r.expected:>22.15g}  "
                     f"{'pass' if r.ok else 'FAIL'}")
    lines.append(f"{len(rows) - len(failed)}/{len(rows)} rows pass")
    csv_rows = [["key", "quantity", "computed", "expected", "tol", "ok"]]
    csv_rows += [[r.key, r.quantity, _num(r.computed), _num(r.expected), _num(r.tol), int(r.ok)] for r in rows]
    _emit(args, rec, table_lines=lines, csv_rows=csv_rows)
    return EXIT_REGRESSION if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--tol", type=float, default=1e-6,
                   help="smoothness / exceptional-pair tolerance (default 1e-6)")
    g.add_argument("--grid", type=int, default=720, help="angle grid size (default 720)")
    g.add_argument("--refine", type=int, default=3, help="refinement rounds (default 3)")
    g.add_argument("--output", choices=("table", "json", "csv"), default="table")
    g.add_argument("--t0", type=float, default=0.1, help="start of the difference-quotient schedule")
    g.add_argument("--out", default=None, help="write the artifact to this path instead of stdout")

    p = argparse.ArgumentParser(prog="normangle",
                                description="g-functionals, norm angles and angular equivalence of norms")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gfunc", parents=[common], help="one-sided g-functionals and the norm angle")
    s.add_argument("norm")
    s.add_argument("--x", type=_vector, required=True)
    s.add_argument("--y", type=_vector, required=True)
    s.add_argument("--method", choices=("auto", "numeric"), default="auto")
    s.set_defaults(func=cmd_gfunc)

    s = sub.add_parser("angle", parents=[common], help="norm angle from vectors or polar angles")
    s.add_argument("norm")
    s.add_argument("--x", type=_vector)
    s.add_argument("--y", type=_vector)
    s.add_argument("--alpha", type=float, help="direction of x in radians (planar norms)")
    s.add_argument("--beta", type=float, help="direction of y in radians (planar norms)")
    s.add_argument("--a", type=float, default=1.0, help="length factor of x (with --alpha)")
    s.add_argument("--b", type=float, default=1.0, help="length factor of y (with --beta)")
    s.set_defaults(func=cmd_angle)

    s = sub.add_parser("scan", parents=[common], help="estimate the angular-equivalence constant")
    s.add_argument("norm1")
    s.add_argument("norm2")
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--samples", type=int, default=10_000, help="direction pairs for dim >= 3")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("probe", parents=[common], help="ratio along y = u + s v as s -> 0")
    s.add_argument("norm1")
    s.add_argument("norm2")
    s.add_argument("--u", type=_vector, required=True)
    s.add_argument("--v", type=_vector, required=True)
    s.add_argument("--s0", type=float, default=0.1)
    s.add_argument("--factor", type=float, default=0.1)
    s.add_argument("--steps", type=int, default=5)
    s.set_defaults(func=cmd_probe)

    s = sub.add_parser("polar", parents=[common], help="polar profile r, phi-, phi+ of a planar norm")
    s.add_argument("norm")
    s.set_defaults(func=cmd_polar)

    s = sub.add_parser("extremes", parents=[common], help="corners and faces; compare two norms")
    s.add_argument("norm1")
    s.add_argument("norm2", nargs="?")
    s.add_argument("--vertex-tol", type=float, default=geometry.VERTEX_TOL,
                   help="phi jump counted as a corner, radians (default 1e-3)")
    s.set_defaults(func=cmd_extremes)

    s = sub.add_parser("convexity", parents=[common], help="strict convexity and convexity moduli")
    s.add_argument("norm")
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--eps", type=_floats, default=list(geometry.DEFAULT_EPS),
                   help="comma-separated epsilon grid in (0, 2]")
    s.add_argument("--witness-tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_convexity)

    s = sub.add_parser("paper", parents=[common], help="reproduce the worked examples")
    s.add_argument("--only", action="append", choices=sorted(regression.CHECKS),
                   help="run only this check (repeatable)")
    s.set_defaults(func=cmd_paper)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    try:
        _config(args)
        return args.func(args)
    except (NormError, _ArgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
