"""Command-line entry point: ``pcf <subcommand> ...``.

Exit codes: 0 success, 1 bad input, 2 a checked property failed.

CSV layouts
  gm-curve    p,gm_bound_lo,gm_bound_hi
  expand      m,r,s,eps,a,det,t_lo,t_hi,regular_index
  curve-data  kind,k,x,y          (kind is "curve" or "point"; k is blank on the curve)
  ball-data   kind,index,x,y      (kind is "boundary", "lattice", "prev" or "next")
  table1      p,convergents...
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from typing import Any

from . import __version__
from .alpha import AlphaParseError, parse
from .engine import SEED, LatticePoint, WindowExhausted, ball_boundary, check_invariants, expand, skip_profile
from .mordell import constants, gm_curve, parse_grid
from .numerics import (
    DomainError,
    Interval,
    PrecisionPolicy,
    Real,
    UndecidableComparison,
    precision_report,
)
from .one_periodic import (
    admissibility_scan,
    admissibility_threshold,
    curve_data,
    pm_asymptotic,
    solve_pm,
    theorem13_check,
)
from .oracle import agreement, brute_best_approximations
from .regular_cf import InvariantViolation, expand_regular

SCHEMA_VERSION = "1"
REPORT_BITS = 128

log = logging.getLogger("pcfrac")


class InputError(ValueError):
    pass


class CheckFailed(Exception):
    """A verified property did not hold; carries the record to emit anyway."""

    def __init__(self, message: str, results: dict):
        super().__init__(message)
        self.results = results


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _decimal(x: Fraction, digits: int, rounding: str) -> str:
    ctx = Context(prec=digits, rounding=rounding)
    d = ctx.divide(Decimal(x.numerator), Decimal(x.denominator))
    return format(d, "f") if abs(d.adjusted()) < 30 else str(d)


def interval_json(iv: Interval) -> dict:
    """Endpoints as decimal strings rounded outward, so the text still encloses the value."""
    lo, hi = iv.fractions()
    digits = max(20, math.ceil(max(iv.lo.precision, iv.hi.precision) * 0.30103) + 2)
    return {"lo": _decimal(lo, digits, ROUND_FLOOR), "hi": _decimal(hi, digits, ROUND_CEILING)}


def rational_json(x: Fraction) -> int | str:
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_jsonable(x: Any, bits: int = REPORT_BITS) -> Any:
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, Fraction):
        return rational_json(x)
    if isinstance(x, Interval):
        return interval_json(x)
    if isinstance(x, Real):
        return interval_json(x.at(bits))
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {str(k): to_jsonable(v, bits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v, bits) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def parse_rational(text: str | int) -> Fraction:
    """Inverse of :func:`rational_json`; also accepts decimal literals like ``0.25``."""
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational literal: {text!r}") from exc


def parse_interval(obj: dict) -> tuple[Fraction, Fraction]:
    return Fraction(obj["lo"]), Fraction(obj["hi"])


def record(command: str, inputs: dict, results: dict, report) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": to_jsonable(inputs),
        "results": to_jsonable(results),
        "precision_report": report.as_dict(),
    }


def dumps(rec: dict) -> str:
    return json.dumps(rec, indent=2) + "\n"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands: each returns (results dict, csv text or None)
# ---------------------------------------------------------------------------


def _p(text: str) -> Fraction:
    try:
        p = parse_rational(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not 0 < p < 1:
        raise argparse.ArgumentTypeError(f"p must lie in (0, 1), got {text}")
    return p


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def cmd_expand(args, policy):
    spec = parse(args.alpha)
    consts = constants(args.p, policy=policy)
    exp = expand(spec, args.p, args.terms, policy, consts=consts, tie_break=args.tie_break)
    gaps = skip_profile(exp)
    problems = check_invariants(exp, consts, policy)
    results = {
        "alpha": spec.text(),
        "integer_part_shift": exp.alpha.integer_part_shift,
        "a0": exp.a0,
        "terms": [list(t) for t in exp.terms],
        "convergents": [Fraction(r, s) for r, s in exp.convergents],
        "dets": list(exp.dets),
        "t": list(exp.t_ms),
        "regular_indices": list(exp.regular_indices),
        "skip_profile": gaps,
        "ties": list(exp.ties),
        "ell_max": consts.ell_max,
        "problems": problems,
    }
    rows = []
    for m, ((r, s), det, t, k) in enumerate(zip(exp.convergents, exp.dets, exp.t_ms, exp.regular_indices)):
        eps, a = exp.terms[m - 1] if m else ("", "")
        iv = interval_json(t.at(REPORT_BITS))
        rows.append([m, r, s, eps, a, det, iv["lo"], iv["hi"], k])
    text = _csv(["m", "r", "s", "eps", "a", "det", "t_lo", "t_hi", "regular_index"], rows)
    if problems:
        raise CheckFailed("; ".join(problems), results)
    return results, text


def cmd_constants(args, policy):
    c = constants(args.p, target_width=args.width, policy=policy)
    results = {name: getattr(c, name).at(args.width) for name in c.REAL_FIELDS}
    results["ell_max"] = c.ell_max
    results["p"] = c.p
    rows = [[name, *interval_json(iv).values()] for name, iv in results.items() if isinstance(iv, Interval)]
    return results, _csv(["name", "lo", "hi"], rows)


def cmd_gm_curve(args, policy):
    grid = parse_grid(args.grid)
    if args.workers > 1:
        with ThreadPoolExecutor(args.workers) as pool:
            curve = gm_curve(grid, policy, map_fn=pool.map)
    else:
        curve = gm_curve(grid, policy)
    results = {"points": [{"p": p, "gm_bound": v} for p, v in curve], "increasing": True}
    rows = [[str(p), *interval_json(v.at(REPORT_BITS)).values()] for p, v in curve]
    return results, _csv(["p", "gm_bound_lo", "gm_bound_hi"], rows)


def cmd_oracle(args, policy):
    res = brute_best_approximations(parse(args.alpha), args.p, args.smax, policy)
    results = {
        "best_approximations": res.fractions(),
        "w_from": [e.w_lo for e in res.best],
        "horizon_w": res.horizon_w,
    }
    rows = [[str(f.numerator), str(f.denominator)] for f in res.fractions()]
    return results, _csv(["r", "s"], rows)


def cmd_check(args, policy):
    spec = parse(args.alpha)
    exp = expand(spec, args.p, args.terms, policy)
    res = brute_best_approximations(spec, args.p, args.smax, policy)
    ag = agreement(exp, res, policy)
    results = {
        "match": ag.match,
        "engine": ag.engine,
        "oracle": ag.oracle,
        "reached_horizon": ag.reached_horizon,
        "horizon_w": res.horizon_w,
    }
    if not ag.match:
        raise CheckFailed("engine and oracle disagree", results)
    return results, None


def cmd_pm(args, policy):
    iv = solve_pm(args.a, args.m, policy=policy)
    scan = admissibility_scan(args.a, args.m, policy=policy)
    report = theorem13_check(args.a, args.m, args.delta, policy=policy)
    threshold = admissibility_threshold(args.a, max(args.scan_to, args.m), policy=policy)
    results = {
        "p_m": iv,
        "asymptotic": pm_asymptotic(args.a, args.m),
        "inequality_scan": scan.as_dict(),
        "threshold_scan": threshold.as_dict(),
        "first_convergents": report.as_dict(),
    }
    if not report.ok:
        raise CheckFailed("first convergents on either side of p(m) are not the expected ones", results)
    return results, None


def cmd_curve_data(args, policy):
    data = curve_data(args.a, args.m, samples=args.samples)
    rows = [["curve", "", repr(x), repr(y)] for x, y in data["curve"]]
    rows += [["point", k, x, repr(y)] for k, x, y in data["points"]]
    results = {"p": data["p"], "t": data["t"], "curve": data["curve"],
               "points": [{"k": k, "x": x, "y": y} for k, x, y in data["points"]]}
    return results, _csv(["kind", "k", "x", "y"], rows)


def cmd_ball_data(args, policy):
    spec = parse(args.alpha)
    exp = expand(spec, args.p, args.step + 1, policy)
    pts = exp.points()
    prev: LatticePoint = pts[args.step - 1] if args.step else SEED
    nxt = pts[args.step]
    t = exp.t_ms[args.step]
    boundary = ball_boundary(prev, t, args.p, args.samples)
    xmax = max(abs(x) for x, _ in boundary)
    ymax = max(abs(y) for _, y in boundary)
    alpha = float(spec.real())
    lattice = []
    for s in range(-math.ceil(1.2 * xmax), math.ceil(1.2 * xmax) + 1):
        c = s * alpha
        for r in range(math.floor(c - 1.5 * ymax), math.ceil(c + 1.5 * ymax) + 1):
            if abs(r - c) <= 1.5 * ymax:
                lattice.append((s, r - c))
    rows = [["boundary", "", repr(x), repr(y)] for x, y in boundary]
    rows += [["lattice", "", s, repr(y)] for s, y in lattice]
    rows.append(["prev", args.step - 1, prev.s, repr(float(prev.y))])
    rows.append(["next", args.step, nxt.s, repr(float(nxt.y))])
    results = {"t": t, "prev": Fraction(prev.r, prev.s) if prev.s else None,
               "next": Fraction(nxt.r, nxt.s), "boundary": boundary,
               "lattice": [list(pt) for pt in lattice]}
    return results, _csv(["kind", "index", "x", "y"], rows)


TABLE1_P = ("0.5", "0.4", "0.3", "0.25", "0.2", "0.18", "0.16")
TABLE1_EXPECTED = {
    "inf": "2 3/2 5/3 8/5 13/8 21/13 34/21 55/34 89/55 144/89",
    "0.5": "2 5/3 8/5 13/8 21/13 34/21 55/34 89/55 144/89 233/144",
    "0.4": "5/3 8/5 13/8 21/13 34/21 55/34 89/55 144/89 233/144 377/233",
    "0.3": "8/5 13/8 21/13 34/21 55/34 89/55 144/89 233/144 377/233 610/377",
    "0.25": "13/8 21/13 34/21 55/34 89/55 144/89 233/144 377/233 610/377 987/610",
    "0.2": "21/13 34/21 55/34 89/55 144/89 233/144 377/233 610/377 987/610 1597/987",
    "0.18": "34/21 55/34 89/55 144/89 233/144 377/233 610/377 987/610 1597/987 2584/1597",
    "0.16": "55/34 89/55 144/89 233/144 377/233 610/377 987/610 1597/987 2584/1597 4181/2584",
}


def table1_rows(policy: PrecisionPolicy = PrecisionPolicy()) -> dict[str, list[Fraction]]:
    """First ten convergents of phi: the regular ones, then one row per p."""
    reg = expand_regular("phi", 12, policy)
    rows = {"inf": reg.distinct_convergents()[:10]}
    for p in TABLE1_P:
        rows[p] = expand("phi", Fraction(p), 10, policy).fractions()
    return rows


def cmd_table1(args, policy):
    rows = table1_rows(policy)
    got = {k: " ".join(str(rational_json(f)) for f in v) for k, v in rows.items()}
    diff = [k for k in TABLE1_EXPECTED if got.get(k) != TABLE1_EXPECTED[k]]
    results = {"rows": {k: v for k, v in rows.items()}, "matches": not diff, "differing_rows": diff}
    text = _csv(["p"] + [f"c{i}" for i in range(10)],
                [[k, *(rational_json(f) for f in v)] for k, v in rows.items()])
    if diff:
        raise CheckFailed(f"rows differ from the expected table: {', '.join(diff)}", results)
    return results, text


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcf",
        description="p-continued fractions for 0 < p < 1 with verified interval arithmetic.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default: json, or csv for data commands)")
    common.add_argument("--out", default=None, help="write to this path instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, default_format="json"):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(fn=fn, default_format=default_format)
        return sp

    sp = add("expand", cmd_expand, "p-continued fraction of an irrational")
    sp.add_argument("--alpha", required=True, help="surd:(A+B*sqrt(D))/C, cf:[b0;b1,(c1,...)], phi or e")
    sp.add_argument("--p", required=True, type=_p, help="rational exponent, e.g. 1/2 or 0.25")
    sp.add_argument("--terms", type=_positive, default=10)
    sp.add_argument("--tie-break", action="store_true", help="resolve exact ties by the larger denominator")

    sp = add("constants", cmd_constants, "constants of the L^p Minkowski bound")
    sp.add_argument("--p", required=True, type=_p)
    sp.add_argument("--width", type=_positive, default=REPORT_BITS, help="enclosure precision in bits")

    sp = add("gm-curve", cmd_gm_curve, "4^(-1/p) beta_p along a grid of p", default_format="csv")
    sp.add_argument("--grid", required=True, help="a:b:step with rational entries, endpoints inclusive")
    sp.add_argument("--workers", type=_positive, default=1)

    sp = add("oracle", cmd_oracle, "brute-force best approximations up to a certified horizon")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--p", required=True, type=_p)
    sp.add_argument("--smax", type=_positive, required=True)

    sp = add("check", cmd_check, "compare the expansion with the brute-force oracle")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--p", required=True, type=_p)
    sp.add_argument("--terms", type=_positive, default=10)
    sp.add_argument("--smax", type=_positive, default=2000)

    sp = add("pm", cmd_pm, "threshold exponent p(m) for alpha = (a + sqrt(a^2 + 4)) / 2")
    sp.add_argument("--a", type=_positive, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--delta", type=parse_rational, default=Fraction(1, 10**6))
    sp.add_argument("--scan-to", type=int, default=20, help="largest m in the admissibility threshold scan")

    sp = add("curve-data", cmd_curve_data, "the curve through Q_m and the points Q_(m+k)", default_format="csv")
    sp.add_argument("--a", type=_positive, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--samples", type=_positive, default=200)

    sp = add("ball-data", cmd_ball_data, "lattice points and the ball boundary at step m", default_format="csv")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--p", required=True, type=_p)
    sp.add_argument("--step", type=int, required=True)
    sp.add_argument("--samples", type=_positive, default=100)

    add("table1", cmd_table1, "first ten convergents of phi for several p, checked against the known table")
    return parser


def _inputs(args) -> dict:
    skip = {"fn", "default_format", "format", "out", "verbose", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    fmt = args.format or args.default_format
    status = 0
    try:
        policy = PrecisionPolicy.from_env()
        if getattr(args, "step", 0) < 0 or (args.command in ("pm", "curve-data") and args.m < 3):
            raise InputError("step must be >= 0 and m must be >= 3")
        with precision_report() as report:
            try:
                results, text = args.fn(args, policy)
            except CheckFailed as exc:
                log.error("%s", exc)
                results, text, status = exc.results, None, 2
    except (AlphaParseError, InputError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvariantViolation, WindowExhausted, UndecidableComparison) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if fmt == "csv" and text is not None:
        _emit(text, args.out)
    else:
        _emit(dumps(record(args.command, _inputs(args), results, report)), args.out)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
