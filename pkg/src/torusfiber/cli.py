"""Command-line front end.

Every command prints a human-readable report, or with ``--json`` a single
JSON document with sorted keys. Output is deterministic for fixed inputs and
seed; wall-clock timing is only included with ``--timing``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from typing import Sequence

from . import __version__
from .errors import RelationFailed, TorusFiberError, ValidationError
from .floer import displacement_report, hf_t2
from .lift import lift_all, po_threshold
from .locator import run_filtration
from .lte import count_balanced, format_solution, format_u, solve_at
from .novikov import INF, GaussianRational, coeff_to_json, format_coeff, format_rational
from .polytope import load_polytope
from .potential import build_po0, leading_term_system
from .qcoh import build_relations, count_vs_betti, verify_psi


def _label(i: int) -> str:
    """Facets are 0-based internally and 1-based on screen."""
    return str(i + 1)


def _rat(x) -> str:
    return "inf" if x == INF else format_rational(x)


def parse_point(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(s.strip()) for s in text.split(","))
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational point: {text!r}") from e


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from e


def parse_coefficient(text: str):
    """``p/q`` stays exact; ``a+bi`` with rational parts becomes a Gaussian rational."""
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        pass
    try:
        c = complex(text.replace("i", "j"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a coefficient: {text!r}") from e
    re, im = Fraction(c.real).limit_denominator(10 ** 12), Fraction(c.imag).limit_denominator(10 ** 12)
    return GaussianRational(re, im) if im else re


def parse_param(text: str) -> tuple[str, Fraction]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), parse_rational(v.strip())


# commands; each returns (json-able dict, list of text lines)

def cmd_locate(P, args):
    F = run_filtration(P)
    steps = []
    lines = [f"polytope: {P.name} (n = {P.dim}, m = {P.m})"]
    for st in F.steps:
        verts = [format_u(v) for v in st.face_vertices]
        I = sorted(_label(i) for i in st.I)
        steps.append({"k": st.k, "S": _rat(st.S), "face_vertices": verts,
                      "face_dim": st.face_dim, "I": I, "d": st.d})
        lines.append(f"S_{st.k} = {_rat(st.S)}  I_{st.k} = {{{', '.join(I)}}}  "
                     f"P_{st.k} = [{', '.join(verts)}]")
    lines.append(f"u0 = {format_u(F.u0)}")
    return {"u0": [_rat(x) for x in F.u0], "steps": steps}, lines


def _point(P, args):
    return args.at if args.at is not None else run_filtration(P).u0


def cmd_potential(P, args):
    if args.at is None:
        text = build_po0(P).to_text()
        return {"PO0": text}, [f"PO0 = {text}"]
    u = args.at
    po = build_po0(P, u, allow_exterior=True)
    sys = leading_term_system(P, u, allow_exterior=True)
    lines = [f"u = {format_u(u)}", f"PO0 = {po.to_text()}"] + sys.render()
    return {"u": [_rat(x) for x in u], "PO0": po.to_text(), "leading_terms": sys.render()}, lines


def cmd_lte(P, args):
    u = _point(P, args)
    res = solve_at(P, u, seed=args.seed, allow_exterior=True)
    lines = [f"u = {format_u(u)} ({P.position(u)})"] + res.system.render()
    lines += [format_solution(s) for s in res]
    lines.append(f"solutions: {len(res)}  profile: {res.profile()}")
    if res.flags:
        lines.append("flags: " + ", ".join(sorted(res.flags)))
    out = {"u": [_rat(x) for x in u], "position": P.position(u),
           "solutions": [s.to_json() for s in res], "profile": res.profile(),
           "flags": sorted(res.flags)}
    return out, lines


def cmd_fibers(P, args):
    points = args.at_list or None
    bc = count_balanced(P, points, seed=args.seed)
    cmp = count_vs_betti(P, points, seed=args.seed)
    rows, lines = [], [f"{'u':<24} {'count':>5}  {'profile':<34} position"]
    for c in bc.candidates:
        prof = ", ".join(f"{k} {v}" for k, v in c.profile.items() if v)
        cnt = "?" if c.count is None else str(c.count)
        flag = f" [{', '.join(c.flags)}]" if c.flags else ""
        lines.append(f"{format_u(c.u):<24} {cnt:>5}  {prof:<34} {c.position}{flag}")
        rows.append({"u": [_rat(x) for x in c.u], "count": c.count, "profile": c.profile,
                     "position": c.position, "flags": list(c.flags)})
    for f in bc.families:
        lines.append(f"family through {format_u(f.sample)} ({f.position}); not counted")
    verdict = "PASS" if cmp.passed else "FAIL"
    total = "?" if cmp.count is None else str(cmp.count)
    lines.append(f"interior total {total} vs betti sum {cmp.betti}: {verdict}")
    out = {"candidates": rows, "total": cmp.count, "betti": cmp.betti, "passed": cmp.passed,
           "families": [{"sample": [_rat(x) for x in f.sample], "position": f.position}
                        for f in bc.families]}
    return out, lines


def cmd_lift(P, args):
    u = _point(P, args)
    cps = lift_all(P, u, args.order, seed=args.seed)
    lines, rows = [f"u = {format_u(u)}"], []
    for n, cp in enumerate(cps, 1):
        lines.append(f"critical point {n}:")
        for j, y in enumerate(cp.y):
            lines.append(f"  y{j + 1} = {y.to_text()}")
        lines.append(f"  critical value = {cp.critical_value.to_text()}")
        lines.append(f"  residual valuation >= {_rat(cp.residual_valuation)}")
        rows.append({"y": [y.to_json() for y in cp.y], "critical_value": cp.critical_value.to_json(),
                     "order": _rat(cp.order), "residual_valuation": _rat(cp.residual_valuation),
                     "mode": cp.mode})
    if not cps:
        lines.append("no strongly nondegenerate solutions to lift")
    return {"u": [_rat(x) for x in u], "critical_points": rows}, lines


def cmd_threshold(P, args):
    u = _point(P, args)
    th = po_threshold(P, u, args.cap, seed=args.seed)
    rep = displacement_report(P, u, args.cap, seed=args.seed)
    lines = [f"u = {format_u(u)}", f"threshold = {th.label()}  [{th.status}]", rep.describe()]
    out = {"u": [_rat(x) for x in u], "threshold": _rat(th.value), "status": th.status,
           "lower": _rat(th.lower), "upper": _rat(th.upper), "cap": _rat(th.cap),
           "energy_bound": rep.energy_text, "min_intersections": rep.min_intersections}
    return out, lines


def cmd_hf(P, args):
    u = _point(P, args)
    y = args.y if args.y is not None else (Fraction(1),) * P.dim
    cap = args.cap if args.cap is not None else Fraction(2)
    rep = hf_t2(P, u, y, cap)
    lines = [f"u = {format_u(u)}  y = ({', '.join(format_coeff(c) for c in y)})",
             f"val g = ({', '.join(_rat(v) for v in rep.valuations)})",
             f"HF = {rep.describe()}"]
    out = {"u": [_rat(x) for x in u], "y": [coeff_to_json(c) for c in y], "free_rank": rep.free_rank,
           "torsion": [_rat(t) for t in rep.torsion_exponents], "parity": rep.parity,
           "valuations": [_rat(v) for v in rep.valuations], "cap": _rat(cap)}
    return out, lines


def cmd_qh_check(P, args):
    u = _point(P, args)
    qsr, lin = build_relations(P)
    lines = [f"u = {format_u(u)}"]
    try:
        rep = verify_psi(P, u)
    except RelationFailed as e:
        lines.append(f"FAIL: {e}")
        return {"u": [_rat(x) for x in u], "passed": False, "witness": list(e.witness or ())}, lines
    for text, ok in rep.qsr + rep.linear + rep.kernel:
        lines.append(f"{'PASS' if ok else 'FAIL'}  {text}")
    out = {"u": [_rat(x) for x in u], "passed": rep.passed,
           "qsr": [r.to_text() for r in qsr], "linear": [r.to_text() for r in lin]}
    return out, lines


COMMANDS = {
    "locate": cmd_locate,
    "potential": cmd_potential,
    "lte": cmd_lte,
    "fibers": cmd_fibers,
    "lift": cmd_lift,
    "threshold": cmd_threshold,
    "hf": cmd_hf,
    "qh-check": cmd_qh_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torusfiber", description="Balanced torus fibers of toric manifolds.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("file", help="polytope TOML file or bundled fixture name")
        p.add_argument("--param", action="append", type=parse_param, default=[], metavar="k=v")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true")
        p.add_argument("--timing", action="store_true", help="include wall-clock time")
        if name == "fibers":
            p.add_argument("--at", dest="at_list", action="append", type=parse_point, default=[],
                           metavar="u1,u2")
        else:
            p.add_argument("--at", type=parse_point, metavar="u1,u2")
        if name == "lift":
            p.add_argument("--order", type=parse_rational)
        if name in ("threshold", "hf"):
            p.add_argument("--cap", type=parse_rational)
        if name == "hf":
            p.add_argument("--y", type=lambda s: tuple(parse_coefficient(c) for c in s.split(",")))
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        P = load_polytope(args.file, dict(args.param))
        out, lines = COMMANDS[args.command](P, args)
    except ValidationError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except TorusFiberError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    report = {"command": args.command, "version": __version__,
              "inputs": {"polytope": P.name, "digest": P.digest(),
                         "params": {k: _rat(v) for k, v in P.params}, "seed": args.seed},
              "outputs": out}
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 3)
        lines.append(f"time: {report['seconds']} s")
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2, default=str))
    else:
        print("\n".join(lines))
    failed = out.get("passed") is False
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
