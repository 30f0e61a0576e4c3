"""Command-line surface for batch runs over forest and algebra files.

Exit codes: 0 for pass/true/valid, 1 for fail/false/violations, 2 for
unreadable or malformed input and evaluation errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import (
    AlgebraError,
    DerivedTables,
    load_algebra,
    validate_presentation,
)
from .equations import (
    check_bisim_invariance,
    check_cef,
    check_cefk,
    check_ef,
    compute_K,
)
from .forests import bisimilar, validate
from .logic import (
    FormulaPositionError,
    FormulaSyntaxError,
    Tp,
    equiv,
    modelcheck,
    parse_formula,
    tp,
)
from .notation import load_forest


def emit_json(payload) -> None:
    print(json.dumps(payload, sort_keys=True, separators=(",", ":")))


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="forestalgebra")
    top.add_argument("--json", action="store_true", help="machine readable output")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a forest or algebra file")
    p.add_argument("path")
    p.add_argument("--samples", type=int, default=200)

    p = sub.add_parser("eval", help="evaluate a forest in an algebra")
    p.add_argument("algebra")
    p.add_argument("forest")
    p.add_argument("--m", type=int, default=None)

    p = sub.add_parser("tables", help="print the derived operation tables")
    p.add_argument("algebra")

    p = sub.add_parser("K", help="print the counting bound for the unbounded check")
    p.add_argument("algebra")

    p = sub.add_parser("check", help="run a definability check")
    p.add_argument("kind", choices=["bisim-invariance", "ef", "cef", "cef-auto"])
    p.add_argument("algebra")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--mode", choices=["full", "refute-only"], default=None)

    p = sub.add_parser("modelcheck", help="model check a forest formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--forest", required=True)
    p.add_argument("--semantics", choices=["inclusive", "literal"], default="inclusive")

    p = sub.add_parser("equiv", help="counting equivalence of two forests")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("bisim", help="bisimilarity of two forests")
    p.add_argument("first")
    p.add_argument("second")

    p = sub.add_parser("types", help="print forest and root types")
    p.add_argument("forest")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except (
        AlgebraError,
        FormulaSyntaxError,
        FormulaPositionError,
        ValueError,
        KeyError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def dispatch(args) -> int:
    if args.command == "validate":
        return cmd_validate(args)
    if args.command == "eval":
        return cmd_eval(args)
    if args.command == "tables":
        return cmd_tables(args)
    if args.command == "K":
        return cmd_K(args)
    if args.command == "check":
        return cmd_check(args)
    if args.command == "modelcheck":
        return cmd_modelcheck(args)
    if args.command == "equiv":
        return cmd_equiv(args)
    if args.command == "bisim":
        return cmd_bisim(args)
    if args.command == "types":
        return cmd_types(args)
    raise AssertionError(args.command)


def cmd_validate(args) -> int:
    if args.path.endswith(".alg"):
        pres = load_algebra(args.path)
        report = validate_presentation(pres, samples=args.samples)
        if args.json:
            emit_json({"ok": report.ok, "failures": report.lines()})
        else:
            for line in report.lines():
                print(line)
            print("ok" if report.ok else "failed")
        return 0 if report.ok else 1
    g = load_forest(args.path)
    problems = validate(g)
    if args.json:
        emit_json({"ok": not problems, "violations": problems})
    else:
        for p in problems:
            print(p)
        print("ok" if not problems else "invalid")
    return 0 if not problems else 1


def cmd_eval(args) -> int:
    pres = load_algebra(args.algebra)
    g = load_forest(args.forest)
    value = pres.evaluate(g, args.m)
    if args.json:
        emit_json({"element": value})
    else:
        print(value)
    return 0


def cmd_tables(args) -> int:
    pres = load_algebra(args.algebra)
    tbl = DerivedTables(pres)
    a0, a1 = pres.elements(0), pres.elements(1)
    data = {
        "zero": tbl.zero,
        "hsum0": {f"{c},{d}": tbl.hsum0(c, d) for c in a0 for d in a0},
        "act": {f"{u},{c}": tbl.act(u, c) for u in a1 for c in a0},
        "vcomp": {f"{u},{v}": tbl.vcomp(u, v) for u in a1 for v in a1},
        "hsum1": {f"{u},{v}": tbl.hsum1(u, v) for u in a1 for v in a1},
        "omega": {u: tbl.omega(u) for u in a1},
        "piExp": {u: tbl.pi_exp(u) for u in a1},
    }
    if args.json:
        emit_json(data)
        return 0
    print(f"zero = {data['zero']}")
    for name in ("hsum0", "act", "vcomp", "hsum1"):
        print(name + ":")
        for key, value in data[name].items():
            print(f"  {key.replace(',', ' , ')} -> {value}")
    for name in ("omega", "piExp"):
        print(name + ":")
        for key, value in data[name].items():
            print(f"  {key} -> {value}")
    return 0


def cmd_K(args) -> int:
    pres = load_algebra(args.algebra)
    K = compute_K(pres)
    if args.json:
        emit_json({"K": K})
    else:
        print(f"K = {K}")
    return 0


def cmd_check(args) -> int:
    pres = load_algebra(args.algebra)
    if args.kind == "bisim-invariance":
        mode = args.mode or "auto"
        if mode == "auto" and 4 not in pres.arities:
            print("warning: no arity-4 elements listed, falling back to refute-only", file=sys.stderr)
        report = check_bisim_invariance(pres, mode)
    elif args.kind == "ef":
        report = check_ef(pres)
    elif args.kind == "cef":
        if args.k is None:
            raise AlgebraError("check cef needs --k; use cef-auto for the computed bound")
        report = check_cefk(pres, args.k)
    else:
        report = check_cef(pres)
    if args.json:
        emit_json(report.to_json())
    else:
        for line in report.lines():
            print(line)
    return 0 if report.passed else 1


def cmd_modelcheck(args) -> int:
    phi = parse_formula(args.formula)
    g = load_forest(args.forest)
    result = modelcheck(g, phi, args.semantics)
    if args.json:
        emit_json({"result": result, "semantics": args.semantics})
    else:
        print("true" if result else "false")
    return 0 if result else 1


def cmd_equiv(args) -> int:
    g = load_forest(args.first)
    h = load_forest(args.second)
    result = equiv(g, h, args.k, args.m)
    if args.json:
        emit_json({"equivalent": result, "k": args.k, "m": args.m})
    else:
        print("true" if result else "false")
    return 0 if result else 1


def cmd_bisim(args) -> int:
    g = load_forest(args.first)
    h = load_forest(args.second)
    result = bisimilar(g, h)
    if args.json:
        emit_json({"bisimilar": result})
    else:
        print("true" if result else "false")
    return 0 if result else 1


def cmd_types(args) -> int:
    g = load_forest(args.forest)
    forest_type = Tp(g, args.k, args.m)
    roots = {}
    for i, r in enumerate(g.roots):
        roots[str(i)] = repr(tp(g, r, args.k, args.m))
    if args.json:
        emit_json({"forest": repr(forest_type), "roots": roots})
    else:
        print(f"forest: {forest_type!r}")
        for i, desc in roots.items():
            print(f"root {i}: {desc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
