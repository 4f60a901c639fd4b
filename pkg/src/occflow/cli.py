"""Command-line entry point.

    occflow parse FILE | -e TEXT
    occflow run FILE [--format text|json|dot] [--fuel N]
    occflow typecheck FILE [--format text|json|dot] [--kappa0 CELLS.json] [--pi-from-trace]
    occflow soundness FILE [--format text|json]
    occflow fuzz [--count N] [--seed S] [--max-depth D] [--max-refs R] [--allow-letrec]

Exit status is 0 on success, 1 when the program is rejected or a check
fails, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import report, runtime, syntax, typesys
from .agreement import env_agreement, type_agreement
from .harness import GenConfig, check_soundness, run_corpus

OK, DIAGNOSTIC, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="occflow",
                                 description="Occurrence-level data-flow and alias analysis.")
    sub = ap.add_subparsers(dest="command", required=True)

    def program_cmd(name, help, formats=("text", "json")):
        p = sub.add_parser(name, help=help)
        p.add_argument("path", nargs="?", help="program file (UTF-8)")
        p.add_argument("-e", "--expr", help="program text given inline")
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--fuel", type=int, default=None,
                       help="evaluation step bound (default: $OCCFLOW_FUEL or 10^6)")
        return p

    program_cmd("parse", "label a program and print it")
    program_cmd("run", "evaluate a program", ("text", "json", "dot"))
    tc = program_cmd("typecheck", "type a program", ("text", "json", "dot"))
    sd = program_cmd("soundness", "typecheck, run, and check agreement")
    for p in (tc, sd):
        p.add_argument("--kappa0", help="JSON file with a list of alias cells")
        p.add_argument("--pi-from-trace", action="store_true",
                       help="add the order recorded by an evaluation to the static order")

    fz = sub.add_parser("fuzz", help="check soundness on generated programs (JSON lines)")
    fz.add_argument("--count", type=int, default=100)
    fz.add_argument("--seed", type=int, default=0)
    fz.add_argument("--max-depth", type=int, default=6)
    fz.add_argument("--max-refs", type=int, default=3)
    fz.add_argument("--allow-letrec", action="store_true")
    fz.add_argument("--fuel", type=int, default=None)
    fz.add_argument("--out", help="write JSON lines here instead of standard output")
    return ap


def _source(args) -> str:
    if (args.path is None) == (args.expr is None):
        raise UsageError("give exactly one of a program file or -e TEXT")
    if args.expr is not None:
        return args.expr
    try:
        with open(args.path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.path}: {exc.strerror}") from None


def _kappa0(args) -> Optional[typesys.AliasBase]:
    if not getattr(args, "kappa0", None):
        return None
    try:
        with open(args.kappa0, encoding="utf-8") as fh:
            cells = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load alias cells from {args.kappa0}: {exc}") from None
    if not isinstance(cells, list) or not all(isinstance(c, list) for c in cells):
        raise UsageError("alias cells must be a JSON list of lists of names")
    return typesys.kappa0_from_cells(cells)


def _emit(obj, fmt: str, text: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(obj, ensure_ascii=False, indent=2) + "\n")
    else:
        out.write(text)


def _diag(exc: Exception) -> dict:
    d = {"error": type(exc).__name__, "message": str(exc)}
    point = getattr(exc, "point", None)
    if point is not None:
        d["point"] = point
    return d


def _static_setup(o, args):
    res = typesys.resolve_applications(o)
    pi = typesys.derive_pi(o, res)
    k0 = _kappa0(args) or typesys.derive_kappa0(o, res)
    if getattr(args, "pi_from_trace", False):
        trace = runtime.run(o, args.fuel)
        pi = typesys.pi_order(pi.points, set(pi.edges) | set(trace.order.edges))
    return pi, k0


def cmd_parse(o, args, out) -> int:
    obj = {"program": syntax.render(o), "points": sorted(syntax.program_points(o)),
           "free": sorted(syntax.fv(o))}
    _emit(obj, args.format, syntax.render(o) + "\n", out)
    return OK


def cmd_run(o, args, out) -> int:
    try:
        r = runtime.run(o, args.fuel)
    except runtime.EvalError as exc:
        _emit({"diagnostics": [_diag(exc)]}, args.format,
              f"error: {type(exc).__name__}: {exc}\n", out)
        return DIAGNOSTIC
    obj = report.run_json(r)
    if args.format == "dot":
        out.write(report.run_dot(r))
        return OK
    lines = [f"value: {obj['value']}",
             f"deps: L={{{', '.join(obj['deps']['L'])}}} V={{{', '.join(obj['deps']['V'])}}}",
             "store: " + ", ".join(f"{k} -> {v}" for k, v in obj["store"].items()),
             "w:"]
    for b in obj["w"]:
        lines.append(f"  {b['key']} -> ({{{', '.join(b['L'])}}}, {{{', '.join(b['V'])}}})")
    lines.append("order: " + ", ".join(f"{a}<{b}" for a, b in obj["order"]))
    _emit(obj, args.format, "\n".join(lines) + "\n", out)
    return OK


def cmd_typecheck(o, args, out) -> int:
    try:
        pi, k0 = _static_setup(o, args)
        if not pi.is_partial_order():
            raise typesys.TypeCheckError("static order with the trace added is not a partial order")
        tr = typesys.typecheck({}, pi, k0, o)
    except (typesys.TypeCheckError, runtime.EvalError) as exc:
        _emit({"diagnostics": [_diag(exc)]}, args.format,
              f"rejected: {type(exc).__name__}: {exc}\n", out)
        return DIAGNOSTIC
    if args.format == "dot":
        out.write(report.typing_dot(tr))
        return OK
    obj = report.typing_json(tr)
    obj["diagnostics"] = []
    lines = [f"type: {tr.type}", "gamma:"]
    lines += [f"  {g['name']}^{g['point']} : {g['type']}" for g in obj["gamma"]]
    lines.append("kappa0: " + " ".join("{" + ", ".join(c) + "}" for c in obj.get("kappa0", [])))
    _emit(obj, args.format, "\n".join(lines) + "\n", out)
    return OK


def cmd_soundness(o, args, out) -> int:
    if not args.kappa0 and not args.pi_from_trace:
        rep = check_soundness(o, GenConfig(fuel=args.fuel or runtime.default_fuel()))
        obj = rep.to_json()
    else:
        obj = _custom_soundness(o, args)
    text = f"verdict: {obj['verdict']}\n" + "".join(f"  {w}\n" for w in obj.get("witnesses", []))
    _emit(obj, args.format, text, out)
    return OK if obj["verdict"] in ("pass",) else DIAGNOSTIC


def _custom_soundness(o, args) -> dict:
    obj = {"program": syntax.render(o)}
    try:
        pi, k0 = _static_setup(o, args)
        tr = typesys.typecheck({}, pi, k0, o)
    except (typesys.TypeCheckError, runtime.EvalError) as exc:
        return {**obj, "verdict": "checker-reject", "witnesses": [f"{type(exc).__name__}: {exc}"]}
    try:
        r = runtime.run(o, args.fuel)
    except runtime.EvalError as exc:
        return {**obj, "verdict": "eval-error", "witnesses": [f"{type(exc).__name__}: {exc}"]}
    witnesses = []
    try:
        typesys.type_value(tr.gamma, pi, r.value, tr.type)
    except typesys.IllTypedValue as exc:
        witnesses.append(f"value-typing: {exc}")
    for name, rep in (("env-agreement", env_agreement({}, r.store, r.depfn, r.order, tr.gamma, pi, k0)),
                      ("type-agreement", type_agreement({}, r.value, r.depfn, r.order, r.deps,
                                                        tr.gamma, tr.type, k0))):
        witnesses += [f"{name}: [{c}] {w}" for c, w in rep.violations]
    return {**obj, "verdict": "VIOLATION" if witnesses else "pass", "witnesses": witnesses,
            "type": str(tr.type), "value": runtime.show_value(r.value)}


def cmd_fuzz(args, out) -> int:
    cfg = GenConfig(max_depth=args.max_depth, max_refs=args.max_refs,
                    allow_letrec=args.allow_letrec, seed=args.seed, count=args.count,
                    fuel=args.fuel or GenConfig.fuel)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            summary = run_corpus(cfg, fh)
    else:
        summary = run_corpus(cfg, out)
    return DIAGNOSTIC if summary["VIOLATION"] or summary["history_failures"] else OK


COMMANDS = {"parse": cmd_parse, "run": cmd_run, "typecheck": cmd_typecheck,
            "soundness": cmd_soundness}


def main(argv: Optional[list] = None, out=None) -> int:
    out = out or sys.stdout
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        if args.command == "fuzz":
            if args.count < 0 or args.max_depth < 1 or args.max_refs < 0:
                raise UsageError("count and max-refs must be non-negative, max-depth at least 1")
            return cmd_fuzz(args, out)
        text = _source(args)
        try:
            o = syntax.parse(text)
        except (syntax.SyntaxError, syntax.DuplicatePoint, syntax.DuplicateBinder) as exc:
            _emit({"diagnostics": [_diag(exc)]}, args.format if args.format == "json" else "text",
                  f"parse error: {exc}\n", out)
            return DIAGNOSTIC
        if args.fuel is None:
            args.fuel = runtime.default_fuel()
        return COMMANDS[args.command](o, args, out)
    except UsageError as exc:
        print(f"occflow: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
