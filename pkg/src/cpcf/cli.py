"""Command-line front end: ``cpcf <subcommand> ...``.

Exit codes: 0 true / all pass, 1 false / failures, 2 input error,
3 translation budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dynamics import UpdateDescriptor, order_diff, update
from .models import (
    ModelFormatError, ModelValidationError, UnknownWorldError,
    min_elements, parse_model, render_model, validate_model,
)
from .oracle import (
    BUILTIN_NAMES, NIXON_EXPECTED, PROPERTY_IDS, GeneratorParams, builtin_text,
    check_property, nixon_table,
)
from .semantics import _KIND_FOR, Evaluator, Interpretation
from .syntax import CPBox, ParseError, parse_clause, parse_formula, render_formula
from .translation import BudgetExceeded, TranslationBudget, translate_full, translation_stats

EXIT_TRUE, EXIT_FALSE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


def _model_text(spec: str) -> str:
    # builtin names win over file paths of the same name
    if spec in BUILTIN_NAMES:
        return builtin_text(spec)
    try:
        return Path(spec).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read model {spec!r}: {exc.strerror or exc}") from None


def _load(spec: str, validate: bool = True):
    return parse_model(_model_text(spec), validate=validate)


def _worlds(ws) -> list:
    return sorted(ws)


def _set_text(ws) -> str:
    return "{" + ", ".join(_worlds(ws)) + "}"


def _emit(args, record: dict, text: str):
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def cmd_eval(args) -> int:
    m = _load(args.model)
    if args.world not in m.worlds:
        raise InputError(f"unknown world {args.world!r}; model has {', '.join(m.worlds)}")
    f = parse_formula(args.formula)
    x = Interpretation.coerce(args.sem)
    ev = Evaluator(m, x)
    verdict = ev.holds(args.world, f)
    record = {
        "formula": render_formula(f), "world": args.world, "semantics": str(x),
        "verdict": verdict, "min_set": None, "agreement_class": None,
    }
    lines = [f"{'true' if verdict else 'false'}: {render_formula(f)} at {args.world} ({x})"]
    if isinstance(f, CPBox):
        rel = ev.relation(args.world, _KIND_FOR[x], f.clause)
        mins = min_elements(rel, ev.extension(f.antecedent))
        cls = ev.agreement_class(f.clause, args.world)
        record["min_set"] = _worlds(mins)
        record["agreement_class"] = _worlds(cls)
        lines.append(f"min set: {_set_text(mins)}")
        lines.append(f"agreement class: {_set_text(cls)}")
    _emit(args, record, "\n".join(lines))
    return EXIT_TRUE if verdict else EXIT_FALSE


def cmd_update(args) -> int:
    m = _load(args.model)
    gamma = parse_clause(args.clause)
    x = Interpretation.coerce(args.sem)
    new = update(m, UpdateDescriptor(gamma, x))
    text = render_model(new)
    diff = order_diff(m, new)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    lines = []
    for w, d in diff.items():
        if not (d["removed"] or d["added"] or d["reordered"]):
            lines.append(f"{w}: unchanged")
            continue
        parts = []
        if d["removed"]:
            parts.append("removed " + _set_text(d["removed"]))
        if d["added"]:
            parts.append("added " + _set_text(d["added"]))
        if d["reordered"] and not (d["removed"] or d["added"]):
            parts.append("reordered")
        lines.append(f"{w}: " + ", ".join(parts))
    if not args.out:
        lines += ["", text.rstrip("\n")]
    record = {"clause": args.clause, "semantics": str(x), "diff": diff,
              "out": args.out, "model": text}
    _emit(args, record, "\n".join(lines))
    return EXIT_TRUE


def cmd_translate(args) -> int:
    f = parse_formula(args.formula)
    x = Interpretation.coerce(args.sem)
    budget = TranslationBudget(max_clause=args.max_clause, max_nodes=args.max_nodes)
    out = translate_full(f, x, budget)
    stats = translation_stats(f, out)
    record = {"formula": render_formula(f), "semantics": str(x),
              "translation": render_formula(out), **stats}
    text = "\n".join([
        render_formula(out),
        f"nodes: {stats['input_nodes']} -> {stats['output_nodes']}, "
        f"clauses: {stats['clauses']}, sign patterns: {stats['gamma_star_sizes']}, "
        f"plain fragment: {stats['plain_fragment']}",
    ])
    _emit(args, record, text)
    return EXIT_TRUE


def cmd_check(args) -> int:
    ids = PROPERTY_IDS if args.property == "all" else (args.property,)
    if args.property != "all" and args.property not in PROPERTY_IDS:
        raise InputError(f"unknown property {args.property!r}; known: {', '.join(PROPERTY_IDS)}")
    params = GeneratorParams(max_worlds=args.max_worlds, max_props=args.max_props, seed=args.seed)
    ok = True
    for prop in ids:
        report = check_property(prop, args.trials, params, exhaustive=not args.no_exhaustive)
        for fail in report.failures:
            fail["repro"] = fail["repro"] + f"  # from: cpcf check {prop} --seed {args.seed}"
        ok = ok and report.passed
        _emit(args, report.to_dict(), report.render())
    return EXIT_TRUE if ok else EXIT_FALSE


def cmd_table(args) -> int:
    got = nixon_table()
    sems = ("CP", "NC", "MS")
    rows, records, matched = [], [], 0
    width = max(len(f"{cf} with {g}") for cf, g in NIXON_EXPECTED)
    rows.append(" " * width + "  " + "  ".join(f"{s:>5}" for s in sems))
    for (cf, g), expected in NIXON_EXPECTED.items():
        cells = []
        for s in sems:
            value = got[(cf, g, s)]
            matched += value == expected[s]
            cells.append(f"{str(value).lower():>5}")
            records.append({"counterfactual": cf, "clause": g, "semantics": s,
                            "value": value, "expected": expected[s]})
        rows.append(f"{cf + ' with ' + g:<{width}}  " + "  ".join(cells))
    total = len(records)
    rows.append(f"{matched}/{total} cells match")
    if args.json:
        for r in records:
            print(json.dumps(r, sort_keys=True))
    else:
        print("\n".join(rows))
    return EXIT_TRUE if matched == total else EXIT_FALSE


def cmd_validate(args) -> int:
    m = _load(args.model, validate=False)
    report = validate_model(m, relaxed=args.relaxed)
    record = {"model": args.model, "ok": report.ok,
              "violations": report.violations, "notes": report.notes}
    _emit(args, record, str(report))
    return EXIT_TRUE if report.ok else EXIT_FALSE


def cmd_export_builtin(args) -> int:
    text = builtin_text(args.name)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    return EXIT_TRUE


def _default_seed() -> int:
    raw = os.environ.get("CP_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"CP_SEED must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpcf", description="Ceteris paribus counterfactual model checker.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True, sem=True):
        if model:
            sp.add_argument("--model", required=True,
                            help=f"builtin name ({', '.join(BUILTIN_NAMES)}) or .cpm path")
        if sem:
            sp.add_argument("--sem", default="cp", choices=["cp", "nc", "ms", "CP", "NC", "MS"])
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = sub.add_parser("eval", help="evaluate a formula at a world")
    common(sp)
    sp.add_argument("--world", default="w")
    sp.add_argument("formula")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("update", help="apply a clause update to a model")
    common(sp)
    sp.add_argument("--clause", required=True, help='clause set, e.g. "{m, s}"')
    sp.add_argument("--out", help="write the updated model here")
    sp.set_defaults(func=cmd_update)

    sp = sub.add_parser("translate", help="translate into the plain comparative fragment")
    common(sp, model=False)
    sp.add_argument("--max-clause", type=int, default=3)
    sp.add_argument("--max-nodes", type=int, default=10**6)
    sp.add_argument("formula")
    sp.set_defaults(func=cmd_translate)

    sp = sub.add_parser("check", help="run a property check")
    common(sp, model=False, sem=False)
    sp.add_argument("property", help="property id or 'all'")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=None, help="default: $CP_SEED or 0")
    sp.add_argument("--max-worlds", type=int, default=6)
    sp.add_argument("--max-props", type=int, default=4)
    sp.add_argument("--no-exhaustive", action="store_true", help="skip enumerated small models")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("table", help="the Nixon table from live evaluation")
    common(sp, model=False, sem=False)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("validate", help="validate a model file")
    common(sp, sem=False)
    sp.add_argument("--relaxed", action="store_true", help="allow non-total pair orders")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("export-builtin", help="write a builtin model to disk")
    sp.add_argument("name", choices=BUILTIN_NAMES)
    sp.add_argument("--out", help="output path; '-' or omitted for stdout")
    sp.set_defaults(func=cmd_export_builtin)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_TRUE
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ModelValidationError as exc:
        print(f"invalid model:\n{exc.report}", file=sys.stderr)
        return EXIT_INPUT
    except (ParseError, ModelFormatError, InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UnknownWorldError as exc:
        print(f"error: unknown world {exc.args[0]!r}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
