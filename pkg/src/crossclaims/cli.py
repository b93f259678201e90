"""Command-line front end.

Exit codes: 0 success / all axioms hold, 1 axiom violated or counterexample
found, 2 bad input, 3 exact enumeration refused by the budget.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from crossclaims import io
from crossclaims.axioms import (
    AXIOMS, AxiomReport, Rule, auxiliaries, axiom_tag, check, check_bal, check_cons,
    check_pmon, check_rmon, cra_rule, crastar_rule, csp_rule, falsify,
)
from crossclaims.crastar import crastar_exact, crastar_rows, crastar_sample
from crossclaims.generate import GenParams, random_mbc
from crossclaims.model import Allocation, MbcProblem, ProblemError, validate_problem
from crossclaims.rules import (
    DEFAULT_BUDGET, BudgetExceeded, RuleValue, cra_exact, cra_sample, cra_table, csp,
)

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


# -- parsing helpers --------------------------------------------------------------

def _locate(text: str, field: str | None) -> int | None:
    if not field:
        return None
    parts = field.split(".")
    lines = text.splitlines()
    start = 0
    for k, line in enumerate(lines):
        if f'"{parts[0]}"' in line:
            start = k
            break
    else:
        return None
    if len(parts) == 1:
        return start + 1
    for k in range(start, len(lines)):
        if f'"{parts[-1]}"' in lines[k]:
            return k + 1
    return start + 1


def read_problem(source: str) -> MbcProblem:
    """Load a problem file; ``fixture:NAME`` selects a bundled fixture."""
    if source.startswith("fixture:"):
        try:
            path = io.fixture_path(source.split(":", 1)[1])
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    else:
        path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{source}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise InputError(f"{source}:1: expected a JSON object")
    try:
        return validate_problem(raw)
    except ProblemError as exc:
        line = _locate(text, exc.field)
        where = f"{source}:{line}" if line else source
        raise InputError(f"{where}: {exc}") from None


def _id_list(p: MbcProblem, text: str, what: str = "claimant") -> list[str]:
    ids = p.claimants if what == "claimant" else p.issues
    if "," in text or " " in text.strip():
        items = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    elif text in ids:
        items = [text]
    elif all(len(i) == 1 for i in ids):
        items = list(text)
    else:
        raise InputError(f"cannot split {text!r} into {what} ids; separate them with commas")
    unknown = [t for t in items if t not in ids]
    if unknown:
        raise InputError(f"unknown {what} id(s): {', '.join(unknown)}")
    return items


def make_rule(p: MbcProblem | None, selector: str, budget: int | None) -> Rule:
    name, _, arg = selector.partition(":")
    name = name.lower()
    if name == "csp":
        if not arg:
            return csp_rule()
        if p is None:
            return csp_rule([t for t in re.split(r"[,\s]+", arg) if t])
        order = _id_list(p, arg)
        if sorted(order) != sorted(p.claimants):
            raise InputError(f"csp order {arg!r} must list every claimant exactly once")
        return csp_rule(order)
    if name == "cra":
        return cra_rule(budget)
    if name in ("crastar", "cra*"):
        return crastar_rule(budget)
    raise InputError(f"unknown rule {selector!r}; use csp[:order], cra or crastar")


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return io.fmt(obj)
    if isinstance(obj, Allocation):
        return {c: io.fmt(v) for c, v in zip(obj.claimants, obj.values)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _label(ids: Sequence[str]) -> str:
    return "".join(ids) if all(len(i) == 1 for i in ids) else ",".join(ids)


def _render_table(header: Sequence[str], rows: list[Sequence[str]]) -> str:
    widths = [max(len(str(r[c])) for r in [header, *rows]) for c in range(len(header))]
    lines = ["  ".join(str(v).rjust(w) for v, w in zip(r, widths)).rstrip()
             for r in [header, *rows]]
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------------

def _solve_one(p: MbcProblem, selector: str, args) -> tuple[str, RuleValue]:
    name = selector.split(":", 1)[0].lower()
    if name == "csp":
        rule = make_rule(p, selector, args.budget)
        return rule.name, RuleValue(csp(p, rule.order(p)))
    if args.mode == "sample":
        if name == "cra":
            return "cra", cra_sample(p, args.samples, args.seed)
        if name in ("crastar", "cra*"):
            return "crastar", crastar_sample(p, args.samples, args.inner_samples, args.seed)
    else:
        if name == "cra":
            return "cra", cra_exact(p, args.budget)
        if name in ("crastar", "cra*"):
            return "crastar", crastar_exact(p, args.budget)
    raise InputError(f"unknown rule {selector!r}; use csp[:order], cra or crastar")


def cmd_solve(args) -> int:
    p = read_problem(args.file)
    selectors = ["csp", "cra", "crastar"] if args.rule == "all" else [args.rule]
    results = [_solve_one(p, s, args) for s in selectors]
    if args.format == "json":
        doc = p.to_raw()
        out = []
        for name, value in results:
            entry = {"rule": name, "mode": value.mode,
                     "allocation": _jsonable(value.allocation)}
            if value.mode == "sampled":
                entry.update(samples=value.samples, seed=value.seed,
                             half_width=dict(zip(p.claimants, value.half_width)))
            out.append(entry)
        doc.update(out[0] if len(out) == 1 else {"results": out})
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    for name, value in results:
        if value.mode == "sampled":
            decimals = 4 if args.decimals is None else args.decimals
            sys.stdout.write(f"rule {name} (sampled, {value.samples} samples, seed {value.seed})\n")
            rows = [(c, io.fmt(v, decimals), f"+/- {h:.{decimals}f}")
                    for c, v, h in zip(p.claimants, value.allocation.values, value.half_width)]
            sys.stdout.write(_render_table(("claimant", "allocation", "95% half-width"), rows))
        else:
            sys.stdout.write(f"rule {name} (exact)\n")
            rows = [(c, io.fmt(v, args.decimals)) for c, v in zip(p.claimants, value.allocation)]
            sys.stdout.write(_render_table(("claimant", "allocation"), rows))
    return EXIT_OK


def cmd_tables(args) -> int:
    p = read_problem(args.file)
    name = args.rule.lower()
    if name == "cra":
        rows = [(_label([p.claimants[j] for j in order]), alloc)
                for order, alloc in cra_table(p, args.budget)]
        mean, title, head = cra_exact(p, args.budget).allocation, "CRA", "order"
    elif name in ("crastar", "cra*"):
        rows = [(_label([p.issues[i] for i in order]), alloc)
                for order, alloc in crastar_rows(p, args.budget)]
        mean, title, head = crastar_exact(p, args.budget).allocation, "CRA*", "issue order"
    else:
        raise InputError("tables supports --rule cra or --rule crastar")
    if args.format == "json":
        doc = {"rule": name, "rows": [{"order": o, "allocation": _jsonable(a)} for o, a in rows],
               "mean": _jsonable(mean)}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    body = [(o, *(io.fmt(v, args.decimals) for v in a)) for o, a in rows]
    body.append((title, *(io.fmt(v, args.decimals) for v in mean)))
    sys.stdout.write(_render_table((head, *p.claimants), body))
    return EXIT_OK


def _audit_reports(p: MbcProblem, rule: Rule, axiom: str, args) -> list[AxiomReport]:
    if axiom == "CONS" and args.keep:
        return [check_cons(rule, p, _id_list(p, args.keep))]
    if axiom == "R-MON" and args.estates:
        vals = [v for v in re.split(r"[,\s]+", args.estates.strip()) if v]
        if len(vals) != p.m:
            raise InputError(f"--estates needs {p.m} values")
        try:
            return [check_rmon(rule, p, [Fraction(v) for v in vals])]
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if axiom == "P-MON" and args.leaver:
        return [check_pmon(rule, p, _id_list(p, args.leaver)[0])]
    if axiom == "BAL" and args.pair:
        pair = _id_list(p, args.pair)
        if len(pair) != 2 or pair[0] == pair[1]:
            raise InputError("--pair needs two distinct claimants")
        return [check_bal(rule, p, *pair)]
    return [check(rule, axiom, p, aux) for aux in auxiliaries(axiom, p)]


def _describe(rep: AxiomReport) -> str:
    text = f"{rep.axiom}: {rep.verdict}"
    if rep.witness:
        text += "  witness " + json.dumps(_jsonable(rep.witness), sort_keys=True)
    if rep.notes:
        text += "  (" + "; ".join(rep.notes) + ")"
    return text


def cmd_audit(args) -> int:
    p = read_problem(args.file)
    rule = make_rule(p, args.rule, args.budget)
    axioms = AXIOMS if args.axiom == "all" else [axiom_tag(a) for a in args.axiom.split(",")]
    reports = [r for a in axioms for r in _audit_reports(p, rule, a, args)]
    if args.format == "json":
        doc = [{"axiom": r.axiom, "verdict": r.verdict, "witness": _jsonable(r.witness),
                "notes": list(r.notes)} for r in reports]
        sys.stdout.write(json.dumps({"rule": rule.name, "reports": doc}, indent=2) + "\n")
    else:
        sys.stdout.write(f"rule {rule.name}\n")
        for r in reports:
            sys.stdout.write(_describe(r) + "\n")
    return EXIT_VIOLATED if any(r.violated for r in reports) else EXIT_OK


def _gen_params(args) -> GenParams:
    raw: dict = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{args.config}: {exc}") from None
        raw.update(loaded.get("gen", loaded))
    for key in ("claimants", "issues", "claim_range"):
        val = getattr(args, key, None)
        if val:
            lo, _, hi = val.partition(":")
            raw[key] = (int(lo), int(hi or lo))
    for key in ("alpha_density", "binding_prob", "duplicates"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    if getattr(args, "rational", False):
        raw["rational"] = True
    try:
        return GenParams.from_mapping(raw)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad generator parameters: {exc}") from None


def cmd_falsify(args) -> int:
    params = _gen_params(args)
    rule = make_rule(None, args.rule, args.budget)
    axiom = axiom_tag(args.axiom)
    rep = falsify(rule, axiom, params, seed=args.seed, budget=args.instances,
                  minimize=not args.no_shrink)
    if rep is None:
        sys.stdout.write(f"no counterexample for {axiom} under {rule.name} "
                         f"in {args.instances} instances (seed {args.seed})\n")
        return EXIT_OK
    doc = io.dumps(rep.problem, counterexample={
        "rule": rule.name, "axiom": rep.axiom, "witness": _jsonable(rep.witness),
        "notes": list(rep.notes)})
    if args.out:
        Path(args.out).write_text(doc)
        sys.stdout.write(_describe(rep) + f"\ncounterexample written to {args.out}\n")
    else:
        sys.stdout.write(doc)
    return EXIT_VIOLATED


def cmd_gen(args) -> int:
    p = random_mbc(_gen_params(args), args.seed)
    text = io.dumps(p)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------

def _budget_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                    help="max orders enumerated in exact mode (default 10!)")
    sp.add_argument("--no-budget", dest="budget", action="store_const", const=None,
                    help="lift the enumeration budget")


def _gen_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON file with generator parameters")
    sp.add_argument("--claimants", help="claimant count range, e.g. 2:5")
    sp.add_argument("--issues", help="issue count range, e.g. 1:3")
    sp.add_argument("--claim-range", dest="claim_range", help="claim value range, e.g. 1:8")
    sp.add_argument("--alpha-density", dest="alpha_density", type=float)
    sp.add_argument("--binding-prob", dest="binding_prob", type=float)
    sp.add_argument("--duplicates", type=int)
    sp.add_argument("--rational", action="store_true", help="quarter-unit claims and estates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossclaims",
        description="Priority and random arrival rules for multi-issue bankruptcy "
                    "problems with crossed claims.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="allocate with one rule or all of them")
    sp.add_argument("file", help="problem file, or fixture:NAME")
    sp.add_argument("--rule", default="cra", help="csp[:ORDER], cra, crastar or all")
    sp.add_argument("--mode", choices=("exact", "sample"), default="exact")
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--inner-samples", dest="inner_samples", type=int, default=720)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("table", "json"), default="table")
    sp.add_argument("--decimals", type=int)
    _budget_args(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("tables", help="per-order table and its mean")
    sp.add_argument("file")
    sp.add_argument("--rule", default="cra", help="cra or crastar")
    sp.add_argument("--format", choices=("table", "json"), default="table")
    sp.add_argument("--decimals", type=int)
    _budget_args(sp)
    sp.set_defaults(func=cmd_tables)

    sp = sub.add_parser("audit", help="check axioms on one instance")
    sp.add_argument("file")
    sp.add_argument("--rule", default="cra")
    sp.add_argument("--axiom", default="all", help="comma list of axioms, or all")
    sp.add_argument("--pair", help="claimants j,k for BAL")
    sp.add_argument("--leaver", help="leaving claimant for P-MON")
    sp.add_argument("--keep", help="remaining claimants for CONS")
    sp.add_argument("--estates", help="dominating estates E' for R-MON")
    sp.add_argument("--format", choices=("table", "json"), default="table")
    _budget_args(sp)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("falsify", help="search random instances for a violation")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--axiom", required=True, help=", ".join(AXIOMS))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--instances", type=int, default=1000, help="instance budget")
    sp.add_argument("--out", help="write the counterexample problem file here")
    sp.add_argument("--no-shrink", action="store_true")
    _gen_args(sp)
    _budget_args(sp)
    sp.set_defaults(func=cmd_falsify)

    sp = sub.add_parser("gen", help="emit a random problem file")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    _gen_args(sp)
    sp.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "mode", None) == "sample" and getattr(args, "samples", 1) < 1:
        sys.stderr.write("error: --samples must be at least 1\n")
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except BudgetExceeded as exc:
        sys.stderr.write(f"refused: {exc}\n")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
