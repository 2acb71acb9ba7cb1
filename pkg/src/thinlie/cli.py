"""Command line entry point: ``thinlie <subcommand> ...``.

Exit codes: 0 success, 1 a mathematical property was violated, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from .analyze import analyze, square_zero_elements
from .engine import Presentation, PresentationError, compute_quotient
from .explore import ExploreConstraints, branch_report, explore
from .freelie import ParseError
from .identities import run_identities
from .loop import CATALOG, AlgebraFileError, FiniteGradedAlgebra, GradingRemap, catalog, loop, validate
from .scalar import make_field

OK, VIOLATION, INPUT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def headline(dims, report, free: bool = False) -> str:
    """One-line verdict such as ``Heisenberg; not thin (truncates)``."""
    nz = [d for d in dims if d]
    if free:
        name = "free"
    elif len(dims) > 1 and dims[1] == 0:
        name = "abelian"
    elif tuple(nz) == (2, 1) and len(dims) > 2:
        name = "Heisenberg"
    else:
        name = "algebra"
    if report.thin == "thin":
        verdict = "thin within horizon"
    elif report.thin == "undecided":
        verdict = "thinness undecided"
    elif "truncates" in report.thin_reason:
        verdict = "not thin (truncates)"
    else:
        verdict = f"not thin ({report.thin_reason})"
    return f"{name}; {verdict}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_quotient(args) -> int:
    if args.paper_identities:
        chars = (args.p,) if args.p is not None else (7, 0)
        checks = run_identities(chars)
        if args.format == "json":
            _write(_json([c.__dict__ for c in checks]), None)
        else:
            for c in checks:
                print(f"{'PASS' if c.ok else 'FAIL'} {c.name} over {c.field}: {c.detail}")
        return OK if all(c.ok for c in checks) else VIOLATION
    if args.file is None:
        raise InputError("quotient needs a presentation file (or --paper-identities)")
    try:
        data = json.loads(_read(args.file))
    except json.JSONDecodeError as exc:
        raise InputError(f"presentation is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and args.max_deg is not None:
        data = dict(data, max_degree=args.max_deg)
    pres = Presentation.from_json(data)
    if pres.max_degree < 3:
        raise InputError("analysis needs --max-deg of at least 3")
    L = compute_quotient(pres)
    rep = analyze(L)
    if args.format == "json":
        _write(_json(rep.to_json()), None)
    else:
        print("dims: " + ",".join(map(str, L.dims)))
        print(headline(L.dims, rep, free=not pres.relators))
        print(rep.to_text())
    return OK


def _load_finite(text: str) -> FiniteGradedAlgebra:
    S = FiniteGradedAlgebra.from_json(text)
    bad = validate(S)
    if bad is not None:
        raise InputError(str(bad))
    return S


def cmd_loop(args) -> int:
    S = _load_finite(_read(args.file))
    if args.max_deg < 3:
        raise InputError("analysis needs --max-deg of at least 3")
    try:
        remap = GradingRemap(args.unit, S.period)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        L = loop(S, remap, args.max_deg)
    rep = analyze(L)
    zeros = square_zero_elements(L) if L.dim(1) == 2 else None
    if args.format == "json":
        doc = rep.to_json()
        doc["square_zero_in_L1"] = zeros
        doc["warnings"] = [str(w.message) for w in caught]
        _write(_json(doc), None)
    else:
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        print(f"loop of {S.name or 'algebra'} over {S.field}, unit {args.unit}, N={S.period}")
        print(rep.to_text())
        if zeros is not None:
            if zeros:
                print("square-zero elements of L_1: " + "; ".join("(" + ", ".join(z) + ")" for z in zeros))
            else:
                print(f"no sandwich in L_1: no nonzero v with (ad v)^2 = 0 through degree {rep.horizon}")
    return VIOLATION if rep.suite_failed else OK


def cmd_explore(args) -> int:
    if args.p is None:
        raise InputError("explore needs -p")
    try:
        field = make_field(args.p)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if field.is_rational:
        raise InputError("explore needs a prime -p")
    try:
        cons = ExploreConstraints(
            args.max_deg,
            ExploreConstraints.parse_requirements(args.require),
            args.second_diamond,
            tuple(args.forbid_second_diamond),
            args.budget,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.jobs < 1:
        raise InputError("--jobs must be positive")
    tree = explore(args.p, cons, jobs=args.jobs, checkpoint=args.checkpoint)
    lines = "\n".join(tree.jsonl())
    summary = tree.summary()
    out = sys.stderr if args.output in (None, "-") else sys.stdout
    if args.output not in (None, "-"):
        Path(args.output).write_text(lines + "\n" if lines else "")
    elif lines:
        print(lines)
    if args.format == "json":
        summary["sharpness"] = tree.sharpness_witnesses()
        summary["report"] = branch_report(tree)
        print(_json(summary), file=out)
    else:
        print(_explore_text(tree, summary), file=out)
    bad = summary["suite_failures"] or summary["classification_violations"]
    return VIOLATION if bad else OK


def _explore_text(tree, s) -> str:
    lines = [
        f"p={s['p']} horizon {s['horizon']}: {s['leaves']} leaves, {s['thin_leaves']} surviving, "
        f"{s['terminal_leaves']} finite, {s['pruned_leaves']} pruned at the horizon"
        + (" (PARTIAL: budget exhausted)" if s["partial"] else ""),
        "observed k: " + (", ".join(map(str, s["observed_k"])) or "none"),
    ]
    if s["classification_violations"]:
        lines.append("classification VIOLATED by k = " + ", ".join(map(str, s["classification_violations"])))
    if s["sandwich_on_all_thin_leaves"]:
        lines.append("sandwich holds on all branches")
    else:
        lines.append(f"sandwich fails on {s['sharpness_witnesses']} branches")
        seen = {}
        for w in tree.sharpness_witnesses():
            key = (tuple(w["diamonds"]), tuple(w["sandwich_failures"]))
            seen[key] = seen.get(key, 0) + 1
        for (diamonds, fails), count in sorted(seen.items()):
            where = ", ".join(f"[L_{i}yy] != 0" for i in fails)
            lines.append(f"  sharpness witness: diamonds {{{','.join(map(str, diamonds))}}}, {where} ({count} branches)")
    lines.append(f"suite failures: {s['suite_failures']}")
    if s["finite_suite_failures"]:
        lines.append(f"suite failures on finite-dimensional leaves (not thin, informational): {s['finite_suite_failures']}")
    return "\n".join(lines)


def _field_arg(args) -> int:
    if args.p is None:
        raise InputError("this command needs -p")
    return args.p


def cmd_catalog(args) -> int:
    if args.action == "list":
        for name in CATALOG:
            print(name)
        return OK
    if args.name is None:
        raise InputError("catalog emit needs a name")
    S = _catalog(args.name, _field_arg(args))
    _write(_json(S.to_json()), args.output)
    return OK


def _catalog(name: str, p: int) -> FiniteGradedAlgebra:
    try:
        return catalog(name, make_field(p))
    except KeyError as exc:
        raise InputError(exc.args[0]) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_export(args) -> int:
    src = args.source
    if src in CATALOG:
        doc = _catalog(src, _field_arg(args)).to_json()
    elif src.endswith(".jsonl"):
        rows = [json.loads(line) for line in _read(src).splitlines() if line.strip()]
        if not 0 <= args.leaf < len(rows):
            raise InputError(f"leaf index {args.leaf} out of range (file has {len(rows)} leaves)")
        row = rows[args.leaf]
        if "char" not in row:
            raise InputError("leaf record carries no characteristic")
        doc = {"char": row["char"], "relators": row["relators"], "max_degree": len(row["dims"])}
        Presentation.from_json(doc)
    else:
        try:
            data = json.loads(_read(src))
        except json.JSONDecodeError as exc:
            raise InputError(f"{src} is not valid JSON: {exc}") from exc
        if isinstance(data, dict) and "basis" in data:
            doc = _load_finite(json.dumps(data)).to_json()
        elif isinstance(data, dict) and "relators" in data:
            doc = Presentation.from_json(data).to_json()
        else:
            raise InputError(f"{src} is neither an algebra nor a presentation")
    _write(_json(doc), args.output)
    return OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thinlie", description="Graded Lie algebras, thinness and sandwich checks.")
    ap.add_argument("--version", action="version", version=f"thinlie {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    q = sub.add_parser("quotient", help="quotient of the free Lie algebra by a presentation")
    q.add_argument("file", nargs="?", help="presentation JSON ('-' for stdin)")
    q.add_argument("--max-deg", type=int, help="override the presentation's max_degree")
    q.add_argument("--paper-identities", action="store_true", help="run the fixed identity regression set")
    q.add_argument("-p", type=int, help="characteristic for --paper-identities (default: 7 and 0)")
    fmt(q)
    q.set_defaults(func=cmd_quotient)

    lp = sub.add_parser("loop", help="loop algebra of a cyclically graded algebra")
    lp.add_argument("file", nargs="?", default="-", help="algebra JSON ('-' for stdin)")
    lp.add_argument("--unit", type=int, default=1, help="multiply degrees by this unit mod N")
    lp.add_argument("--max-deg", type=int, default=20)
    fmt(lp)
    lp.set_defaults(func=cmd_loop)

    ex = sub.add_parser("explore", help="enumerate thin quotients over GF(p)")
    ex.add_argument("-p", type=int, required=True)
    ex.add_argument("--max-deg", type=int, required=True, help="horizon")
    ex.add_argument("--require", action="append", default=[], metavar="dimN=D")
    ex.add_argument("--second-diamond", type=int)
    ex.add_argument("--forbid-second-diamond", type=int, action="append", default=[])
    ex.add_argument("--budget", type=int, default=ExploreConstraints.__dataclass_fields__["budget"].default)
    ex.add_argument("--jobs", type=int, default=1)
    ex.add_argument("--checkpoint")
    ex.add_argument("-o", "--output", help="write leaf JSONL here (default stdout, summary to stderr)")
    fmt(ex)
    ex.set_defaults(func=cmd_explore)

    ca = sub.add_parser("catalog", help="built-in algebras")
    ca.add_argument("action", choices=("list", "emit"))
    ca.add_argument("name", nargs="?")
    ca.add_argument("-p", type=int)
    ca.add_argument("-o", "--output")
    ca.set_defaults(func=cmd_catalog)

    xp = sub.add_parser("export", help="write an algebra or presentation file")
    xp.add_argument("source", help="catalog name, algebra/presentation JSON, or explorer JSONL")
    xp.add_argument("-p", type=int)
    xp.add_argument("--leaf", type=int, default=0, help="leaf index in an explorer JSONL file")
    xp.add_argument("-o", "--output")
    xp.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (InputError, PresentationError, AlgebraFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
