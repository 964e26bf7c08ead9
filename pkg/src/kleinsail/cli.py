"""Command line interface.

Exit codes:
    0   success
    1   mismatch (golden diff, symmetry permutation, inequivalent survey candidate)
    2   verification failure (invariant violation, symmetry does not preserve the sail)
    3   survey finished with unresolved candidates
    4   resource exhaustion (enumeration caps, budgets)
    5   classification failure (operator not unimodular, reducible or not hyperbolic)
    64  usage error
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig, dumps, example_config, load_config, load_json
from .errors import (
    BudgetError,
    ClassificationError,
    DomainError,
    InvariantViolation,
    ResourceError,
    VerificationError,
    WordSyntaxError,
)
from .export import FORMATS, export

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_VERIFY = 2
EXIT_UNRESOLVED = 3
EXIT_RESOURCE = 4
EXIT_CLASSIFY = 5
EXIT_USAGE = 64

log = logging.getLogger("kleinsail")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    return [int(a) for a in text.replace(",", " ").split()]


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bound", type=int, help="enumeration bound cap for the sail patch")
    p.add_argument("--depth", type=int, help="exponent depth for seed images")
    p.add_argument("--precision", type=int, help="bits for log-coordinate intervals")
    p.add_argument("--exponent-box", type=int, help="fallback orbit search box |m_i| <= N")
    p.add_argument("--out", help="write the report here instead of stdout")


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    if args.bound is not None:
        cfg.bound_cap = args.bound
    if args.depth is not None:
        cfg.depth = args.depth
    if args.precision is not None:
        cfg.precision = args.precision
    if args.exponent_box is not None:
        cfg.exponent_box = args.exponent_box
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kleinsail", description="Certified sails of hyperbolic operators on Z^4.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="run the full pipeline on a configuration")
    a.add_argument("config", nargs="?", help="config file or shipped name (example1, ...)")
    a.add_argument("--companion", help="a,b,c,d of the companion operator")
    a.add_argument("--matrix", help="operator as a JSON 4x4 list")
    a.add_argument("--words", help="three generator words separated by ';'")
    a.add_argument("--recheck", action="store_true", help="re-derive every claim of the report")
    _add_run_flags(a)

    v = sub.add_parser("verify-example", help="compare an example against its golden file")
    v.add_argument("n", type=int, choices=(1, 2, 3))
    v.add_argument("--recheck", action="store_true")
    _add_run_flags(v)

    s = sub.add_parser("symmetry", help="induced permutation of face classes")
    s.add_argument("spec", nargs="?", default="statement2", help="symmetry file or shipped name")
    s.add_argument("--matrix", help="override the symmetry matrix (JSON 4x4 list)")
    _add_run_flags(s)

    sv = sub.add_parser("survey", help="small-matrix survey against Example 1")
    sv.add_argument("max_abs_sum", type=int)
    sv.add_argument("--checkpoint", help="resumable checkpoint file")
    sv.add_argument("--out")

    e = sub.add_parser("export", help="export a report document")
    e.add_argument("document", help="report JSON written by analyze")
    e.add_argument("--format", required=True, dest="fmt")
    e.add_argument("--out")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_analyze(args) -> int:
    from .pipeline import analyze, document, recheck

    sources = [x for x in (args.config, args.companion, args.matrix) if x]
    if len(sources) != 1:
        raise UsageError("give exactly one of CONFIG, --companion, --matrix")
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig()
        if args.companion:
            cfg.companion = tuple(_int_list(args.companion))
        else:
            cfg.matrix = tuple(tuple(r) for r in json.loads(args.matrix))
    if args.words:
        cfg.generators = tuple(w.strip() for w in args.words.split(";"))
        cfg.generator_names = ()
    cfg = _apply_flags(cfg, args)
    an = analyze(cfg)
    doc = document(an)
    if args.recheck:
        problems = recheck(doc, cfg.precision)
        doc["recheck"] = {"problems": problems}
        if problems:
            _emit(dumps(doc), args.out)
            return EXIT_VERIFY
    _emit(dumps(doc), args.out)
    return EXIT_OK


def _cmd_verify_example(args) -> int:
    from .pipeline import recheck, verify_example

    cfg = _apply_flags(example_config(args.n), args)
    _, gr, doc = verify_example(cfg)
    code = EXIT_OK if gr.ok else EXIT_MISMATCH
    if args.recheck:
        problems = recheck(doc, cfg.precision)
        doc["recheck"] = {"problems": problems}
        if problems:
            code = EXIT_VERIFY
    _emit(dumps(doc), args.out)
    for d in gr.diffs:
        print(f"diff: {d['item']} {d['field']}: expected {d['expected']}, computed {d['computed']}", file=sys.stderr)
    return code


def _cmd_symmetry(args) -> int:
    from .pipeline import run_symmetry

    spec = load_json(args.spec)
    if args.matrix:
        spec["matrix"] = json.loads(args.matrix)
        spec["expected"] = None
    cfg_over = load_config(spec["config"])
    spec["config"] = _apply_flags(cfg_over, args).to_dict()
    _, res, doc = run_symmetry(spec)
    _emit(dumps(doc), args.out)
    return EXIT_OK if res.matches else EXIT_MISMATCH


def _cmd_survey(args) -> int:
    from .pipeline import survey_report

    if args.max_abs_sum < 1:
        raise UsageError("max_abs_sum must be at least 1")
    rep = survey_report(args.max_abs_sum, Path(args.checkpoint) if args.checkpoint else None)
    _emit(dumps(rep.to_dict()), args.out)
    if rep.unresolved:
        return EXIT_UNRESOLVED
    if rep.mismatched:
        return EXIT_MISMATCH
    return EXIT_OK


def _cmd_export(args) -> int:
    if args.fmt not in FORMATS:
        raise UsageError(f"unsupported format {args.fmt!r}; choose from {', '.join(FORMATS)}")
    doc = json.loads(Path(args.document).read_text())
    text = export(doc, args.fmt)
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "analyze": _cmd_analyze,
    "verify-example": _cmd_verify_example,
    "symmetry": _cmd_symmetry,
    "survey": _cmd_survey,
    "export": _cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"kleinsail: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ClassificationError as exc:
        print(f"kleinsail: classification failure: {exc}", file=sys.stderr)
        return EXIT_CLASSIFY
    except (VerificationError, InvariantViolation) as exc:
        print(f"kleinsail: verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ResourceError, BudgetError) as exc:
        print(f"kleinsail: resource exhausted: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, WordSyntaxError, ValueError) as exc:
        print(f"kleinsail: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"kleinsail: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
