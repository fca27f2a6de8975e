"""Command-line driver.

Exit status: 0 code / success, 1 a check failed, 2 unsafe, 3 bottom (or a
run out of fuel), 4 compile error, 5 unreadable or unparsable input,
6 a machine run trapped.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import embedding as emb
from . import generators as gen
from . import host as h
from . import kernel_tools as kt
from . import machine as m
from . import staged_source as src
from .machine import DEFAULT_FUEL

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_UNSAFE = 2
EXIT_BOTTOM = 3
EXIT_ERROR = 4
EXIT_PARSE = 5
EXIT_TRAP = 6

_OUTCOME_EXIT = {"code": EXIT_OK, "unsafe": EXIT_UNSAFE, "bottom": EXIT_BOTTOM,
                 "error": EXIT_ERROR}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is the Unsafe status here.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, "%s: error: %s\n" % (self.prog, message))


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _read_input(arg, unescape=False):
    """A path to an existing file, or the program text itself."""
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg.replace("\\n", "\n") if unescape else arg


def _load_suite(path):
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            suite = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError("cannot read suite %s: %s" % (path, exc)) from None
    if not isinstance(suite, list) or not suite or not all(
            isinstance(env, dict) and all(type(v) is int for v in env.values())
            for env in suite):
        raise InputError("suite must be a nonempty JSON list of {name: integer} objects")
    return suite


def _outcome_json(out):
    d = {"outcome": out.kind}
    if isinstance(out, m.Code):
        d["code"] = [str(i) for i in out.code.instrs]
    if isinstance(out, m.Error):
        d["message"] = out.message
    return d


def _emit(args, text, data):
    if args.format == "json":
        print(json.dumps(data, sort_keys=True, indent=2))
    elif text:
        print(text)


def _parse_term(text):
    try:
        return src.parse_source(text.strip())
    except src.SourceSyntaxError as exc:
        raise InputError("syntax error: %s" % exc) from None


def cmd_compile(args):
    text = _read_input(args.input)
    if args.lang == "u":
        try:
            prog = h.parse_host(text)
        except h.HostSyntaxError as exc:
            raise InputError("syntax error: %s" % exc) from None
        out = h.compile_u(prog, args.fuel)
    else:
        term = _parse_term(text)
        compiler = src.compile_a if args.lang == "a" else src.compile_a_safe
        out = compiler(term, args.fuel)
    _emit(args, m.describe(out), _outcome_json(out))
    return _OUTCOME_EXIT[out.kind]


def cmd_embed(args):
    term = _parse_term(_read_input(args.input))
    if not src.member_LA(term):
        raise InputError("not a program: escape body has free variables")
    prog = (emb.embed_stage if args.variant == "stage" else emb.embed_safe)(term)
    status = EXIT_OK
    data = {"program": h.format_host(prog)}
    lines = [h.format_host(prog)]
    if args.compile:
        out = h.compile_u(prog, args.fuel)
        data["compiled"] = _outcome_json(out)
        lines.append(m.describe(out))
        status = _OUTCOME_EXIT[out.kind]
    _emit(args, "\n".join(lines), data)
    return status


def _parse_var(text):
    name, sep, value = text.partition("=")
    if not sep or not m.IDENT.match(name):
        raise InputError("--var expects name=integer, got %r" % text)
    try:
        return name, int(value)
    except ValueError:
        raise InputError("--var expects name=integer, got %r" % text) from None


def cmd_run(args):
    try:
        code = m.parse_machine(_read_input(args.input, unescape=True))
    except m.MachineParseError as exc:
        raise InputError("parse error: %s" % exc) from None
    env = dict(_parse_var(v) for v in args.var)
    result = m.run_machine(code, env, args.fuel)
    if isinstance(result, m.Value):
        data, status = {"result": "value", "value": result.value}, EXIT_OK
    elif isinstance(result, m.Trapped):
        data, status = {"result": "trap", "reason": result.reason}, EXIT_TRAP
    else:
        data, status = {"result": "fuel"}, EXIT_BOTTOM
    _emit(args, str(result), data)
    return status


def _corpus_lines(path):
    try:
        return kt.read_corpus(path)
    except OSError as exc:
        raise InputError("cannot read corpus %s: %s" % (path, exc)) from None


def cmd_kernel(args):
    part = kt.kernel_classes(_corpus_lines(args.corpus), args.compiler, args.fuel)
    _emit(args, part.to_text(), part.to_dict())
    return EXIT_OK


def _check_corpora(args):
    """(corpus for semantics/stage/realizable, corpus for safety)."""
    if args.generate is not None:
        if args.corpus:
            raise InputError("give either a corpus file or --generate, not both")
        main = gen.generate_corpus(args.generate, args.seed)
        safety = [t for t, _ in gen.generate_safety_corpus(args.generate, args.seed)]
        return main, safety
    if not args.corpus:
        raise InputError("check needs a corpus file or --generate N")
    terms = []
    for line in _corpus_lines(args.corpus):
        term = _parse_term(line)
        if not src.member_LA(term):
            raise InputError("not a program: %s" % line)
        terms.append(term)
    return terms, terms


def run_checks(which, corpus, safety_corpus, suite=None, fuel=DEFAULT_FUEL):
    """Run the named check suites; returns (report dict, all passed)."""
    names = ["semantics", "stage", "safety", "realizable"] if which == "all" else [which]
    out, ok = {}, True
    for name in names:
        if name == "semantics":
            reports = [emb.check_semantics_preserving(e, corpus, suite, fuel)
                       for e in ("stage", "safe")]
        elif name == "stage":
            reports = [emb.check_stage_preserving(e, corpus, fuel) for e in ("stage", "safe")]
        elif name == "safety":
            reports = [emb.check_safety_preserving(safety_corpus, fuel)]
        else:
            reports = emb.realizability_suite(corpus, fuel)
        out[name] = [r.to_dict() for r in reports]
        ok = ok and all(r.ok for r in reports)
    return out, ok


def _check_text(results):
    lines = []
    for name, reports in results.items():
        for r in reports:
            if name == "realizable":
                lines.append("%-10s %-16s %s  passed=%d failed=%d skipped=%d" % (
                    name, r["function"], "PASS" if r["ok"] else "FAIL",
                    r["passed"], r["failed"], r["skipped"]))
            else:
                tallies = {k: r[k] for k in ("semantics", "stage", "injectivity", "safety",
                                             "plain_unsafe") if r[k] is not None}
                detail = " ".join("%s=%d/%d" % (k, t["passed"], t["passed"] + t["failed"])
                                  for k, t in tallies.items())
                lines.append("%-10s %-16s %s  corpus=%d pairs=%d %s" % (
                    name, r["embedding"], "PASS" if r["ok"] else "FAIL",
                    r["corpus_size"], r["pairs_checked"], detail))
                if r["safety_table"] is not None:
                    for judged, row in sorted(r["safety_table"].items()):
                        cells = " ".join("%s=%d" % kv for kv in sorted(row.items()))
                        lines.append("%-10s   %-8s -> %s" % ("", judged, cells))
            for k in ("semantics", "stage", "injectivity", "safety", "plain_unsafe"):
                t = r.get(k)
                for w in (t or {}).get("witnesses", []):
                    lines.append("    witness (%s): %s" % (k, json.dumps(w, sort_keys=True)))
            for w in r.get("witnesses", []) if name == "realizable" else []:
                lines.append("    witness: %s" % json.dumps(w, sort_keys=True))
    return "\n".join(lines)


def cmd_check(args):
    corpus, safety = _check_corpora(args)
    results, ok = run_checks(args.suite_name, corpus, safety, _load_suite(args.suite), args.fuel)
    _emit(args, _check_text(results), {"ok": ok, "fuel": args.fuel, "seed": args.seed,
                                        "reports": results})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _common_flags(with_defaults):
    # Subcommands re-declare the global flags without defaults so a flag
    # given before the subcommand is not overwritten.
    def d(value):
        return value if with_defaults else argparse.SUPPRESS
    common = _Parser(add_help=False)
    common.add_argument("--fuel", type=_positive, default=d(DEFAULT_FUEL),
                        help="step budget for compile-time and run-time evaluation")
    common.add_argument("--seed", type=int, default=d(0), help="seed for generated corpora")
    common.add_argument("--suite", default=d(None),
                        help="JSON file: list of {variable: integer} input environments")
    common.add_argument("--format", choices=("text", "json"), default=d("text"))
    return common


def build_parser():
    common = _common_flags(False)
    parser = _Parser(prog="stagelab", parents=[_common_flags(True)],
                     description="Staged-language embedding laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", parents=[common], help="compile a program")
    p.add_argument("lang", choices=("a", "a-safe", "u"))
    p.add_argument("input", help="program text or a file containing it")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("embed", parents=[common], help="embed a source program in the host")
    p.add_argument("variant", choices=("stage", "safe"))
    p.add_argument("input")
    p.add_argument("--compile", action="store_true", help="also compile the host program")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("run", parents=[common], help="run machine code")
    p.add_argument("input", help="machine code (\\n separates inline lines) or a file")
    p.add_argument("--var", action="append", default=[], metavar="NAME=VALUE")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("kernel", parents=[common], help="partition a corpus by compiled output")
    p.add_argument("corpus")
    p.add_argument("compiler", choices=sorted(kt.COMPILERS))
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("check", parents=[common], help="run the embedding checkers")
    p.add_argument("suite_name", choices=("semantics", "stage", "safety", "realizable", "all"))
    p.add_argument("corpus", nargs="?")
    p.add_argument("--generate", type=_positive, metavar="N")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print("stagelab: %s" % exc, file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
