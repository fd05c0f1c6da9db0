"""Command-line driver: ``frs {lex,parse,expand,desugar,check,run} FILE``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

from .checker import check_program
from .desugar import desugar_program
from .errors import Diagnostic, FrsError, ParseFailure
from .lexer import Token, dump_tokens, payload_repr, tokenize
from .macros import default_depth_limit, expand_all
from .syntax import nodes as n
from .syntax.parser import parse_program
from .syntax.printer import pretty_print
from .syntax.treeio import dump_tree, load_tree, looks_like_tree

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2
SUBCOMMANDS = ("lex", "parse", "expand", "desugar", "check", "run")
FORMATS = {
    "lex": ("text", "tokens", "json"),
    "parse": ("text", "tree", "json"),
    "expand": ("text", "tree", "tokens", "json"),
    "desugar": ("text", "tree", "json"),
    "check": ("text", "json"),
    "run": ("text",),
}


@dataclass
class CliInvocation:
    subcommand: str
    path: str
    format: str = "text"
    macro_depth: int | None = None
    deny_warnings: bool = False
    unchecked: bool = False

    @property
    def display_name(self) -> str:
        return "<stdin>" if self.path == "-" else self.path


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("macro depth must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frs", description="Lex, parse, expand, desugar, check and run FRS programs.")
    sub = ap.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    helps = {
        "lex": "dump the token stream",
        "parse": "parse and pretty-print (or dump the tree)",
        "expand": "expand macros",
        "desugar": "expand macros, then rewrite operators and for loops",
        "check": "run the ownership and mutability checker",
        "run": "check, then evaluate main()",
    }
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("path", metavar="FILE", help="source file, or '-' for stdin")
        sp.add_argument("--format", choices=FORMATS[name], default="text", help="output format")
        sp.add_argument("--macro-depth", type=_positive, default=None,
                        help="macro expansion depth limit (default: $FRS_MACRO_DEPTH or 128)")
        sp.add_argument("--deny-warnings", action="store_true", help="treat warnings as errors")
        if name == "run":
            sp.add_argument("--unchecked", action="store_true", help="run even if the checker reports errors")
    return ap


# rendering

def render_diagnostics(diags: list[Diagnostic], source: str, fmt: str = "text", filename: str = "<input>") -> str:
    diags = sorted(diags, key=Diagnostic.sort_key)
    if fmt == "json":
        return "".join(json.dumps(d.to_json()) + "\n" for d in diags)
    lines = source.splitlines()
    out = []
    for d in diags:
        out.append(f"{filename}:{d.line}:{d.col}: {d.severity}[{d.code}]: {d.message}")
        if 1 <= d.line <= len(lines):
            text = lines[d.line - 1]
            width = 1
            if d.span.end_line == d.span.start_line and d.span.end_col > d.span.start_col:
                width = d.span.end_col - d.span.start_col
            pad = "".join(c if c == "\t" else " " for c in text[:max(d.col - 1, 0)])
            out.append(f"    {text}")
            out.append(f"    {pad}{'^' * width}")
        if d.note:
            where = f" ({d.note_span.start_line}:{d.note_span.start_col})" if d.note_span else ""
            out.append(f"    note: {d.note}{where}")
    return "".join(line + "\n" for line in out)


def summary_line(diags: list[Diagnostic]) -> str:
    errors = sum(d.severity == "error" for d in diags)
    warnings = len(diags) - errors
    text = f"{errors} error{'' if errors == 1 else 's'}"
    if warnings:
        text += f", {warnings} warning{'' if warnings == 1 else 's'}"
    return text


def _jsonable(v):
    if isinstance(v, Token):
        return {"token": v.kind, "text": v.text}
    if isinstance(v, n.Node):
        obj = {"node": type(v).__name__}
        if v.span is not None:
            obj["span"] = [v.span.start_line, v.span.start_col, v.span.end_line, v.span.end_col]
        for f in fields(v):
            if f.name != "span":
                obj[f.name] = _jsonable(getattr(v, f.name))
        return obj
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, bytes):
        return list(v)
    return v


def tree_json(node) -> str:
    return json.dumps(_jsonable(node), ensure_ascii=False) + "\n"


def tokens_json(tokens: list[Token]) -> str:
    return "".join(json.dumps({"line": t.span.start_line, "col": t.span.start_col, "kind": t.kind,
                               "text": t.text, "payload": payload_repr(t)}, ensure_ascii=False) + "\n"
                   for t in tokens)


def _ensure_newline(text: str) -> str:
    return text if text.endswith("\n") or not text else text + "\n"


# driver

class Driver:
    def __init__(self, inv: CliInvocation, stdout, stderr):
        self.inv = inv
        self.stdout = stdout
        self.stderr = stderr
        self.source = ""

    def fail(self, diags: list[Diagnostic]) -> int:
        fmt = "json" if self.inv.format == "json" else "text"
        self.stderr.write(render_diagnostics(diags, self.source, fmt, self.inv.display_name))
        return EXIT_ERROR

    def depth(self) -> int:
        return self.inv.macro_depth if self.inv.macro_depth is not None else default_depth_limit()

    def emit_tree(self, node) -> None:
        fmt = self.inv.format
        if fmt == "tree":
            self.stdout.write(dump_tree(node) + "\n")
        elif fmt == "json":
            self.stdout.write(tree_json(node))
        elif fmt == "tokens":
            self.stdout.write(dump_tokens(tokenize(pretty_print(node))))
        else:
            self.stdout.write(_ensure_newline(pretty_print(node)))

    def run(self) -> int:
        inv = self.inv
        fid = inv.display_name
        try:
            if inv.subcommand == "lex":
                toks = tokenize(self.source, fid)
                self.stdout.write(tokens_json(toks) if inv.format == "json" else dump_tokens(toks))
                return EXIT_OK
            if inv.subcommand == "run" and looks_like_tree(self.source):
                return self.execute(load_tree(self.source))
            program = parse_program(tokenize(self.source, fid))
            if inv.subcommand == "parse":
                self.emit_tree(program)
                return EXIT_OK
            program = expand_all(program, depth_limit=self.depth())
            if inv.subcommand == "expand":
                self.emit_tree(program)
                return EXIT_OK
            if inv.subcommand == "desugar":
                self.emit_tree(desugar_program(program))
                return EXIT_OK
            diags = check_program(program)
            blocking = [d for d in diags if d.severity == "error" or inv.deny_warnings]
            if inv.subcommand == "check":
                if diags:
                    self.fail(diags)
                self.stdout.write(summary_line(diags) + "\n")
                return EXIT_ERROR if blocking else EXIT_OK
            if diags:
                self.fail(diags)
            if blocking and not inv.unchecked:
                self.stderr.write(f"{fid}: not running: {summary_line(diags)}\n")
                return EXIT_ERROR
            return self.execute(desugar_program(program))
        except ParseFailure as exc:
            return self.fail([e.to_diagnostic() for e in exc.errors])
        except FrsError as exc:
            return self.fail([exc.to_diagnostic()])

    def execute(self, program: n.Program) -> int:
        from .interp import run_program
        out, status, err = run_program(program)
        self.stdout.write(out)
        if err is not None:
            self.fail([err.to_diagnostic()])
        return status


def read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    inv = CliInvocation(args.subcommand, args.path, args.format, args.macro_depth, args.deny_warnings,
                        getattr(args, "unchecked", False))
    driver = Driver(inv, stdout, stderr)
    try:
        driver.source = read_source(inv.path)
    except (OSError, UnicodeDecodeError) as exc:
        stderr.write(f"frs: cannot read {inv.path}: {exc.strerror if isinstance(exc, OSError) else exc}\n")
        return EXIT_USAGE
    return driver.run()


def entry() -> None:
    sys.exit(main())
