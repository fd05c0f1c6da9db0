"""Shared helpers for the test modules."""

from __future__ import annotations

import re
from pathlib import Path

from frs import check_program, compile_source, desugar_program, run_program

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
OK_FILES = sorted(CORPUS.glob("*_ok.frs"))
INVALID_FILES = sorted(CORPUS.glob("*_invalid.frs"))
ALL_FILES = sorted(CORPUS.glob("*.frs"))

_INVALID = re.compile(r"//\s*invalid!")
_OK = re.compile(r"//\s*OK\b")


def acceptance(number: int, title: str):
    """Tag a test as the check for one acceptance criterion."""
    def mark(fn):
        fn.acceptance_criterion = number
        fn.acceptance_title = title
        return fn
    return mark


def annotations(source: str) -> tuple[set[int], set[int], set[int]]:
    """Line numbers marked invalid, marked OK, and marked as errata."""
    invalid, ok, errata = set(), set(), set()
    for i, line in enumerate(source.splitlines(), 1):
        if _INVALID.search(line):
            invalid.add(i)
        elif _OK.search(line):
            ok.add(i)
        if "[erratum]" in line:
            errata.add(i)
    return invalid, ok, errata


def run(source: str, checked: bool = False) -> str:
    """Evaluate source and return stdout; raises the runtime error if any."""
    program = compile_source(source)
    if checked:
        errors = [d for d in check_program(program) if d.severity == "error"]
        assert not errors, errors
    out, status, err = run_program(desugar_program(program))
    if err is not None:
        raise err
    return out


def run_sugared(source: str) -> str:
    """Evaluate without the desugaring pass (operators and for loops run natively)."""
    out, status, err = run_program(compile_source(source))
    if err is not None:
        raise err
    return out


def main_of(body: str) -> str:
    return "fn main() {\n" + body + "\n}\n"
