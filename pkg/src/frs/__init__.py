"""FRS: a small functional subset of Rust, with lexer, parser, macro expander,
desugarer, ownership checker and tree-walking interpreter."""

from .checker import check_program
from .desugar import desugar_program
from .errors import Diagnostic, FrsError, SourceSpan
from .interp import run_program
from .lexer import Token, tokenize
from .macros import expand_all
from .syntax.parser import parse, parse_program
from .syntax.printer import pretty_print

__version__ = "0.1.0"


def compile_source(source: str, file_id: str = "", depth_limit: int | None = None):
    """Parse and expand macros; returns the expanded (pre-desugar) program."""
    return expand_all(parse(source, file_id), depth_limit=depth_limit)


def run_source(source: str, file_id: str = "", checked: bool = True) -> tuple[str, int, FrsError | None]:
    """Full pipeline. With checked=True, checker errors stop the run (status 1, error is None)."""
    program = compile_source(source, file_id)
    if checked and any(d.severity == "error" for d in check_program(program)):
        return "", 1, None
    return run_program(desugar_program(program))


__all__ = [
    "Diagnostic", "FrsError", "SourceSpan", "Token", "check_program", "compile_source", "desugar_program",
    "expand_all", "parse", "parse_program", "pretty_print", "run_program", "run_source", "tokenize",
]
