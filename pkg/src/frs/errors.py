"""Source spans, diagnostics and the exception hierarchy shared by every stage."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class SourceSpan:
    start_line: int
    start_col: int
    end_line: int
    end_col: int
    file_id: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}-{self.end_line}:{self.end_col}"

    def to(self, other: "SourceSpan | None") -> "SourceSpan":
        """Span covering self through other."""
        if other is None:
            return self
        return SourceSpan(self.start_line, self.start_col, other.end_line, other.end_col, self.file_id)


NO_SPAN = SourceSpan(0, 0, 0, 0)


@dataclass
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: SourceSpan
    note: str | None = None
    note_span: SourceSpan | None = None

    @property
    def line(self) -> int:
        return self.span.start_line

    @property
    def col(self) -> int:
        return self.span.start_col

    def sort_key(self) -> tuple:
        return (self.span.start_line, self.span.start_col, self.code)

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "line": self.span.start_line,
            "col": self.span.start_col,
            "end_line": self.span.end_line,
            "end_col": self.span.end_col,
            "message": self.message,
        }


class FrsError(Exception):
    """Base for every failure raised by the pipeline."""

    code = "E-FRS"

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span or NO_SPAN

    def to_diagnostic(self) -> Diagnostic:
        return Diagnostic("error", self.code, self.message, self.span)


# lexer

class LexError(FrsError):
    code = "E-LEX"


class UnterminatedString(LexError):
    code = "E-UNTERMINATED-STRING"


class UnterminatedRawString(LexError):
    code = "E-UNTERMINATED-RAW-STRING"


class InvalidEscape(LexError):
    code = "E-INVALID-ESCAPE"


class InvalidDigitForBase(LexError):
    code = "E-INVALID-DIGIT"


class FloatWithBasePrefix(LexError):
    code = "E-FLOAT-BASE"


class EmptyCharLiteral(LexError):
    code = "E-EMPTY-CHAR"


class UnknownSuffix(LexError):
    code = "E-UNKNOWN-SUFFIX"


class UnknownCharacter(LexError):
    code = "E-UNKNOWN-CHAR"


# parser

class ParseError(FrsError):
    code = "E-PARSE"

    def __init__(self, message: str, span: SourceSpan | None = None,
                 expected: tuple[str, ...] = (), found: str = ""):
        super().__init__(message, span)
        self.expected = expected
        self.found = found


class ParseFailure(FrsError):
    """Raised after a whole-program parse that recorded one or more errors."""

    code = "E-PARSE"

    def __init__(self, errors: list[ParseError], program=None):
        super().__init__(errors[0].message, errors[0].span)
        self.errors = errors
        self.program = program


# macros

class MacroError(FrsError):
    code = "E-MACRO"


class MacroDefinitionError(MacroError):
    code = "E-MACRO-DEF"


class UnknownMacro(MacroError):
    code = "E-UNKNOWN-MACRO"


class NoRuleMatched(MacroError):
    code = "E-NO-RULE"


class RecursionLimitExceeded(MacroError):
    code = "E-MACRO-RECURSION"

    def __init__(self, message: str, span: SourceSpan | None = None, depth_limit: int = 0):
        super().__init__(message, span)
        self.depth_limit = depth_limit


class UnboundFragment(MacroError):
    code = "E-UNBOUND-FRAGMENT"


class RepetitionCountMismatch(MacroError):
    code = "E-REPETITION-MISMATCH"


# evaluation

class EvalError(FrsError):
    code = "E-RUNTIME"


class IndexOutOfBounds(EvalError):
    code = "E-INDEX-OOB"


class DivisionByZero(EvalError):
    code = "E-DIV-ZERO"


class NoMethodFound(EvalError):
    code = "E-NO-METHOD"


class AmbiguousMethod(EvalError):
    code = "E-AMBIGUOUS-METHOD"


class NonExhaustiveMatch(EvalError):
    code = "E-NON-EXHAUSTIVE"


class ArityMismatch(EvalError):
    code = "E-ARITY"


class UnknownIdentifier(EvalError):
    code = "E-UNKNOWN-IDENT"


class FormatArityMismatch(EvalError):
    code = "E-FORMAT-ARITY"


class TypeMismatch(EvalError):
    code = "E-TYPE"


class SharedMutation(EvalError):
    code = "E-SHARED-MUTATION"


class StackOverflow(EvalError):
    code = "E-STACK-OVERFLOW"
