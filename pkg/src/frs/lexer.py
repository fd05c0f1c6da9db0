"""Tokenizer for FRS source text.

Covers the number literal forms (base prefixes, underscores, exponents,
width suffixes), char/byte/string escapes, and raw strings with any number
of ``#`` delimiters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, NamedTuple

from .errors import (
    EmptyCharLiteral,
    FloatWithBasePrefix,
    InvalidDigitForBase,
    InvalidEscape,
    LexError,
    SourceSpan,
    UnknownCharacter,
    UnknownSuffix,
    UnterminatedRawString,
    UnterminatedString,
)

INT_LIT = "IntLit"
FLOAT_LIT = "FloatLit"
CHAR_LIT = "CharLit"
BYTE_LIT = "ByteLit"
STR_LIT = "StrLit"
BYTE_STR_LIT = "ByteStrLit"
IDENT = "Ident"
KEYWORD = "Keyword"
PUNCT = "Punct"
DELIM = "Delim"

LITERAL_KINDS = {INT_LIT, FLOAT_LIT, CHAR_LIT, BYTE_LIT, STR_LIT, BYTE_STR_LIT}

KEYWORDS = frozenset(
    "fn let mut struct enum trait impl for in match if else loop while break "
    "return box ref self true false macro_rules".split()
)

UNTYPED = "untyped"
INT_SUFFIXES = ("i", "u", "i8", "u8", "i16", "u16", "i32", "u32", "i64", "u64")
FLOAT_SUFFIXES = ("f32", "f64")

# longest first
PUNCTUATION = (
    "<<=", ">>=", "...",
    "::", "->", "=>", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>",
    "+=", "-=", "*=", "/=", "%=", "^=", "&=", "|=", "..",
    "+", "-", "*", "/", "%", "^", "!", "&", "|", "=", "<", ">", "@",
    ".", ",", ";", ":", "#", "$", "?",
)
DELIMITERS = "()[]{}"

MAX_RAW_HASHES = 255

_SIMPLE_ESCAPES = {
    "\\": "\\",
    "'": "'",
    '"': '"',
    "0": "\0",
    "t": "\t",
    "n": "\n",
    "r": "\r",
}
_HEX = set("0123456789abcdefABCDEF")


@dataclass
class Token:
    kind: str
    text: str
    payload: Any = None
    suffix: str | None = None
    span: SourceSpan = field(default=None, compare=False, repr=False)
    offset: int = field(default=0, compare=False, repr=False)

    def is_punct(self, text: str) -> bool:
        return self.kind in (PUNCT, DELIM) and self.text == text

    def is_keyword(self, text: str) -> bool:
        return self.kind == KEYWORD and self.text == text


class NumberValue(NamedTuple):
    kind: str  # "int" | "float"
    magnitude: int | float
    suffix: str


def decode_number(text: str) -> NumberValue:
    """Decode a numeric literal into (kind, magnitude, suffix).

    Underscores are dropped from every digit group; the suffix, if any,
    decides the declared width.
    """
    if len(text) > 1 and text[0] == "0" and text[1] in "xob":
        return _decode_prefixed(text)
    i = 0
    n = len(text)
    while i < n and (text[i].isdigit() or text[i] == "_"):
        i += 1
    is_float = False
    if i < n and text[i] == "." and i + 1 < n and text[i + 1].isdigit():
        is_float = True
        i += 1
        while i < n and (text[i].isdigit() or text[i] == "_"):
            i += 1
    if i < n and text[i] in "eE":
        j = i + 1
        if j < n and text[j] in "+-":
            j += 1
        k = j
        while k < n and (text[k].isdigit() or text[k] == "_"):
            k += 1
        if any(c.isdigit() for c in text[j:k]):
            is_float = True
            i = k
    body = text[:i].replace("_", "")
    suffix = text[i:].lstrip("_") if i < n else ""
    if not body or not body[0].isdigit():
        raise LexError(f"malformed number literal {text!r}")
    if suffix and suffix not in INT_SUFFIXES and suffix not in FLOAT_SUFFIXES:
        raise UnknownSuffix(f"unknown suffix {suffix!r} on number literal {text!r}")
    if is_float or suffix in FLOAT_SUFFIXES:
        if suffix in INT_SUFFIXES:
            raise UnknownSuffix(f"integer suffix {suffix!r} on float literal {text!r}")
        return NumberValue("float", float(body), suffix or UNTYPED)
    return NumberValue("int", int(body), suffix or UNTYPED)


def _decode_prefixed(text: str) -> NumberValue:
    base = {"x": 16, "o": 8, "b": 2}[text[1]]
    i = 2
    n = len(text)
    digits = []
    while i < n and (text[i] == "_" or text[i].isdigit() or (base == 16 and text[i] in _HEX)):
        if text[i] != "_":
            if int(text[i], 16) >= base:
                raise InvalidDigitForBase(f"invalid digit {text[i]!r} for base {base} literal {text!r}")
            digits.append(text[i])
        i += 1
    rest = text[i:]
    if rest.startswith(".") or (base != 16 and rest[:1] in ("e", "E")):
        raise FloatWithBasePrefix(f"float literal {text!r} cannot have a base prefix")
    suffix = rest.lstrip("_")
    if suffix in FLOAT_SUFFIXES:
        raise FloatWithBasePrefix(f"float suffix on base-prefixed literal {text!r}")
    if suffix and suffix not in INT_SUFFIXES:
        raise UnknownSuffix(f"unknown suffix {suffix!r} on number literal {text!r}")
    if not digits:
        raise InvalidDigitForBase(f"no digits in base {base} literal {text!r}")
    return NumberValue("int", int("".join(digits), base), suffix or UNTYPED)


def decode_escapes(body: str, mode: str) -> str | bytes:
    """Decode the text between quotes.

    ``mode`` is one of ``char``, ``byte``, ``string``, ``byte-string``.
    Char modes return ``str``; byte modes return ``bytes``.
    """
    byte_mode = mode in ("byte", "byte-string")
    out: list[str] = []
    i = 0
    n = len(body)
    while i < n:
        c = body[i]
        if c != "\\":
            if byte_mode and ord(c) > 0x7F:
                raise LexError(f"non-ASCII character {c!r} in byte literal")
            out.append(c)
            i += 1
            continue
        if i + 1 >= n:
            raise InvalidEscape("dangling backslash")
        e = body[i + 1]
        if e == "0" and i + 2 < n and body[i + 2] in "01234567":
            raise InvalidEscape(f"octal escapes are not supported: \\{body[i + 1:i + 5]}")
        if e in _SIMPLE_ESCAPES:
            out.append(_SIMPLE_ESCAPES[e])
            i += 2
        elif e == "x":
            hexd = body[i + 2:i + 4]
            if len(hexd) != 2 or not set(hexd) <= _HEX:
                raise InvalidEscape(f"\\x escape needs two hex digits, got {hexd!r}")
            out.append(chr(int(hexd, 16)))
            i += 4
        elif e in "uU" and not byte_mode:
            width = 4 if e == "u" else 8
            hexd = body[i + 2:i + 2 + width]
            if len(hexd) != width or not set(hexd) <= _HEX:
                raise InvalidEscape(f"\\{e} escape needs {width} hex digits, got {hexd!r}")
            cp = int(hexd, 16)
            if cp > 0x10FFFF or 0xD800 <= cp <= 0xDFFF:
                raise InvalidEscape(f"\\{e}{hexd} is not a Unicode scalar value")
            out.append(chr(cp))
            i += 2 + width
        else:
            raise InvalidEscape(f"unknown escape \\{e}")
    text = "".join(out)
    if mode in ("char", "byte"):
        if not text:
            raise EmptyCharLiteral("empty character literal")
        if len(text) != 1:
            raise LexError(f"character literal must hold exactly one character, got {len(text)}")
    if byte_mode:
        return text.encode("latin-1")
    return text


class Lexer:
    def __init__(self, source: str, file_id: str = ""):
        self.src = source
        self.file_id = file_id
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.src[i] if i < len(self.src) else ""

    def advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def span_from(self, line: int, col: int) -> SourceSpan:
        return SourceSpan(line, col, self.line, self.col, self.file_id)

    def here(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, self.line, self.col + 1, self.file_id)

    def tokenize(self) -> list[Token]:
        while True:
            self.skip_trivia()
            if self.pos >= len(self.src):
                return self.tokens
            self.tokens.append(self.next_token())

    def skip_trivia(self) -> None:
        while self.pos < len(self.src):
            c = self.src[self.pos]
            if c.isspace():
                self.advance()
            elif self.src.startswith("//", self.pos):
                while self.pos < len(self.src) and self.src[self.pos] != "\n":
                    self.advance()
            else:
                return

    def next_token(self) -> Token:
        start, line, col = self.pos, self.line, self.col
        c = self.src[self.pos]
        try:
            if c.isdigit():
                kind, payload, suffix = self.lex_number()
            elif c == "'":
                kind, payload, suffix = self.lex_char(byte=False)
            elif c == '"':
                kind, payload, suffix = self.lex_string(byte=False)
            elif c == "b" and self.peek(1) == "'":
                self.advance()
                kind, payload, suffix = self.lex_char(byte=True)
            elif c == "b" and self.peek(1) == '"':
                self.advance()
                kind, payload, suffix = self.lex_string(byte=True)
            elif self.at_raw_string():
                kind, payload, suffix = self.lex_raw_string()
            elif c.isalpha() or c == "_":
                while self.pos < len(self.src) and (self.src[self.pos].isalnum() or self.src[self.pos] == "_"):
                    self.advance()
                text = self.src[start:self.pos]
                kind = KEYWORD if text in KEYWORDS else IDENT
                payload, suffix = text, None
            elif c in DELIMITERS:
                self.advance()
                kind, payload, suffix = DELIM, c, None
            elif self.src.startswith("/*", self.pos):
                raise UnknownCharacter("block comments are not supported", self.here())
            else:
                for p in PUNCTUATION:
                    if self.src.startswith(p, self.pos):
                        self.advance(len(p))
                        kind, payload, suffix = PUNCT, p, None
                        break
                else:
                    raise UnknownCharacter(f"unexpected character {c!r}", self.here())
        except LexError as err:
            if err.span.start_line == 0:
                err.span = SourceSpan(line, col, self.line, max(self.col, col + 1), self.file_id)
            raise
        return Token(kind, self.src[start:self.pos], payload, suffix, self.span_from(line, col), start)

    def lex_number(self) -> tuple:
        start = self.pos
        src = self.src
        n = len(src)
        if src[self.pos] == "0" and self.peek(1) in ("x", "o", "b"):
            self.advance(2)
            while self.pos < n and (src[self.pos].isalnum() or src[self.pos] == "_"):
                self.advance()
            if self.peek() == "." and self.peek(1).isdigit():
                self.advance()
                while self.pos < n and (src[self.pos].isalnum() or src[self.pos] == "_"):
                    self.advance()
        else:
            while self.pos < n and (src[self.pos].isdigit() or src[self.pos] == "_"):
                self.advance()
            if self.peek() == "." and self.peek(1).isdigit():
                self.advance()
                while self.pos < n and (src[self.pos].isdigit() or src[self.pos] == "_"):
                    self.advance()
            if self.peek() in ("e", "E"):
                k = 1
                if self.peek(k) in ("+", "-"):
                    k += 1
                j = k
                while self.peek(j) == "_":
                    j += 1
                if self.peek(j).isdigit():
                    self.advance(k)
                    while self.pos < n and (src[self.pos].isdigit() or src[self.pos] == "_"):
                        self.advance()
            while self.pos < n and (src[self.pos].isalnum() or src[self.pos] == "_"):
                self.advance()
        value = decode_number(src[start:self.pos])
        kind = INT_LIT if value.kind == "int" else FLOAT_LIT
        return kind, value.magnitude, value.suffix

    def _scan_quoted(self, quote: str, error) -> str:
        """Consume an opening quote, a body with escapes, and the closing quote."""
        self.advance()
        body_start = self.pos
        while True:
            if self.pos >= len(self.src):
                raise error("unterminated literal")
            c = self.src[self.pos]
            if c == "\\":
                self.advance()
                if self.pos >= len(self.src):
                    raise error("unterminated literal")
                self.advance()
            elif c == quote:
                body = self.src[body_start:self.pos]
                self.advance()
                return body
            elif c == "\n" and quote == "'":
                raise error("unterminated character literal")
            else:
                self.advance()

    def lex_char(self, byte: bool) -> tuple:
        line, col = self.line, self.col
        if self.peek() == "'" and self.peek(1) == "'":
            self.advance(2)
            raise EmptyCharLiteral("empty character literal", self.span_from(line, col))
        body = self._scan_quoted("'", UnterminatedString)
        if byte:
            return BYTE_LIT, decode_escapes(body, "byte")[0], "u8"
        return CHAR_LIT, decode_escapes(body, "char"), None

    def lex_string(self, byte: bool) -> tuple:
        body = self._scan_quoted('"', UnterminatedString)
        if byte:
            return BYTE_STR_LIT, decode_escapes(body, "byte-string"), None
        return STR_LIT, decode_escapes(body, "string"), None

    def at_raw_string(self) -> bool:
        if self.peek() != "r":
            return False
        k = 1
        if self.peek(1) == "b":
            k = 2
        while self.peek(k) == "#":
            k += 1
        return self.peek(k) == '"'

    def lex_raw_string(self) -> tuple:
        """Raw string: no escape processing, closes on a quote plus the same hash count."""
        line, col = self.line, self.col
        self.advance()
        byte = self.peek() == "b"
        if byte:
            self.advance()
        hashes = 0
        while self.peek() == "#":
            hashes += 1
            self.advance()
        if hashes > MAX_RAW_HASHES:
            raise LexError(f"raw string uses {hashes} '#' delimiters (max {MAX_RAW_HASHES})",
                           self.span_from(line, col))
        self.advance()  # opening quote
        closing = '"' + "#" * hashes
        end = self.src.find(closing, self.pos)
        if end < 0:
            while self.pos < len(self.src):
                self.advance()
            raise UnterminatedRawString("unterminated raw string", self.span_from(line, col))
        body = self.src[self.pos:end]
        self.advance(end - self.pos + len(closing))
        if byte:
            if any(ord(ch) > 0x7F for ch in body):
                raise LexError("non-ASCII character in raw byte string", self.span_from(line, col))
            return BYTE_STR_LIT, body.encode("latin-1"), None
        return STR_LIT, body, None


def tokenize(source: str, file_id: str = "") -> list[Token]:
    return Lexer(source, file_id).tokenize()


def lex_raw_string(source: str) -> Token:
    """Lex a single raw string literal starting at the beginning of ``source``."""
    lx = Lexer(source)
    if not lx.at_raw_string():
        raise LexError("not a raw string literal", lx.here())
    kind, payload, suffix = lx.lex_raw_string()
    return Token(kind, source[:lx.pos], payload, suffix, lx.span_from(1, 1), 0)


def payload_repr(tok: Token) -> str:
    if tok.kind in (INT_LIT, FLOAT_LIT):
        return f"{tok.payload!r} {tok.suffix}"
    if tok.kind == BYTE_LIT:
        return f"{tok.payload} u8"
    if tok.kind == CHAR_LIT:
        return f"U+{ord(tok.payload):04X}"
    if tok.kind == STR_LIT:
        return json.dumps(tok.payload, ensure_ascii=False)
    if tok.kind == BYTE_STR_LIT:
        return "[" + ", ".join(str(b) for b in tok.payload) + "]"
    return tok.text


def dump_tokens(tokens: list[Token]) -> str:
    """One token per line: ``LINE:COL KIND TEXT → PAYLOAD``."""
    lines = []
    for tok in tokens:
        text = tok.text.replace("\\", "\\\\").replace("\n", "\\n")
        lines.append(f"{tok.span.start_line}:{tok.span.start_col} {tok.kind} {text} → {payload_repr(tok)}")
    return "".join(line + "\n" for line in lines)
