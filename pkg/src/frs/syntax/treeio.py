"""Stable s-expression dump of syntax trees, and the matching reader.

Format::

    (ClassName @L:C-L:C field1 field2 ...)

Fields appear positionally in declaration order.  Scalars are JSON
(``"text"``, ``12``, ``1.5``, ``true``, ``null``); lists are ``[a b c]``;
bytes are ``#x"hex"``; tokens are ``(Token kind "text" payload suffix)``.
Children are indented two spaces per level so the dump diffs cleanly.
"""

from __future__ import annotations

import json
import re
from dataclasses import fields

from ..errors import ParseError, SourceSpan
from ..lexer import Token
from . import nodes as n


def _span_atom(span: SourceSpan | None) -> str:
    if span is None:
        return ""
    return f" @{span.start_line}:{span.start_col}-{span.end_line}:{span.end_col}"


def _scalar(v) -> str:
    if isinstance(v, bytes):
        return f'#x"{v.hex()}"'
    return json.dumps(v, ensure_ascii=False)


def dump_tree(node, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(node, Token):
        return (f"{pad}(Token{_span_atom(node.span)} {_scalar(node.kind)} {_scalar(node.text)} "
                f"{_scalar(node.payload)} {_scalar(node.suffix)})")
    if isinstance(node, n.Node):
        head = f"{pad}({type(node).__name__}{_span_atom(node.span)}"
        parts = []
        for f in fields(node):
            if f.name == "span":
                continue
            parts.append(_dump_value(getattr(node, f.name), indent + 1))
        if not parts:
            return head + ")"
        if all("\n" not in p and len(p.strip()) < 40 for p in parts):
            return head + " " + " ".join(p.strip() for p in parts) + ")"
        return head + "\n" + "\n".join(parts) + ")"
    return pad + _scalar(node)


def _dump_value(v, indent: int) -> str:
    pad = "  " * indent
    if isinstance(v, list):
        if not v:
            return pad + "[]"
        inner = [_dump_value(x, indent + 1) for x in v]
        if all("\n" not in p and len(p.strip()) < 30 for p in inner):
            return pad + "[" + " ".join(p.strip() for p in inner) + "]"
        return pad + "[\n" + "\n".join(inner) + "]"
    if isinstance(v, (n.Node, Token)):
        return dump_tree(v, indent)
    return pad + _scalar(v)


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<open>[(\[])
  | (?P<close>[)\]])
  | (?P<span>@\d+:\d+-\d+:\d+)
  | (?P<bytes>\#x"[0-9a-f]*")
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<atom>[^\s()\[\]"]+)
""", re.VERBOSE | re.DOTALL)


def _lex_sexpr(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"bad character in tree dump at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group()))
    return out


class _Reader:
    def __init__(self, text: str):
        self.toks = _lex_sexpr(text)
        self.i = 0

    def next(self):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of tree dump")
        t = self.toks[self.i]
        self.i += 1
        return t

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def value(self):
        kind, text = self.next()
        if kind == "open" and text == "(":
            return self.node()
        if kind == "open" and text == "[":
            items = []
            while self.peek() != ("close", "]"):
                items.append(self.value())
            self.next()
            return items
        if kind == "bytes":
            return bytes.fromhex(text[3:-1])
        if kind in ("string", "atom"):
            return json.loads(text)
        raise ParseError(f"unexpected {text!r} in tree dump")

    def node(self):
        kind, name = self.next()
        span = None
        if self.peek()[0] == "span":
            a, b = self.next()[1][1:].split("-")
            l1, c1 = a.split(":")
            l2, c2 = b.split(":")
            span = SourceSpan(int(l1), int(c1), int(l2), int(c2))
        args = []
        while self.peek() != ("close", ")"):
            args.append(self.value())
        self.next()
        if name == "Token":
            kind_, text, payload, suffix = args
            return Token(kind_, text, payload, suffix, span or SourceSpan(0, 0, 0, 0))
        cls = n.NODE_CLASSES.get(name)
        if cls is None:
            raise ParseError(f"unknown node type {name!r} in tree dump")
        node = cls(*args)
        node.span = span
        return node


def load_tree(text: str):
    r = _Reader(text)
    node = r.value()
    if r.i != len(r.toks):
        raise ParseError("trailing data after tree dump")
    return node


def looks_like_tree(text: str) -> bool:
    return text.lstrip().startswith("(Program")
