"""Source-form pretty printer.

The output re-parses to a structurally equal tree: parentheses are inserted
from the precedence table wherever the tree shape needs them, and blocks are
laid out with four-space indentation.
"""

from __future__ import annotations

from ..lexer import FLOAT_LIT, IDENT, INT_LIT, Token, tokenize
from . import nodes as n
from .parser import ASSIGN_BP, BINARY_BP, COMPARISON_BP, UNARY_BP

INDENT = "    "
POSTFIX_BP = 12
PRIMARY_BP = 13


def escape_text(text: str, quote: str) -> str:
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == quote:
            out.append("\\" + quote)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\0":
            out.append("\\0")
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    return "".join(out)


def format_literal(lit: n.Literal) -> str:
    kind, value = lit.kind, lit.value
    suffix = lit.suffix if lit.suffix and lit.suffix != "untyped" else ""
    if kind == "int":
        return f"{value}{suffix}"
    if kind == "float":
        return f"{value!r}{suffix}"
    if kind == "bool":
        return "true" if value else "false"
    if kind == "char":
        return "'" + escape_text(value, "'") + "'"
    if kind == "str":
        return '"' + escape_text(value, '"') + '"'
    if kind == "byte":
        return "b'" + _escape_bytes(bytes([value]), "'") + "'"
    if kind == "bytestr":
        return 'b"' + _escape_bytes(value, '"') + '"'
    raise ValueError(f"unknown literal kind {kind!r}")


def _escape_bytes(data: bytes, quote: str) -> str:
    out = []
    for b in data:
        if b > 0x7E:
            out.append(f"\\x{b:02x}")
        else:
            out.append(escape_text(chr(b), quote))
    return "".join(out)


# token streams (macro bodies)

def _needs_space(toks: list[Token], i: int) -> bool:
    a, b = toks[i - 1], toks[i]
    if a.text in ("(", "[", "$") and a.kind != IDENT:
        return False
    if b.text in (")", "]", ",", ";") and b.kind != IDENT:
        return False
    if b.text == "." and a.text not in (".", ".."):
        return a.kind == INT_LIT
    if a.text == "." and b.kind == IDENT:
        return False
    if b.text == "!" and a.kind == IDENT and i + 1 < len(toks) and toks[i + 1].text in ("(", "[", "{"):
        return False
    if a.text == "!" and b.text in ("(", "[", "{") and i >= 2 and toks[i - 2].kind == IDENT:
        return False
    if b.text == ":" and a.kind == IDENT and i >= 2 and toks[i - 2].text == "$":
        return False
    if a.text == ":" and i >= 3 and toks[i - 3].text == "$" and b.kind == IDENT:
        return False
    return True


def join_tokens(toks: list[Token]) -> str:
    if not toks:
        return ""
    parts = [toks[0].text]
    for i in range(1, len(toks)):
        if _needs_space(toks, i):
            parts.append(" ")
        parts.append(toks[i].text)
    text = "".join(parts)
    try:
        if tokenize(text) == list(toks):
            return text
    except Exception:
        pass
    return " ".join(t.text for t in toks)


# types

def format_type(t) -> str:
    if isinstance(t, n.TypePath):
        if t.args:
            return f"{t.name}<{', '.join(format_type(a) for a in t.args)}>"
        return t.name
    if isinstance(t, n.RefType):
        return ("&mut " if t.mutable else "&") + format_type(t.inner)
    if isinstance(t, n.TupleType):
        return "(" + ", ".join(format_type(a) for a in t.items) + ")"
    if isinstance(t, n.SliceType):
        return f"[{format_type(t.elem)}]"
    if isinstance(t, n.FnType):
        params = ", ".join(format_type(p) for p in t.params)
        head = f"|{params}|" if t.params else "||"
        return head + (f" -> {format_type(t.ret)}" if t.ret is not None else "")
    raise TypeError(f"not a type term: {t!r}")


# patterns

def format_pattern(p) -> str:
    if isinstance(p, n.WildcardPat):
        return "_"
    if isinstance(p, n.LitPat):
        return format_literal(p.value)
    if isinstance(p, n.BindPat):
        prefix = ("ref " if p.by_ref else "") + ("mut " if p.mutable else "")
        return prefix + p.name
    if isinstance(p, n.AtPat):
        return f"{p.name} @ {_pattern_operand(p.sub)}"
    if isinstance(p, n.TuplePat):
        if len(p.items) == 1:
            return f"({format_pattern(p.items[0])},)"
        return "(" + ", ".join(format_pattern(i) for i in p.items) + ")"
    if isinstance(p, n.VariantPat):
        return f"{p.name}(" + ", ".join(format_pattern(i) for i in p.items) + ")"
    if isinstance(p, n.RecordPat):
        parts = [f"{f.name}: {format_pattern(f.pattern)}" for f in p.fields]
        if p.rest:
            parts.append("..")
        return f"{p.name} {{ {', '.join(parts)} }}" if parts else f"{p.name} {{}}"
    if isinstance(p, n.RefPat):
        return ("&mut " if p.mutable else "&") + _pattern_operand(p.sub)
    if isinstance(p, n.OrPat):
        return " | ".join(format_pattern(a) for a in p.alts)
    raise TypeError(f"not a pattern: {p!r}")


def _pattern_operand(p) -> str:
    text = format_pattern(p)
    return f"({text})" if isinstance(p, n.OrPat) else text


# expressions

def expr_bp(e) -> int:
    if isinstance(e, n.BinaryOp):
        return BINARY_BP[e.op]
    if isinstance(e, (n.Assign, n.CompoundAssign, n.Lambda)):
        return ASSIGN_BP
    if isinstance(e, n.Return):
        return ASSIGN_BP if e.value is not None else PRIMARY_BP
    if isinstance(e, (n.UnaryOp, n.BoxExpr)):
        return UNARY_BP
    if isinstance(e, (n.MethodCall, n.Call, n.Index, n.FieldAccess)):
        return POSTFIX_BP
    return PRIMARY_BP


def leftmost(e):
    while True:
        if isinstance(e, (n.BinaryOp,)):
            e = e.lhs
        elif isinstance(e, (n.Assign, n.CompoundAssign)):
            e = e.place
        elif isinstance(e, n.MethodCall):
            e = e.receiver
        elif isinstance(e, n.Call):
            e = e.func
        elif isinstance(e, (n.Index, n.FieldAccess)):
            e = e.base
        else:
            return e


def contains_record(e) -> bool:
    return any(isinstance(x, n.RecordExpr) for x in n.walk(e))


class Printer:
    def __init__(self):
        self.depth = 0

    def ind(self) -> str:
        return INDENT * self.depth

    def expr(self, e, min_bp: int = 0) -> str:
        text = self._expr(e)
        if expr_bp(e) < min_bp:
            return f"({text})"
        return text

    def no_struct(self, e) -> str:
        text = self.expr(e)
        return f"({text})" if contains_record(e) else text

    def _expr(self, e) -> str:
        if isinstance(e, n.Literal):
            return format_literal(e)
        if isinstance(e, n.Path):
            return e.name
        if isinstance(e, n.BinaryOp):
            bp = BINARY_BP[e.op]
            lhs_min = bp + 1 if bp == COMPARISON_BP else bp
            return f"{self.expr(e.lhs, lhs_min)} {e.op} {self.expr(e.rhs, bp + 1)}"
        if isinstance(e, n.UnaryOp):
            op = "&mut " if e.op == "&mut" else e.op
            return op + self.expr(e.operand, UNARY_BP)
        if isinstance(e, n.BoxExpr):
            head = f"box({e.allocator}) " if e.allocator else "box "
            return head + self.expr(e.operand, UNARY_BP)
        if isinstance(e, n.Assign):
            return f"{self.expr(e.place, ASSIGN_BP + 1)} = {self.expr(e.value, ASSIGN_BP)}"
        if isinstance(e, n.CompoundAssign):
            return f"{self.expr(e.place, ASSIGN_BP + 1)} {e.op}= {self.expr(e.value, ASSIGN_BP)}"
        if isinstance(e, n.MethodCall):
            return f"{self.expr(e.receiver, POSTFIX_BP)}.{e.method}({self.args(e.args)})"
        if isinstance(e, n.Call):
            return f"{self.expr(e.func, POSTFIX_BP)}({self.args(e.args)})"
        if isinstance(e, n.Index):
            return f"{self.expr(e.base, POSTFIX_BP)}[{self.expr(e.index)}]"
        if isinstance(e, n.FieldAccess):
            base = self.expr(e.base, POSTFIX_BP)
            if e.name.isdigit() and isinstance(e.base, n.Literal):
                base = f"({base})"
            return f"{base}.{e.name}"
        if isinstance(e, n.TupleExpr):
            if len(e.items) == 1:
                return f"({self.expr(e.items[0])},)"
            return f"({self.args(e.items)})"
        if isinstance(e, n.ArrayExpr):
            return f"[{self.args(e.items)}]"
        if isinstance(e, n.ArrayRepeat):
            return f"[{self.expr(e.value)}, ..{self.expr(e.count)}]"
        if isinstance(e, n.RecordExpr):
            parts = [f"{f.name}: {self.expr(f.value)}" for f in e.fields]
            if e.base is not None:
                parts.append(".." + self.expr(e.base))
            return f"{e.name} {{ {', '.join(parts)} }}" if parts else f"{e.name} {{}}"
        if isinstance(e, n.Lambda):
            params = ", ".join(self.param(p) for p in e.params)
            head = f"|{params}|" if e.params else "||"
            if e.ret is not None:
                return f"{head} -> {format_type(e.ret)} {self.block(e.body)}"
            return f"{head} {self.expr(e.body)}"
        if isinstance(e, n.Block):
            return self.block(e)
        if isinstance(e, n.If):
            text = f"if {self.no_struct(e.cond)} {self.block(e.then)}"
            if e.else_ is not None:
                text += " else " + self._expr(e.else_)
            return text
        if isinstance(e, n.Match):
            lines = [f"match {self.no_struct(e.scrutinee)} {{"]
            self.depth += 1
            for arm in e.arms:
                guard = f" if {self.expr(arm.guard)}" if arm.guard is not None else ""
                lines.append(f"{self.ind()}{format_pattern(arm.pattern)}{guard} => {self.expr(arm.body)},")
            self.depth -= 1
            lines.append(self.ind() + "}")
            return "\n".join(lines)
        if isinstance(e, n.Loop):
            return "loop " + self.block(e.body)
        if isinstance(e, n.While):
            return f"while {self.no_struct(e.cond)} {self.block(e.body)}"
        if isinstance(e, n.ForLoop):
            return f"for {format_pattern(e.pattern)} in {self.no_struct(e.iterable)} {self.block(e.body)}"
        if isinstance(e, n.Break):
            return "break"
        if isinstance(e, n.Return):
            return "return" if e.value is None else f"return {self.expr(e.value, ASSIGN_BP)}"
        if isinstance(e, n.MacroCall):
            close = {"(": ")", "[": "]", "{": "}"}[e.delim]
            return f"{e.name}!{e.delim}{join_tokens(e.tokens)}{close}"
        if isinstance(e, n.BuiltinMacro):
            return f"{e.name}!({self.args(e.args)})"
        raise TypeError(f"not an expression: {e!r}")

    def args(self, items) -> str:
        return ", ".join(self.expr(a) for a in items)

    def param(self, p: n.Param) -> str:
        text = format_pattern(p.pattern)
        if p.type is not None:
            text += f": {format_type(p.type)}"
        return text

    def block(self, b: n.Block) -> str:
        if not b.stmts and b.tail is None:
            return "{}"
        lines = ["{"]
        self.depth += 1
        for i, stmt in enumerate(b.stmts):
            last = i == len(b.stmts) - 1 and b.tail is None
            lines.append(self.ind() + self.stmt(stmt, last))
        if b.tail is not None:
            lines.append(self.ind() + self.statement_expr(b.tail))
        self.depth -= 1
        lines.append(self.ind() + "}")
        return "\n".join(lines)

    def statement_expr(self, e) -> str:
        text = self.expr(e)
        if not isinstance(e, n.BLOCK_LIKE) and isinstance(leftmost(e), n.BLOCK_LIKE):
            return f"({text})"
        return text

    def stmt(self, s, last: bool) -> str:
        if isinstance(s, n.Let):
            text = "let " + format_pattern(s.pattern)
            if s.type is not None:
                text += f": {format_type(s.type)}"
            if s.init is not None:
                text += f" = {self.expr(s.init)}"
            return text + ";"
        if isinstance(s, n.ExprStmt):
            if isinstance(s.expr, n.BLOCK_LIKE):
                return self.expr(s.expr) + (";" if last else "")
            return self.statement_expr(s.expr) + ";"
        raise TypeError(f"not a statement: {s!r}")

    # items

    def type_params(self, params) -> str:
        return f"<{', '.join(params)}>" if params else ""

    def fn(self, f: n.FnDef) -> str:
        params = [f.self_param] if f.self_param else []
        params += [self.param(p) for p in f.params]
        text = f"fn {f.name}{self.type_params(f.type_params)}({', '.join(params)})"
        if f.ret is not None:
            text += f" -> {format_type(f.ret)}"
        if f.body is None:
            return text + ";"
        return text + " " + self.block(f.body)

    def item(self, it) -> str:
        if isinstance(it, n.FnDef):
            return self.fn(it)
        if isinstance(it, n.StructDef):
            head = f"struct {it.name}{self.type_params(it.type_params)}"
            if it.fields is None:
                return head + ";"
            if not it.fields:
                return head + " {}"
            body = "".join(f"{INDENT}{f.name}: {format_type(f.type)},\n" for f in it.fields)
            return f"{head} {{\n{body}}}"
        if isinstance(it, n.EnumDef):
            head = f"enum {it.name}{self.type_params(it.type_params)}"
            lines = []
            for v in it.variants:
                if v.payload is None:
                    lines.append(f"{INDENT}{v.name},\n")
                else:
                    lines.append(f"{INDENT}{v.name}({', '.join(format_type(t) for t in v.payload)}),\n")
            return f"{head} {{\n{''.join(lines)}}}"
        if isinstance(it, (n.TraitDef, n.ImplBlock)):
            if isinstance(it, n.TraitDef):
                head = f"trait {it.name}{self.type_params(it.type_params)}"
            else:
                head = "impl" + self.type_params(it.type_params) + " "
                if it.trait is not None:
                    head += format_type(it.trait) + " for "
                head += format_type(it.target)
            if not it.methods:
                return head + " {}"
            self.depth += 1
            methods = [self.ind() + self.fn(m) for m in it.methods]
            self.depth -= 1
            return head + " {\n" + "\n".join(methods) + "\n}"
        if isinstance(it, n.MacroDef):
            rules = "".join(f"{INDENT}({join_tokens(r.pattern)}) => ({join_tokens(r.template)});\n"
                            for r in it.rules)
            return f"macro_rules! {it.name} (\n{rules});"
        if isinstance(it, n.TypeAlias):
            return f"type {it.name}{self.type_params(it.type_params)} = {format_type(it.target)};"
        if isinstance(it, n.UseDecl):
            return f"use {it.path};"
        raise TypeError(f"not an item: {it!r}")


def pretty_print(node) -> str:
    """Render a Program, item, statement, expression, pattern or type term as source."""
    p = Printer()
    if isinstance(node, n.Program):
        return "\n".join(p.item(it) + "\n" for it in node.items)
    if isinstance(node, (n.FnDef, n.StructDef, n.EnumDef, n.TraitDef, n.ImplBlock, n.MacroDef,
                         n.TypeAlias, n.UseDecl)):
        return p.item(node)
    if isinstance(node, (n.Let, n.ExprStmt)):
        return p.stmt(node, last=False)
    if isinstance(node, (n.WildcardPat, n.LitPat, n.BindPat, n.AtPat, n.TuplePat, n.VariantPat,
                         n.RecordPat, n.RefPat, n.OrPat)):
        return format_pattern(node)
    if isinstance(node, (n.TypePath, n.RefType, n.TupleType, n.SliceType, n.FnType)):
        return format_type(node)
    return p.expr(node)
