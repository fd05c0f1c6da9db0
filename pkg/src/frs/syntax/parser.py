"""Recursive-descent parser with Pratt-style binary expressions.

Precedence, tightest first: unary (``- ! * & &mut box``), ``* / %``,
``+ -``, ``<< >>``, ``&``, ``^``, ``|``, comparisons (non-associative),
``&&``, ``||``, assignment (right-associative).
"""

from __future__ import annotations

from ..errors import ParseError, ParseFailure, SourceSpan
from ..lexer import (
    BYTE_LIT,
    BYTE_STR_LIT,
    CHAR_LIT,
    DELIM,
    FLOAT_LIT,
    IDENT,
    INT_LIT,
    KEYWORD,
    PUNCT,
    STR_LIT,
    Token,
    tokenize,
)
from . import nodes as n

BINARY_BP = {
    "||": 2,
    "&&": 3,
    "==": 4, "!=": 4, "<": 4, ">": 4, "<=": 4, ">=": 4,
    "|": 5,
    "^": 6,
    "&": 7,
    "<<": 8, ">>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}
COMPARISON_BP = 4
ASSIGN_BP = 1
UNARY_BP = 11
COMPOUND_ASSIGN = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%", "^=": "^",
                   "&=": "&", "|=": "|", "<<=": "<<", ">>=": ">>"}

ITEM_KEYWORDS = ("fn", "struct", "enum", "trait", "impl", "macro_rules")
ITEM_WORDS = ("type", "use")
BLOCK_LIKE_KEYWORDS = ("if", "match", "loop", "while", "for")
OPEN_TO_CLOSE = {"(": ")", "[": "]", "{": "}"}

_LITERAL_KIND = {INT_LIT: "int", FLOAT_LIT: "float", CHAR_LIT: "char", STR_LIT: "str",
                 BYTE_LIT: "byte", BYTE_STR_LIT: "bytestr"}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = list(tokens)
        self.pos = 0
        self.errors: list[ParseError] = []

    # cursor helpers

    @property
    def tok(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def peek(self, k: int = 1) -> Token | None:
        i = self.pos + k
        return self.tokens[i] if i < len(self.tokens) else None

    @property
    def prev(self) -> Token | None:
        return self.tokens[self.pos - 1] if self.pos > 0 else None

    def at(self, text: str, k: int = 0) -> bool:
        t = self.tokens[self.pos + k] if self.pos + k < len(self.tokens) else None
        return t is not None and t.kind in (PUNCT, DELIM, KEYWORD) and t.text == text

    def at_ident(self, text: str | None = None) -> bool:
        t = self.tok
        return t is not None and t.kind == IDENT and (text is None or t.text == text)

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, expected: str) -> ParseError:
        t = self.tok
        if t is None:
            last = self.tokens[-1].span if self.tokens else SourceSpan(1, 1, 1, 1)
            span = SourceSpan(last.end_line, last.end_col, last.end_line, last.end_col + 1, last.file_id)
            return ParseError(f"expected {expected}, found end of input", span, (expected,), "<eof>")
        return ParseError(f"expected {expected}, found {t.text!r}", t.span, (expected,), t.text)

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        raise self.error(repr(text))

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect_ident(self) -> Token:
        if self.tok is not None and self.tok.kind == IDENT:
            return self.advance()
        raise self.error("identifier")

    def split_first(self, first: str) -> None:
        """Split a compound token (``>>``, ``&&``, ``||``...) so its first char can be consumed alone."""
        t = self.tok
        rest = t.text[len(first):]
        sp = t.span
        head = Token(PUNCT, first, first, None, SourceSpan(sp.start_line, sp.start_col, sp.start_line,
                                                          sp.start_col + len(first), sp.file_id), t.offset)
        tail = Token(PUNCT, rest, rest, None, SourceSpan(sp.start_line, sp.start_col + len(first),
                                                         sp.end_line, sp.end_col, sp.file_id),
                     t.offset + len(first))
        self.tokens[self.pos:self.pos + 1] = [head, tail]

    def expect_gt(self) -> None:
        t = self.tok
        if t is not None and t.kind == PUNCT and t.text in (">>", ">=", ">>="):
            self.split_first(">")
        self.expect(">")

    def finish(self, node, start: Token):
        end = self.prev
        node.span = start.span.to(end.span if end is not None else None)
        return node

    # program and items

    def parse_program(self) -> n.Program:
        items = []
        start = self.tok
        while not self.at_end():
            if self.eat(";"):
                continue
            item_start = self.pos
            try:
                items.append(self.parse_item())
            except ParseError as err:
                self.errors.append(err)
                self.recover(item_start)
        prog = n.Program(items)
        if start is not None:
            prog.span = start.span.to(self.tokens[-1].span)
        return prog

    def recover(self, item_start: int) -> None:
        """Skip to the next top-level item keyword outside any delimiters."""
        self.pos = max(self.pos, item_start + 1)
        depth = 0
        while not self.at_end():
            t = self.tok
            if depth == 0 and ((t.kind == KEYWORD and t.text in ITEM_KEYWORDS)
                               or (t.kind == IDENT and t.text in ITEM_WORDS)):
                return
            if t.kind == DELIM:
                depth += 1 if t.text in "([{" else -1
                depth = max(depth, 0)
            self.pos += 1

    def parse_item(self):
        t = self.tok
        if t.kind == KEYWORD:
            if t.text == "fn":
                return self.parse_fn(require_body=True)
            if t.text == "struct":
                return self.parse_struct()
            if t.text == "enum":
                return self.parse_enum()
            if t.text == "trait":
                return self.parse_trait()
            if t.text == "impl":
                return self.parse_impl()
            if t.text == "macro_rules":
                return self.parse_macro_def()
        if t.kind == IDENT and t.text == "type":
            return self.parse_type_alias()
        if t.kind == IDENT and t.text == "use":
            return self.parse_use()
        raise self.error("item (fn, struct, enum, trait, impl, type, use, macro_rules)")

    def parse_type_params(self) -> list[str]:
        params = []
        if self.eat("<"):
            while not self.at(">"):
                params.append(self.expect_ident().text)
                if self.eat(":"):
                    # bounds are accepted and dropped
                    self.parse_type()
                    while self.eat("+"):
                        self.parse_type()
                if not self.eat(","):
                    break
            self.expect_gt()
        return params

    def parse_fn(self, require_body: bool) -> n.FnDef:
        start = self.expect("fn")
        name = self.expect_ident().text
        tparams = self.parse_type_params()
        self.expect("(")
        self_param = None
        params = []
        if self.at("&") and self.peek() is not None and (self.peek().is_keyword("self")
                                                         or (self.peek().is_keyword("mut") and self.peek(2) is not None
                                                             and self.peek(2).is_keyword("self"))):
            self.advance()
            self_param = "&mut self" if self.eat("mut") else "&self"
            self.expect("self")
        elif self.at("self"):
            self.advance()
            self_param = "self"
        elif self.at("mut") and self.peek() is not None and self.peek().is_keyword("self"):
            self.pos += 2
            self_param = "mut self"
        if self_param is not None:
            if self.eat(":"):
                self.parse_type()
            if not self.eat(","):
                pass
        while not self.at(")"):
            pstart = self.tok
            pat = self.parse_pattern_no_alt()
            self.expect(":")
            ty = self.parse_type()
            params.append(self.finish(n.Param(pat, ty), pstart))
            if not self.eat(","):
                break
        self.expect(")")
        ret = None
        if self.eat("->"):
            ret = self.parse_type()
        body = None
        if self.at("{"):
            body = self.parse_block()
        elif require_body:
            raise self.error("function body")
        return self.finish(n.FnDef(name, tparams, self_param, params, ret, body), start)

    def parse_struct(self) -> n.StructDef:
        start = self.expect("struct")
        name = self.expect_ident().text
        tparams = self.parse_type_params()
        if self.eat(";"):
            return self.finish(n.StructDef(name, tparams, None), start)
        self.expect("{")
        fields = []
        while not self.at("}"):
            fstart = self.expect_ident()
            self.expect(":")
            fields.append(self.finish(n.FieldDef(fstart.text, self.parse_type()), fstart))
            if not self.eat(","):
                break
        self.expect("}")
        return self.finish(n.StructDef(name, tparams, fields), start)

    def parse_enum(self) -> n.EnumDef:
        start = self.expect("enum")
        name = self.expect_ident().text
        tparams = self.parse_type_params()
        self.expect("{")
        variants = []
        while not self.at("}"):
            vstart = self.expect_ident()
            payload = None
            if self.eat("("):
                payload = []
                while not self.at(")"):
                    payload.append(self.parse_type())
                    if not self.eat(","):
                        break
                self.expect(")")
            variants.append(self.finish(n.VariantDef(vstart.text, payload), vstart))
            if not self.eat(","):
                break
        self.expect("}")
        return self.finish(n.EnumDef(name, tparams, variants), start)

    def parse_trait(self) -> n.TraitDef:
        start = self.expect("trait")
        name = self.expect_ident().text
        tparams = self.parse_type_params()
        self.expect("{")
        methods = []
        while not self.at("}"):
            methods.append(self.parse_fn(require_body=False))
            self.eat(";")
        self.expect("}")
        return self.finish(n.TraitDef(name, tparams, methods), start)

    def parse_impl(self) -> n.ImplBlock:
        start = self.expect("impl")
        tparams = self.parse_type_params()
        first = self.parse_type()
        trait = None
        if self.eat("for"):
            trait = first
            target = self.parse_type()
        else:
            target = first
        self.expect("{")
        methods = []
        while not self.at("}"):
            methods.append(self.parse_fn(require_body=True))
            self.eat(";")
        self.expect("}")
        return self.finish(n.ImplBlock(tparams, trait, target, methods), start)

    def parse_type_alias(self) -> n.TypeAlias:
        start = self.advance()
        name = self.expect_ident().text
        tparams = self.parse_type_params()
        self.expect("=")
        target = self.parse_type()
        self.eat(";")
        return self.finish(n.TypeAlias(name, tparams, target), start)

    def parse_use(self) -> n.UseDecl:
        start = self.advance()
        parts = [self.expect_ident_or_self()]
        while self.eat("::"):
            parts.append(self.expect_ident_or_self())
        self.eat(";")
        return self.finish(n.UseDecl("::".join(parts)), start)

    def expect_ident_or_self(self) -> str:
        if self.at("self"):
            return self.advance().text
        return self.expect_ident().text

    def parse_macro_def(self) -> n.MacroDef:
        start = self.expect("macro_rules")
        self.expect("!")
        name = self.expect_ident().text
        body = self.parse_delimited_tokens()
        rules = []
        sub = Parser(body)
        while not sub.at_end():
            rstart = sub.tok
            if rstart.kind != DELIM or rstart.text not in OPEN_TO_CLOSE:
                raise sub.error("macro rule pattern in delimiters")
            pattern = sub.parse_delimited_tokens()
            sub.expect("=>")
            if sub.tok is None or sub.tok.kind != DELIM or sub.tok.text not in OPEN_TO_CLOSE:
                raise sub.error("macro rule template in delimiters")
            template = sub.parse_delimited_tokens()
            rules.append(sub.finish(n.MacroRule(pattern, template), rstart))
            if not sub.eat(";"):
                break
        if not sub.at_end():
            raise sub.error("';' between macro rules")
        self.eat(";")
        return self.finish(n.MacroDef(name, rules), start)

    def parse_delimited_tokens(self) -> list[Token]:
        """Consume a balanced group and return the tokens strictly inside it."""
        t = self.tok
        if t is None or t.kind != DELIM or t.text not in OPEN_TO_CLOSE:
            raise self.error("'(', '[' or '{'")
        stack = [OPEN_TO_CLOSE[t.text]]
        self.advance()
        begin = self.pos
        while stack:
            if self.at_end():
                raise self.error(repr(stack[-1]))
            t = self.advance()
            if t.kind == DELIM:
                if t.text in OPEN_TO_CLOSE:
                    stack.append(OPEN_TO_CLOSE[t.text])
                elif t.text == stack[-1]:
                    stack.pop()
                else:
                    self.pos -= 1
                    raise self.error(repr(stack[-1]))
        return self.tokens[begin:self.pos - 1]

    # types

    def parse_type(self):
        start = self.tok
        if start is None:
            raise self.error("type")
        if self.at("&&"):
            self.split_first("&")
        if self.eat("&"):
            mutable = self.eat("mut")
            return self.finish(n.RefType(mutable, self.parse_type()), start)
        if self.eat("("):
            items = []
            while not self.at(")"):
                items.append(self.parse_type())
                if not self.eat(","):
                    break
            self.expect(")")
            return self.finish(n.TupleType(items), start)
        if self.eat("["):
            elem = self.parse_type()
            self.expect("]")
            return self.finish(n.SliceType(elem), start)
        if self.at("||") or self.at("|"):
            params = []
            if not self.eat("||"):
                self.advance()
                while not self.at("|"):
                    params.append(self.parse_type())
                    if not self.eat(","):
                        break
                self.expect("|")
            ret = self.parse_type() if self.eat("->") else None
            return self.finish(n.FnType(params, ret), start)
        if self.at("self"):
            self.advance()
            return self.finish(n.TypePath("self"), start)
        parts = [self.expect_ident().text]
        while self.at("::") and self.peek() is not None and self.peek().kind == IDENT:
            self.advance()
            parts.append(self.advance().text)
        args = []
        if self.eat("<"):
            while not (self.at(">") or self.at(">>") or self.at(">=") or self.at(">>=")):
                args.append(self.parse_type())
                if not self.eat(","):
                    break
            self.expect_gt()
        return self.finish(n.TypePath("::".join(parts), args), start)

    # statements and blocks

    def parse_block(self) -> n.Block:
        start = self.expect("{")
        stmts, tail = self.parse_block_body(closing="}")
        self.expect("}")
        return self.finish(n.Block(stmts, tail), start)

    def parse_block_body(self, closing: str | None) -> tuple[list, object]:
        """Statements up to ``closing`` (or end of input when None); returns (stmts, tail)."""
        stmts: list = []
        tail = None

        def at_close() -> bool:
            return self.at_end() if closing is None else self.at(closing)

        while not at_close():
            if self.at_end():
                raise self.error(repr(closing))
            if self.eat(";"):
                continue
            t = self.tok
            if t.kind == KEYWORD and t.text == "let":
                stmts.append(self.parse_let())
                continue
            if t.kind == KEYWORD and t.text in ITEM_KEYWORDS:
                raise ParseError("items are only allowed at top level", t.span, ("statement",), t.text)
            if (t.kind == KEYWORD and t.text in BLOCK_LIKE_KEYWORDS) or t.is_punct("{"):
                expr = self.parse_blocklike()
                if self.at(".") or self.at("?"):
                    expr = self.parse_expression(0, lhs=expr)
                elif not self.at(";"):
                    if at_close():
                        tail = expr
                        break
                    stmts.append(self.finish(n.ExprStmt(expr), t))
                    continue
            else:
                expr = self.parse_expression(0)
            if self.eat(";"):
                stmts.append(self.finish(n.ExprStmt(expr), t))
            elif at_close():
                tail = expr
                break
            elif self.prev is not None and self.prev.is_punct("}"):
                stmts.append(self.finish(n.ExprStmt(expr), t))
            else:
                raise self.error("';'")
        return stmts, tail

    def parse_let(self) -> n.Let:
        start = self.expect("let")
        pat = self.parse_pattern()
        ty = self.parse_type() if self.eat(":") else None
        init = self.parse_expression(0) if self.eat("=") else None
        if not self.eat(";"):
            # a `}`-terminated initializer may omit the semicolon
            if not (self.prev is not None and self.prev.is_punct("}")) and not self.at("}"):
                raise self.error("';'")
        return self.finish(n.Let(pat, ty, init), start)

    # expressions

    def parse_expression(self, min_bp: int = 0, no_struct: bool = False, lhs=None):
        if lhs is None:
            lhs = self.parse_unary(no_struct)
        else:
            lhs = self.parse_postfix(lhs)
        start_span = lhs.span
        while True:
            t = self.tok
            if t is None or t.kind != PUNCT:
                break
            op = t.text
            if op == "=" and min_bp <= ASSIGN_BP:
                self.advance()
                rhs = self.parse_expression(ASSIGN_BP, no_struct)
                lhs = n.Assign(lhs, rhs, span=start_span.to(rhs.span))
                continue
            if op in COMPOUND_ASSIGN and min_bp <= ASSIGN_BP:
                self.advance()
                rhs = self.parse_expression(ASSIGN_BP, no_struct)
                lhs = n.CompoundAssign(COMPOUND_ASSIGN[op], lhs, rhs, span=start_span.to(rhs.span))
                continue
            bp = BINARY_BP.get(op)
            if bp is None or bp <= min_bp:
                break
            self.advance()
            rhs = self.parse_expression(bp, no_struct)
            if bp == COMPARISON_BP and self.tok is not None and self.tok.kind == PUNCT \
                    and BINARY_BP.get(self.tok.text) == COMPARISON_BP:
                raise ParseError("comparison operators cannot be chained", self.tok.span,
                                 ("expression",), self.tok.text)
            lhs = n.BinaryOp(op, lhs, rhs, span=start_span.to(rhs.span))
        return lhs

    def parse_unary(self, no_struct: bool = False):
        t = self.tok
        if t is None:
            raise self.error("expression")
        if t.kind == PUNCT:
            if t.text in ("-", "!", "*"):
                self.advance()
                operand = self.parse_unary(no_struct)
                return self.finish(n.UnaryOp(t.text, operand), t)
            if t.text == "&&":
                self.split_first("&")
                t = self.tok
            if t.text == "&":
                self.advance()
                op = "&mut" if self.eat("mut") else "&"
                operand = self.parse_unary(no_struct)
                return self.finish(n.UnaryOp(op, operand), t)
        if t.kind == KEYWORD and t.text == "box":
            return self.parse_box(no_struct)
        return self.parse_postfix(self.parse_primary(no_struct))

    def parse_box(self, no_struct: bool):
        start = self.advance()
        allocator = None
        if self.at("(") and self.peek() is not None and self.peek().kind == IDENT \
                and self.peek(2) is not None and self.peek(2).is_punct(")") \
                and self.peek(3) is not None and can_start_expression(self.peek(3)):
            self.advance()
            allocator = self.advance().text
            self.advance()
        operand = self.parse_unary(no_struct)
        return self.finish(n.BoxExpr(operand, allocator), start)

    def parse_postfix(self, expr):
        while True:
            t = self.tok
            if t is None:
                return expr
            if t.is_punct("."):
                self.advance()
                name_tok = self.tok
                if name_tok is not None and name_tok.kind == INT_LIT:
                    self.advance()
                    expr = n.FieldAccess(expr, str(name_tok.payload), span=expr.span.to(name_tok.span))
                    continue
                name = self.expect_ident().text
                if self.at("("):
                    args = self.parse_call_args()
                    expr = n.MethodCall(expr, name, args, span=expr.span.to(self.prev.span))
                else:
                    expr = n.FieldAccess(expr, name, span=expr.span.to(self.prev.span))
            elif t.is_punct("("):
                args = self.parse_call_args()
                expr = n.Call(expr, args, span=expr.span.to(self.prev.span))
            elif t.is_punct("["):
                self.advance()
                index = self.parse_expression(0)
                self.expect("]")
                expr = n.Index(expr, index, span=expr.span.to(self.prev.span))
            else:
                return expr

    def parse_call_args(self) -> list:
        self.expect("(")
        args = []
        while not self.at(")"):
            args.append(self.parse_expression(0))
            if not self.eat(","):
                break
        self.expect(")")
        return args

    def parse_primary(self, no_struct: bool):
        t = self.tok
        if t.kind in _LITERAL_KIND:
            self.advance()
            kind = _LITERAL_KIND[t.kind]
            suffix = t.suffix if kind in ("int", "float") else None
            return self.finish(n.Literal(kind, t.payload, suffix), t)
        if t.kind == KEYWORD:
            if t.text in ("true", "false"):
                self.advance()
                return self.finish(n.Literal("bool", t.text == "true"), t)
            if t.text == "self":
                self.advance()
                return self.finish(n.Path("self"), t)
            if t.text in BLOCK_LIKE_KEYWORDS:
                return self.parse_blocklike()
            if t.text == "return":
                self.advance()
                value = None
                if self.tok is not None and can_start_expression(self.tok):
                    value = self.parse_expression(0, no_struct)
                return self.finish(n.Return(value), t)
            if t.text == "break":
                self.advance()
                return self.finish(n.Break(), t)
        if t.kind == IDENT:
            return self.parse_path_expr(no_struct)
        if t.kind == DELIM:
            if t.text == "(":
                return self.parse_paren()
            if t.text == "[":
                return self.parse_array()
            if t.text == "{":
                return self.parse_block()
        if t.kind == PUNCT and t.text in ("|", "||"):
            return self.parse_lambda()
        raise self.error("expression")

    def parse_path_expr(self, no_struct: bool):
        start = self.tok
        parts = [self.advance().text]
        while self.at("::") and self.peek() is not None and self.peek().kind == IDENT:
            self.advance()
            parts.append(self.advance().text)
        name = "::".join(parts)
        if self.at("!") and self.peek() is not None and self.peek().kind == DELIM \
                and self.peek().text in OPEN_TO_CLOSE:
            self.advance()
            delim = self.tok.text
            tokens = self.parse_delimited_tokens()
            return self.finish(n.MacroCall(name, tokens, delim), start)
        if not no_struct and self.at("{") and self.looks_like_record():
            return self.parse_record(name, start)
        return self.finish(n.Path(name), start)

    def looks_like_record(self) -> bool:
        a, b = self.peek(1), self.peek(2)
        if a is None:
            return False
        if a.is_punct("}"):
            return True
        if a.is_punct(".."):
            return True
        return a.kind == IDENT and b is not None and b.is_punct(":")

    def parse_record(self, name: str, start: Token):
        self.expect("{")
        fields = []
        base = None
        while not self.at("}"):
            if self.eat(".."):
                base = self.parse_expression(0)
                break
            ftok = self.expect_ident()
            self.expect(":")
            fields.append(self.finish(n.FieldInit(ftok.text, self.parse_expression(0)), ftok))
            if not self.eat(","):
                break
        self.expect("}")
        return self.finish(n.RecordExpr(name, fields, base), start)

    def parse_paren(self):
        start = self.expect("(")
        if self.eat(")"):
            return self.finish(n.TupleExpr([]), start)
        first = self.parse_expression(0)
        if self.eat(")"):
            return first
        items = [first]
        while self.eat(","):
            if self.at(")"):
                break
            items.append(self.parse_expression(0))
        self.expect(")")
        return self.finish(n.TupleExpr(items), start)

    def parse_array(self):
        start = self.expect("[")
        items = []
        if self.eat("]"):
            return self.finish(n.ArrayExpr(items), start)
        first = self.parse_expression(0)
        if self.eat(";"):
            count = self.parse_expression(0)
            self.expect("]")
            return self.finish(n.ArrayRepeat(first, count), start)
        if self.at(",") and self.peek() is not None and self.peek().is_punct(".."):
            self.pos += 2
            count = self.parse_expression(0)
            self.expect("]")
            return self.finish(n.ArrayRepeat(first, count), start)
        items.append(first)
        while self.eat(","):
            if self.at("]"):
                break
            items.append(self.parse_expression(0))
        self.expect("]")
        return self.finish(n.ArrayExpr(items), start)

    def parse_lambda(self):
        start = self.tok
        params = []
        if not self.eat("||"):
            self.expect("|")
            while not self.at("|"):
                pstart = self.tok
                pat = self.parse_pattern_no_alt()
                ty = self.parse_type() if self.eat(":") else None
                params.append(self.finish(n.Param(pat, ty), pstart))
                if not self.eat(","):
                    break
            self.expect("|")
        ret = None
        if self.eat("->"):
            ret = self.parse_type()
            body = self.parse_block()
        else:
            body = self.parse_expression(0)
        return self.finish(n.Lambda(params, body, ret), start)

    def parse_blocklike(self):
        t = self.tok
        if t.is_punct("{"):
            return self.parse_block()
        if t.text == "if":
            return self.parse_if()
        if t.text == "match":
            return self.parse_match()
        if t.text == "loop":
            self.advance()
            return self.finish(n.Loop(self.parse_block()), t)
        if t.text == "while":
            self.advance()
            cond = self.parse_expression(0, no_struct=True)
            return self.finish(n.While(cond, self.parse_block()), t)
        if t.text == "for":
            self.advance()
            pat = self.parse_pattern()
            self.expect("in")
            iterable = self.parse_expression(0, no_struct=True)
            return self.finish(n.ForLoop(pat, iterable, self.parse_block()), t)
        raise self.error("block expression")

    def parse_if(self):
        start = self.expect("if")
        cond = self.parse_expression(0, no_struct=True)
        then = self.parse_block()
        else_ = None
        if self.eat("else"):
            else_ = self.parse_if() if self.at("if") else self.parse_block()
        return self.finish(n.If(cond, then, else_), start)

    def parse_match(self):
        start = self.expect("match")
        scrutinee = self.parse_expression(0, no_struct=True)
        if self.at(","):
            items = [scrutinee]
            while self.eat(","):
                items.append(self.parse_expression(0, no_struct=True))
            scrutinee = n.TupleExpr(items, span=items[0].span.to(items[-1].span))
        self.expect("{")
        arms = []
        while not self.at("}"):
            astart = self.tok
            pat = self.parse_pattern()
            if self.at(","):
                pats = [pat]
                while self.eat(","):
                    pats.append(self.parse_pattern())
                pat = n.TuplePat(pats, span=pats[0].span.to(pats[-1].span))
            guard = self.parse_expression(0) if self.eat("if") else None
            self.expect("=>")
            body = self.parse_expression(0)
            arms.append(self.finish(n.Arm(pat, guard, body), astart))
            if self.eat(","):
                continue
            if self.at("}"):
                break
            if isinstance(body, n.BLOCK_LIKE) or isinstance(body, n.MacroCall) and body.delim == "{":
                continue
            raise self.error("',' or '}' after match arm")
        self.expect("}")
        return self.finish(n.Match(scrutinee, arms), start)

    # patterns

    def parse_pattern(self):
        start = self.tok
        first = self.parse_pattern_no_alt()
        if not self.at("|"):
            return first
        alts = [first]
        while self.eat("|"):
            alts.append(self.parse_pattern_no_alt())
        return self.finish(n.OrPat(alts), start)

    def parse_pattern_no_alt(self):
        t = self.tok
        if t is None:
            raise self.error("pattern")
        if t.kind == IDENT and t.text == "_":
            self.advance()
            return self.finish(n.WildcardPat(), t)
        if t.is_punct("&&"):
            self.split_first("&")
            t = self.tok
        if t.is_punct("&"):
            self.advance()
            mutable = self.eat("mut")
            return self.finish(n.RefPat(self.parse_pattern_no_alt(), mutable), t)
        if t.is_keyword("ref"):
            self.advance()
            mutable = self.eat("mut")
            name = self.expect_ident_or_self()
            return self.finish(n.BindPat(name, mutable, True), t)
        if t.is_keyword("mut"):
            self.advance()
            name = self.expect_ident_or_self()
            return self.finish(n.BindPat(name, True, False), t)
        if t.is_punct("("):
            self.advance()
            items = []
            trailing_comma = False
            while not self.at(")"):
                items.append(self.parse_pattern())
                trailing_comma = False
                if not self.eat(","):
                    break
                trailing_comma = True
            self.expect(")")
            if len(items) == 1 and not trailing_comma:
                return items[0]
            return self.finish(n.TuplePat(items), t)
        if t.is_punct("-"):
            self.advance()
            lit = self.tok
            if lit is None or lit.kind not in (INT_LIT, FLOAT_LIT):
                raise self.error("number literal after '-' in pattern")
            self.advance()
            value = n.Literal(_LITERAL_KIND[lit.kind], -lit.payload, lit.suffix)
            value.span = t.span.to(lit.span)
            return self.finish(n.LitPat(value), t)
        if t.kind in _LITERAL_KIND or t.is_keyword("true") or t.is_keyword("false"):
            value = self.parse_primary(no_struct=True)
            return self.finish(n.LitPat(value), t)
        if t.is_keyword("self"):
            self.advance()
            return self.finish(n.BindPat("self"), t)
        if t.kind == IDENT:
            parts = [self.advance().text]
            while self.at("::") and self.peek() is not None and self.peek().kind == IDENT:
                self.advance()
                parts.append(self.advance().text)
            name = "::".join(parts)
            if self.at("("):
                self.advance()
                items = []
                while not self.at(")"):
                    items.append(self.parse_pattern())
                    if not self.eat(","):
                        break
                self.expect(")")
                return self.finish(n.VariantPat(name, items), t)
            if self.at("{"):
                return self.parse_record_pattern(name, t)
            if self.at("@") and len(parts) == 1:
                self.advance()
                return self.finish(n.AtPat(name, self.parse_pattern_no_alt()), t)
            return self.finish(n.BindPat(name), t)
        raise self.error("pattern")

    def parse_record_pattern(self, name: str, start: Token):
        self.expect("{")
        fields = []
        rest = False
        while not self.at("}"):
            if self.eat(".."):
                rest = True
                break
            ftok = self.expect_ident()
            if self.eat(":"):
                pat = self.parse_pattern()
            else:
                pat = n.BindPat(ftok.text, span=ftok.span)
            fields.append(self.finish(n.FieldPat(ftok.text, pat), ftok))
            if not self.eat(","):
                break
        self.expect("}")
        return self.finish(n.RecordPat(name, fields, rest), start)


def can_start_expression(t: Token) -> bool:
    if t.kind in _LITERAL_KIND or t.kind == IDENT:
        return True
    if t.kind == KEYWORD:
        return t.text in ("true", "false", "self", "box", "return", "break") + BLOCK_LIKE_KEYWORDS
    if t.kind == DELIM:
        return t.text in "([{"
    return t.text in ("-", "!", "*", "&", "&&", "|", "||")


# public entry points

def parse_program(tokens: list[Token]) -> n.Program:
    p = Parser(tokens)
    prog = p.parse_program()
    if p.errors:
        raise ParseFailure(p.errors, prog)
    return prog


def _require_end(p: Parser) -> None:
    if not p.at_end():
        raise p.error("end of input")


def parse_expression(tokens: list[Token], min_binding_power: int = 0):
    p = Parser(tokens)
    expr = p.parse_expression(min_binding_power)
    _require_end(p)
    return expr


def parse_pattern(tokens: list[Token]):
    p = Parser(tokens)
    pat = p.parse_pattern()
    _require_end(p)
    return pat


def parse_type(tokens: list[Token]):
    p = Parser(tokens)
    ty = p.parse_type()
    _require_end(p)
    return ty


def parse_statements(tokens: list[Token]) -> tuple[list, object]:
    """Parse a bare statement sequence (no braces), returning (stmts, tail)."""
    p = Parser(tokens)
    return p.parse_block_body(closing=None)


def parse(source: str, file_id: str = "") -> n.Program:
    return parse_program(tokenize(source, file_id))


def parse_expr_source(source: str):
    return parse_expression(tokenize(source))
