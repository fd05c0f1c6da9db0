"""Declarative macros: rule matching, transcription and fixpoint expansion.

Patterns and templates are kept as token trees.  ``$name:ident`` captures a
single identifier, ``$name:expr`` captures the longest run of token trees that
parses as an expression (backtracking to shorter runs when the rest of the
pattern fails), and ``$( ... ) sep *`` captures zero or more repetitions.
Expansion is unhygienic: substituted tokens are spliced in verbatim.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

from .errors import (
    MacroDefinitionError,
    NoRuleMatched,
    ParseError,
    RecursionLimitExceeded,
    RepetitionCountMismatch,
    SourceSpan,
    UnboundFragment,
    UnknownMacro,
)
from .lexer import DELIM, IDENT, PUNCT, Token
from .syntax import nodes as n
from .syntax.parser import OPEN_TO_CLOSE, Parser, parse_expression, parse_statements

DEFAULT_DEPTH_LIMIT = 128
FRAGMENT_SPECS = ("ident", "expr")
BUILTIN_MACROS = ("println", "print", "format", "vec")


# token trees

@dataclass
class Group:
    open: Token
    children: list
    close: Token


def token_trees(tokens: list[Token]) -> list:
    """Nest a balanced token list into Tokens and Groups."""
    out: list = []
    stack: list[tuple[Token, list]] = []
    for t in tokens:
        if t.kind == DELIM and t.text in OPEN_TO_CLOSE:
            stack.append((t, out))
            out = []
        elif t.kind == DELIM:
            if not stack or OPEN_TO_CLOSE[stack[-1][0].text] != t.text:
                raise ParseError(f"unbalanced delimiter {t.text!r}", t.span)
            open_tok, parent = stack.pop()
            parent.append(Group(open_tok, out, t))
            out = parent
        else:
            out.append(t)
    if stack:
        raise ParseError(f"unclosed delimiter {stack[-1][0].text!r}", stack[-1][0].span)
    return out


def flatten(trees: list) -> list[Token]:
    out: list[Token] = []
    for tt in trees:
        if isinstance(tt, Group):
            out.append(tt.open)
            out.extend(flatten(tt.children))
            out.append(tt.close)
        else:
            out.append(tt)
    return out


def _same(a: Token, b: Token) -> bool:
    return a.kind == b.kind and a.text == b.text


# compiled patterns

@dataclass
class Lit:
    token: Token


@dataclass
class Frag:
    name: str
    spec: str


@dataclass
class Rep:
    elems: list
    sep: Token | None
    names: list[str] = field(default_factory=list)


@dataclass
class GroupPat:
    open: Token
    elems: list
    close: Token


def _is_dollar(tt) -> bool:
    return isinstance(tt, Token) and tt.kind == PUNCT and tt.text == "$"


def _repetition_tail(trees: list, i: int) -> tuple[Token | None, int]:
    """Read the ``sep? *`` after a ``$( ... )`` group starting at index i."""
    def star(tt) -> bool:
        return isinstance(tt, Token) and tt.kind == PUNCT and tt.text == "*"

    def bad_op(tt) -> bool:
        return isinstance(tt, Token) and tt.kind == PUNCT and tt.text in ("+", "?")

    if i < len(trees) and star(trees[i]):
        return None, i + 1
    if i + 1 < len(trees) and isinstance(trees[i], Token) and star(trees[i + 1]):
        return trees[i], i + 2
    span = trees[i].span if i < len(trees) and isinstance(trees[i], Token) else None
    if i < len(trees) and (bad_op(trees[i]) or (i + 1 < len(trees) and bad_op(trees[i + 1]))):
        raise MacroDefinitionError("only the '*' repetition operator is supported", span)
    raise MacroDefinitionError("expected '*' after repetition group", span)


def compile_pattern(trees: list) -> list:
    elems: list = []
    i = 0
    while i < len(trees):
        tt = trees[i]
        if _is_dollar(tt):
            nxt = trees[i + 1] if i + 1 < len(trees) else None
            if isinstance(nxt, Group) and nxt.open.text == "(":
                sub = compile_pattern(nxt.children)
                sep, i = _repetition_tail(trees, i + 2)
                elems.append(Rep(sub, sep, sorted(pattern_names(sub))))
                continue
            if not (isinstance(nxt, Token) and nxt.kind == IDENT):
                raise MacroDefinitionError("expected fragment name after '$'", tt.span)
            colon = trees[i + 2] if i + 2 < len(trees) else None
            spec = trees[i + 3] if i + 3 < len(trees) else None
            if not (isinstance(colon, Token) and colon.text == ":"):
                raise MacroDefinitionError(f"fragment ${nxt.text} needs a ':spec'", nxt.span)
            if not (isinstance(spec, Token) and spec.text in FRAGMENT_SPECS):
                got = spec.text if isinstance(spec, Token) else "a group"
                raise MacroDefinitionError(
                    f"unsupported fragment specifier {got!r} (expected ident or expr)",
                    spec.span if isinstance(spec, Token) else nxt.span)
            elems.append(Frag(nxt.text, spec.text))
            i += 4
            continue
        if isinstance(tt, Group):
            elems.append(GroupPat(tt.open, compile_pattern(tt.children), tt.close))
        else:
            elems.append(Lit(tt))
        i += 1
    return elems


def pattern_names(elems: list) -> set[str]:
    names: set[str] = set()
    for e in elems:
        if isinstance(e, Frag):
            if e.name in names:
                raise MacroDefinitionError(f"duplicate fragment ${e.name}")
            names.add(e.name)
        elif isinstance(e, Rep):
            names.update(e.names)
        elif isinstance(e, GroupPat):
            names.update(pattern_names(e.elems))
    return names


# matching

@dataclass
class Capture:
    spec: str
    trees: list

    @property
    def tokens(self) -> list[Token]:
        return flatten(self.trees)

    @property
    def text(self) -> str:
        return " ".join(t.text for t in self.tokens)


@dataclass
class MatchBindings:
    """Fragment name -> Capture, or a (possibly nested) list of Captures for repetitions."""
    captures: dict = field(default_factory=dict)

    def __getitem__(self, name: str):
        return self.captures[name]

    def __contains__(self, name: str) -> bool:
        return name in self.captures

    def texts(self, name: str):
        def conv(v):
            return [conv(x) for x in v] if isinstance(v, list) else v.text
        return conv(self.captures[name])


class _Matcher:
    def __init__(self):
        self._parse_cache: dict = {}

    def parses_as_expr(self, trees: list, start: int, end: int) -> bool:
        key = (id(trees), start, end)
        hit = self._parse_cache.get(key)
        if hit is None:
            try:
                parse_expression(flatten(trees[start:end]))
                hit = True
            except ParseError:
                hit = False
            self._parse_cache[key] = hit
        return hit

    def seq(self, elems: list, ei: int, trees: list, ti: int, binds: dict):
        if ei == len(elems):
            yield ti, binds
            return
        e = elems[ei]
        if isinstance(e, Lit):
            if ti < len(trees) and isinstance(trees[ti], Token) and _same(trees[ti], e.token):
                yield from self.seq(elems, ei + 1, trees, ti + 1, binds)
        elif isinstance(e, GroupPat):
            if ti < len(trees) and isinstance(trees[ti], Group) and trees[ti].open.text == e.open.text:
                kids = trees[ti].children
                for end, b in self.seq(e.elems, 0, kids, 0, binds):
                    if end == len(kids):
                        yield from self.seq(elems, ei + 1, trees, ti + 1, b)
        elif isinstance(e, Frag) and e.spec == "ident":
            if ti < len(trees) and isinstance(trees[ti], Token) and trees[ti].kind == IDENT:
                b = dict(binds)
                b[e.name] = Capture("ident", [trees[ti]])
                yield from self.seq(elems, ei + 1, trees, ti + 1, b)
        elif isinstance(e, Frag):
            # longest first; when a literal follows, only stop in front of it
            nxt = elems[ei + 1] if ei + 1 < len(elems) else None
            for end in range(len(trees), ti, -1):
                if isinstance(nxt, Lit) and not (
                        end < len(trees) and isinstance(trees[end], Token) and _same(trees[end], nxt.token)):
                    continue
                if not self.parses_as_expr(trees, ti, end):
                    continue
                b = dict(binds)
                b[e.name] = Capture("expr", trees[ti:end])
                yield from self.seq(elems, ei + 1, trees, end, b)
        elif isinstance(e, Rep):
            yield from self.rep(e, elems, ei, trees, ti, binds, [])

    def rep(self, e: Rep, elems, ei, trees, ti, binds, acc: list):
        pos = ti
        if acc and e.sep is not None:
            if ti < len(trees) and isinstance(trees[ti], Token) and _same(trees[ti], e.sep):
                pos = ti + 1
            else:
                pos = None
        if pos is not None:
            for end, ib in self.seq(e.elems, 0, trees, pos, {}):
                if end == ti:
                    continue
                yield from self.rep(e, elems, ei, trees, end, binds, acc + [ib])
        b = dict(binds)
        for name in e.names:
            b[name] = [ib[name] for ib in acc]
        yield from self.seq(elems, ei + 1, trees, ti, b)


def match_rule(pattern, tokens: list[Token]) -> MatchBindings | None:
    """Match invocation tokens against a rule pattern (raw tokens or compiled); None on no match."""
    elems = pattern if pattern and isinstance(pattern[0], (Lit, Frag, Rep, GroupPat)) else \
        compile_pattern(token_trees(pattern))
    trees = token_trees(tokens)
    for end, binds in _Matcher().seq(elems, 0, trees, 0, {}):
        if end == len(trees):
            return MatchBindings(binds)
    return None


# transcription

def _template_names(trees: list) -> set[str]:
    names: set[str] = set()
    for i, tt in enumerate(trees):
        if isinstance(tt, Group):
            names |= _template_names(tt.children)
        elif _is_dollar(tt) and i + 1 < len(trees) and isinstance(trees[i + 1], Token) \
                and trees[i + 1].kind == IDENT:
            names.add(trees[i + 1].text)
    return names


def _respan(tok: Token, span: SourceSpan | None) -> Token:
    return tok if span is None else replace(tok, span=span)


def _paren(span: SourceSpan) -> tuple[Token, Token]:
    return Token(DELIM, "(", "(", None, span), Token(DELIM, ")", ")", None, span)


def _transcribe(trees: list, env: dict, site: SourceSpan | None) -> list[Token]:
    out: list[Token] = []
    i = 0
    while i < len(trees):
        tt = trees[i]
        if _is_dollar(tt) and i + 1 < len(trees):
            nxt = trees[i + 1]
            if isinstance(nxt, Group) and nxt.open.text == "(":
                sep, after = _repetition_tail(trees, i + 2)
                names = [nm for nm in sorted(_template_names(nxt.children))
                         if nm in env and isinstance(env[nm], list)]
                if not names:
                    raise RepetitionCountMismatch("repetition group uses no repeated fragment", tt.span)
                counts = {nm: len(env[nm]) for nm in names}
                if len(set(counts.values())) > 1:
                    detail = ", ".join(f"${k}={v}" for k, v in counts.items())
                    raise RepetitionCountMismatch(f"repetition counts differ ({detail})", tt.span)
                for k in range(counts[names[0]]):
                    if k and sep is not None:
                        out.append(_respan(sep, site))
                    sub = dict(env)
                    for nm in names:
                        sub[nm] = env[nm][k]
                    out.extend(_transcribe(nxt.children, sub, site))
                i = after
                continue
            if isinstance(nxt, Token) and nxt.kind == IDENT:
                if nxt.text not in env:
                    raise UnboundFragment(f"${nxt.text} is not bound by the pattern", nxt.span)
                cap = env[nxt.text]
                if isinstance(cap, list):
                    raise RepetitionCountMismatch(f"${nxt.text} is repeated but used outside a repetition",
                                                  nxt.span)
                toks = cap.tokens
                if cap.spec == "expr" and len(cap.trees) > 1:
                    lp, rp = _paren(site or toks[0].span)
                    toks = [lp, *toks, rp]
                out.extend(toks)
                i += 2
                continue
        if isinstance(tt, Group):
            out.append(_respan(tt.open, site))
            out.extend(_transcribe(tt.children, env, site))
            out.append(_respan(tt.close, site))
        else:
            out.append(_respan(tt, site))
        i += 1
    return out


def transcribe(template, bindings: MatchBindings | dict, site: SourceSpan | None = None) -> list[Token]:
    """Substitute captures into a template (raw tokens); template tokens take the ``site`` span."""
    env = bindings.captures if isinstance(bindings, MatchBindings) else dict(bindings)
    trees = template if template and isinstance(template[0], Group) else token_trees(template)
    return _transcribe(trees, env, site)


# macro definitions

@dataclass
class CompiledRule:
    pattern: list
    template: list  # token trees


@dataclass
class MacroRules:
    name: str
    rules: list[CompiledRule]

    @classmethod
    def from_def(cls, d: n.MacroDef) -> "MacroRules":
        rules = []
        for r in d.rules:
            try:
                elems = compile_pattern(token_trees(r.pattern))
                pattern_names(elems)
                template = token_trees(r.template)
            except ParseError as exc:
                raise MacroDefinitionError(exc.message, exc.span) from exc
            rules.append(CompiledRule(elems, template))
        return cls(d.name, rules)

    def expand(self, tokens: list[Token], site: SourceSpan | None) -> list[Token]:
        trees = token_trees(tokens)
        for rule in self.rules:
            for end, binds in _Matcher().seq(rule.pattern, 0, trees, 0, {}):
                if end == len(trees):
                    return _transcribe(rule.template, binds, site)
        raise NoRuleMatched(f"no rule of macro '{self.name}!' matches this invocation", site)


def collect_macros(program: n.Program) -> dict[str, MacroRules]:
    table: dict[str, MacroRules] = {}
    for item in program.items:
        if isinstance(item, n.MacroDef):
            if item.name in table:
                raise MacroDefinitionError(f"macro '{item.name}!' is defined twice", item.span)
            table[item.name] = MacroRules.from_def(item)
    return table


def default_depth_limit() -> int:
    env = os.environ.get("FRS_MACRO_DEPTH")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return DEFAULT_DEPTH_LIMIT


# expansion

def _parse_args(tokens: list[Token]) -> list:
    p = Parser(tokens)
    args = []
    while not p.at_end():
        args.append(p.parse_expression(0))
        if not p.eat(","):
            break
    if not p.at_end():
        raise p.error("',' or end of macro arguments")
    return args


def _expand_expr_tokens(tokens: list[Token], site: SourceSpan | None):
    try:
        node = parse_expression(tokens)
    except ParseError:
        stmts, tail = parse_statements(tokens)
        node = n.Block(stmts, tail)
    if node.span is None:
        node.span = site
    return node


class Expander:
    def __init__(self, macros: dict[str, MacroRules], depth_limit: int):
        if depth_limit < 1:
            raise ValueError("depth_limit must be at least 1")
        self.macros = macros
        self.depth_limit = depth_limit
        self.expansions = 0

    def _step(self, call: n.MacroCall, depth: int) -> list[Token]:
        """Run one expansion of a user macro, enforcing the per-site depth limit."""
        if depth >= self.depth_limit:
            raise RecursionLimitExceeded(
                f"macro '{call.name}!' exceeded the expansion depth limit of {self.depth_limit}",
                call.span, self.depth_limit)
        rules = self.macros.get(call.name)
        if rules is None:
            raise UnknownMacro(f"unknown macro '{call.name}!'", call.span)
        self.expansions += 1
        return rules.expand(call.tokens, call.span)

    def _is_user(self, node) -> bool:
        return isinstance(node, n.MacroCall) and (node.name in self.macros or node.name not in BUILTIN_MACROS)

    def builtin(self, call: n.MacroCall, depth: int) -> n.BuiltinMacro:
        args = [self.expr(a, depth) for a in _parse_args(call.tokens)]
        node = n.BuiltinMacro(call.name, args)
        node.span = call.span
        return node

    def expr(self, node, depth: int):
        while self._is_user(node):
            node = _expand_expr_tokens(self._step(node, depth), node.span)
            depth += 1
        if isinstance(node, n.MacroCall):
            return self.builtin(node, depth)
        return self.visit(node, depth)

    def block(self, node: n.Block, depth: int) -> n.Block:
        pending = [(s, depth) for s in node.stmts]
        if node.tail is not None:
            pending.append((n.ExprStmt(node.tail, span=node.tail.span), depth, "tail"))
        stmts: list = []
        tail = None
        while pending:
            entry = pending.pop(0)
            stmt, d = entry[0], entry[1]
            is_tail = len(entry) == 3
            if isinstance(stmt, n.ExprStmt) and self._is_user(stmt.expr) and not is_tail:
                toks = self._step(stmt.expr, d)
                new_stmts, new_tail = parse_statements(toks)
                spliced = [(s, d + 1) for s in new_stmts]
                if new_tail is not None:
                    spliced.append((n.ExprStmt(new_tail, span=new_tail.span or stmt.span), d + 1))
                pending[:0] = spliced
                continue
            if is_tail:
                tail = self.expr(stmt.expr, d)
            else:
                stmts.append(self.visit(stmt, d))
        out = n.Block(stmts, tail)
        out.span = node.span
        return out

    def visit(self, node, depth: int):
        if isinstance(node, n.Block):
            return self.block(node, depth)
        if isinstance(node, n.MacroCall):
            return self.expr(node, depth)
        if not isinstance(node, n.Node) or isinstance(node, (n.MacroDef, n.MacroRule)):
            return node
        changes = {}
        for f in fields(node):
            if f.name == "span":
                continue
            value = getattr(node, f.name)
            if isinstance(value, list):
                new = [self.visit(v, depth) if isinstance(v, n.Node) else v for v in value]
                if any(a is not b for a, b in zip(new, value)):
                    changes[f.name] = new
            elif isinstance(value, n.Node):
                new = self.visit(value, depth)
                if new is not value:
                    changes[f.name] = new
        if not changes:
            return node
        out = replace(node, **changes)
        out.span = node.span
        return out


def expand_all(program: n.Program, macros: dict[str, MacroRules] | None = None,
               depth_limit: int | None = None) -> n.Program:
    """Expand every macro invocation until none remain. MacroDef items are kept."""
    if macros is None:
        macros = collect_macros(program)
    if depth_limit is None:
        depth_limit = default_depth_limit()
    return Expander(macros, depth_limit).visit(program, 0)


def contains_invocations(node) -> bool:
    return any(isinstance(x, n.MacroCall) for x in n.walk(node))
