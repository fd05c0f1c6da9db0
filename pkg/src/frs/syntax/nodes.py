"""Tree node classes for items, statements, expressions, patterns and type terms.

Spans never take part in equality, so two trees compare equal when they
have the same structure regardless of where they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any

from ..errors import SourceSpan
from ..lexer import Token


@dataclass
class Node:
    span: SourceSpan | None = field(default=None, compare=False, repr=False, kw_only=True)


# type terms

@dataclass
class TypePath(Node):
    name: str
    args: list = field(default_factory=list)


@dataclass
class RefType(Node):
    mutable: bool
    inner: Any


@dataclass
class TupleType(Node):
    items: list


@dataclass
class SliceType(Node):
    elem: Any


@dataclass
class FnType(Node):
    params: list
    ret: Any = None


# patterns

@dataclass
class WildcardPat(Node):
    pass


@dataclass
class LitPat(Node):
    value: "Literal"


@dataclass
class BindPat(Node):
    """A bare name. Consumers treat it as a unit-variant test when the name is a known variant."""
    name: str
    mutable: bool = False
    by_ref: bool = False


@dataclass
class AtPat(Node):
    name: str
    sub: Any


@dataclass
class TuplePat(Node):
    items: list


@dataclass
class VariantPat(Node):
    name: str
    items: list


@dataclass
class FieldPat(Node):
    name: str
    pattern: Any


@dataclass
class RecordPat(Node):
    name: str
    fields: list
    rest: bool = False


@dataclass
class RefPat(Node):
    sub: Any
    mutable: bool = False


@dataclass
class OrPat(Node):
    alts: list


# expressions

@dataclass
class Literal(Node):
    kind: str  # int float bool char str byte bytestr
    value: Any
    suffix: str | None = None


@dataclass
class Path(Node):
    name: str


@dataclass
class FieldInit(Node):
    name: str
    value: Any


@dataclass
class RecordExpr(Node):
    name: str
    fields: list
    base: Any = None


@dataclass
class TupleExpr(Node):
    items: list


@dataclass
class FieldAccess(Node):
    base: Any
    name: str


@dataclass
class ArrayExpr(Node):
    items: list


@dataclass
class ArrayRepeat(Node):
    value: Any
    count: Any


@dataclass
class Index(Node):
    base: Any
    index: Any


@dataclass
class Block(Node):
    stmts: list
    tail: Any = None


@dataclass
class If(Node):
    cond: Any
    then: Block
    else_: Any = None


@dataclass
class Arm(Node):
    pattern: Any
    guard: Any
    body: Any


@dataclass
class Match(Node):
    scrutinee: Any
    arms: list


@dataclass
class Call(Node):
    func: Any
    args: list


@dataclass
class MethodCall(Node):
    receiver: Any
    method: str
    args: list


@dataclass
class Param(Node):
    pattern: Any
    type: Any = None


@dataclass
class Lambda(Node):
    params: list
    body: Any
    ret: Any = None


@dataclass
class BinaryOp(Node):
    op: str
    lhs: Any
    rhs: Any


@dataclass
class UnaryOp(Node):
    op: str  # "-" "!" "*" "&" "&mut"
    operand: Any


@dataclass
class Assign(Node):
    place: Any
    value: Any


@dataclass
class CompoundAssign(Node):
    op: str  # the binary operator, e.g. "+" for "+="
    place: Any
    value: Any


@dataclass
class ForLoop(Node):
    pattern: Any
    iterable: Any
    body: Block


@dataclass
class Loop(Node):
    body: Block


@dataclass
class While(Node):
    cond: Any
    body: Block


@dataclass
class Break(Node):
    pass


@dataclass
class Return(Node):
    value: Any = None


@dataclass
class BoxExpr(Node):
    operand: Any
    allocator: str | None = None


@dataclass
class MacroCall(Node):
    """An unexpanded invocation; the interior stays a raw token list."""
    name: str
    tokens: list
    delim: str = "("


@dataclass
class BuiltinMacro(Node):
    """println!/print!/format!/vec! after expansion, with parsed arguments."""
    name: str
    args: list


# statements

@dataclass
class Let(Node):
    pattern: Any
    type: Any = None
    init: Any = None


@dataclass
class ExprStmt(Node):
    expr: Any


# items

@dataclass
class FnDef(Node):
    name: str
    type_params: list
    self_param: str | None  # None, "self", "&self", "&mut self", "mut self"
    params: list
    ret: Any
    body: Block | None


@dataclass
class FieldDef(Node):
    name: str
    type: Any


@dataclass
class StructDef(Node):
    name: str
    type_params: list
    fields: list | None  # None for a unit struct


@dataclass
class VariantDef(Node):
    name: str
    payload: list | None = None


@dataclass
class EnumDef(Node):
    name: str
    type_params: list
    variants: list


@dataclass
class TraitDef(Node):
    name: str
    type_params: list
    methods: list


@dataclass
class ImplBlock(Node):
    type_params: list
    trait: TypePath | None
    target: Any
    methods: list


@dataclass
class MacroRule(Node):
    pattern: list  # tokens inside the pattern delimiters
    template: list  # tokens inside the template delimiters


@dataclass
class MacroDef(Node):
    name: str
    rules: list


@dataclass
class TypeAlias(Node):
    name: str
    type_params: list
    target: Any


@dataclass
class UseDecl(Node):
    path: str


@dataclass
class Program(Node):
    items: list


BLOCK_LIKE = (Block, If, Match, Loop, While, ForLoop)

NODE_CLASSES = {cls.__name__: cls for cls in [
    TypePath, RefType, TupleType, SliceType, FnType,
    WildcardPat, LitPat, BindPat, AtPat, TuplePat, VariantPat, FieldPat, RecordPat, RefPat, OrPat,
    Literal, Path, FieldInit, RecordExpr, TupleExpr, FieldAccess, ArrayExpr, ArrayRepeat, Index,
    Block, If, Arm, Match, Call, MethodCall, Param, Lambda, BinaryOp, UnaryOp, Assign,
    CompoundAssign, ForLoop, Loop, While, Break, Return, BoxExpr, MacroCall, BuiltinMacro,
    Let, ExprStmt, FnDef, FieldDef, StructDef, VariantDef, EnumDef, TraitDef, ImplBlock,
    MacroRule, MacroDef, TypeAlias, UseDecl, Program,
]}


def children(node: Any):
    """Yield the direct child nodes (including tokens) of a node, in field order."""
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, list):
            for item in value:
                if isinstance(item, (Node, Token)):
                    yield item
        elif isinstance(value, (Node, Token)):
            yield value


def walk(node: Any):
    """Pre-order traversal of every node below and including ``node``."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        if is_dataclass(current) and isinstance(current, Node):
            stack.extend(reversed(list(children(current))))


def identifiers(node: Any) -> set[str]:
    """Every name mentioned anywhere under ``node`` (paths, bindings, fields, macro tokens)."""
    names = set()
    for n in walk(node):
        if isinstance(n, Token):
            if n.kind == "Ident":
                names.add(n.text)
        elif isinstance(n, Path):
            names.update(n.name.split("::"))
        elif isinstance(n, (BindPat, AtPat)):
            names.add(n.name)
    return names
