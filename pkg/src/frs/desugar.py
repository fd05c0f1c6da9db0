"""Rewrite surface operators into trait-method calls and `for` loops into `loop`/`next()`."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .syntax import nodes as n


@dataclass(frozen=True)
class OperatorEntry:
    method: str
    trait: str


BINARY_OPERATORS = {
    "==": OperatorEntry("eq", "PartialEq"),
    "!=": OperatorEntry("ne", "PartialEq"),
    "<": OperatorEntry("lt", "PartialOrd"),
    ">": OperatorEntry("gt", "PartialOrd"),
    "<=": OperatorEntry("le", "PartialOrd"),
    ">=": OperatorEntry("ge", "PartialOrd"),
    "+": OperatorEntry("add", "Add"),
    "-": OperatorEntry("sub", "Sub"),
    "*": OperatorEntry("mul", "Mul"),
    "/": OperatorEntry("div", "Div"),
    "%": OperatorEntry("rem", "Rem"),
    "&": OperatorEntry("bitand", "BitAnd"),
    "|": OperatorEntry("bitor", "BitOr"),
    "^": OperatorEntry("bitxor", "BitXor"),
    "<<": OperatorEntry("shl", "Shl"),
    ">>": OperatorEntry("shr", "Shr"),
}
UNARY_OPERATORS = {
    "-": OperatorEntry("neg", "Neg"),
    "!": OperatorEntry("not", "Not"),
    "*": OperatorEntry("deref", "Deref"),
}
# keyed by (symbol, arity)
OPERATOR_TABLE = {**{(op, 2): e for op, e in BINARY_OPERATORS.items()},
                  **{(op, 1): e for op, e in UNARY_OPERATORS.items()}}


def _rebuild(node, fn):
    """Apply fn to every direct child node, returning a copy only if something changed."""
    changes = {}
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, list):
            new = [fn(v) if isinstance(v, n.Node) else v for v in value]
            if any(a is not b for a, b in zip(new, value)):
                changes[f.name] = new
        elif isinstance(value, n.Node):
            new = fn(value)
            if new is not value:
                changes[f.name] = new
    if not changes:
        return node
    out = replace(node, **changes)
    out.span = node.span
    return out


def _method(receiver, method: str, args: list, span):
    return n.MethodCall(receiver, method, args, span=span)


def desugar_operators(tree):
    """Bottom-up rewrite of table operators into method calls; places keep their shape."""
    if not isinstance(tree, n.Node) or isinstance(tree, (n.MacroDef, n.MacroRule)):
        return tree
    if isinstance(tree, n.Assign):
        return n.Assign(_place(tree.place), desugar_operators(tree.value), span=tree.span)
    if isinstance(tree, n.CompoundAssign):
        place = _place(tree.place)
        current = desugar_operators(tree.place)
        value = desugar_operators(tree.value)
        entry = BINARY_OPERATORS[tree.op]
        return n.Assign(place, _method(current, entry.method, [value], tree.span), span=tree.span)
    tree = _rebuild(tree, desugar_operators)
    if isinstance(tree, n.BinaryOp) and tree.op in BINARY_OPERATORS:
        return _method(tree.lhs, BINARY_OPERATORS[tree.op].method, [tree.rhs], tree.span)
    if isinstance(tree, n.UnaryOp) and tree.op in UNARY_OPERATORS:
        return _method(tree.operand, UNARY_OPERATORS[tree.op].method, [], tree.span)
    return tree


def _place(p):
    if isinstance(p, n.UnaryOp) and p.op == "*":
        return n.UnaryOp("*", _place(p.operand), span=p.span)
    if isinstance(p, n.FieldAccess):
        return n.FieldAccess(_place(p.base), p.name, span=p.span)
    if isinstance(p, n.Index):
        return n.Index(_place(p.base), desugar_operators(p.index), span=p.span)
    return desugar_operators(p)


def fresh_name(taken: set[str], base: str = "_v") -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def expand_for(loop: n.ForLoop, var: str) -> n.Match:
    sp = loop.span
    arms = [
        n.Arm(n.BindPat("None", span=sp), None, n.Break(span=sp), span=sp),
        n.Arm(n.VariantPat("Some", [loop.pattern], span=sp), None, loop.body, span=sp),
    ]
    inner = n.Match(n.MethodCall(n.Path(var, span=sp), "next", [], span=sp), arms, span=sp)
    body = n.Loop(n.Block([], inner, span=sp), span=sp)
    return n.Match(n.UnaryOp("&mut", loop.iterable, span=sp),
                   [n.Arm(n.BindPat(var, span=sp), None, body, span=sp)], span=sp)


def desugar_for(tree):
    """Replace every ForLoop (innermost first) with the match/loop/next expansion."""
    if not isinstance(tree, n.Node) or isinstance(tree, (n.MacroDef, n.MacroRule)):
        return tree
    tree = _rebuild(tree, desugar_for)
    if isinstance(tree, n.ForLoop):
        taken = n.identifiers(tree.body) | n.identifiers(tree.pattern) | n.identifiers(tree.iterable)
        return expand_for(tree, fresh_name(taken))
    return tree


def desugar(tree):
    return desugar_operators(desugar_for(tree))


def desugar_program(p: n.Program) -> n.Program:
    return desugar(p)


def _place_derefs(tree) -> set[int]:
    keep: set[int] = set()
    for x in n.walk(tree):
        if isinstance(x, (n.Assign, n.CompoundAssign)):
            p = x.place
            while isinstance(p, (n.UnaryOp, n.FieldAccess, n.Index)):
                if isinstance(p, n.UnaryOp) and p.op == "*":
                    keep.add(id(p))
                p = p.operand if isinstance(p, n.UnaryOp) else p.base
    return keep


def has_sugar(tree) -> bool:
    """True if any for loop, compound assignment or table operator (outside assignment places) remains."""
    places = _place_derefs(tree)
    for x in n.walk(tree):
        if isinstance(x, (n.ForLoop, n.CompoundAssign)):
            return True
        if isinstance(x, n.BinaryOp) and x.op in BINARY_OPERATORS:
            return True
        if isinstance(x, n.UnaryOp) and x.op in UNARY_OPERATORS and id(x) not in places:
            return True
    return False
