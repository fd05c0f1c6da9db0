"""Tree-walking evaluator.

Works on desugared trees, but surface operators and ``for`` loops are also
accepted and routed through the same method dispatch, so a sugared program
and its desugared form run the same code paths.
"""

from __future__ import annotations

import math
import sys
import threading

from ..desugar import BINARY_OPERATORS, UNARY_OPERATORS
from ..errors import (
    NO_SPAN,
    AmbiguousMethod,
    ArityMismatch,
    DivisionByZero,
    EvalError,
    FormatArityMismatch,
    FrsError,
    IndexOutOfBounds,
    NoMethodFound,
    NonExhaustiveMatch,
    StackOverflow,
    TypeMismatch,
    UnknownIdentifier,
)
from ..syntax import nodes as n
from .prelude import prelude_items
from .values import (
    FLOAT_TYPES,
    INT_WIDTHS,
    POINTERS,
    UNIT,
    UNTYPED,
    BoxV,
    Cell,
    Char,
    Closure,
    Float,
    FnRef,
    Int,
    Place,
    RangeIter,
    RcV,
    Record,
    Ref,
    SlotPlace,
    TupleV,
    Variant,
    VecIter,
    Vector,
    copy_value,
    display,
    inner_place,
    join_types,
    type_name,
    unwrap,
)

MAX_CALL_DEPTH = 10_000
EVAL_STACK_BYTES = 1 << 30
_NOT_FOUND = object()


class BreakSignal(Exception):
    pass


class ReturnSignal(Exception):
    def __init__(self, value):
        super().__init__()
        self.value = value


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, parent: "Env | None" = None):
        self.vars: dict[str, Cell] = {}
        self.parent = parent

    def lookup(self, name: str) -> Cell | None:
        env = self
        while env is not None:
            cell = env.vars.get(name)
            if cell is not None:
                return cell
            env = env.parent
        return None

    def declare(self, name: str, value) -> None:
        self.vars[name] = Cell(value)


def _type_key(ty) -> str | None:
    if isinstance(ty, n.TypePath):
        return ty.name.split("::")[-1]
    if isinstance(ty, n.RefType):
        return _type_key(ty.inner)
    if isinstance(ty, n.TupleType):
        return "tuple" if ty.items else "()"
    if isinstance(ty, n.SliceType):
        return "Vec"
    return None


def _subst(ty, mapping: dict):
    if isinstance(ty, n.TypePath):
        if ty.name in mapping and not ty.args:
            return mapping[ty.name]
        return n.TypePath(ty.name, [_subst(a, mapping) for a in ty.args])
    if isinstance(ty, n.RefType):
        return n.RefType(ty.mutable, _subst(ty.inner, mapping))
    if isinstance(ty, n.TupleType):
        return n.TupleType([_subst(a, mapping) for a in ty.items])
    if isinstance(ty, n.SliceType):
        return n.SliceType(_subst(ty.elem, mapping))
    return ty


def _int_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _int_rem(a: int, b: int) -> int:
    return a - b * _int_div(a, b)


class Interpreter:
    def __init__(self, program: n.Program):
        self.out: list[str] = []
        self.depth = 0
        self.fns: dict[str, n.FnDef] = {}
        self.structs: dict[str, n.StructDef] = {}
        self.variants: dict[str, tuple[str, n.VariantDef]] = {}
        self.traits: dict[str, n.TraitDef] = {}
        self.aliases: dict[str, n.TypeAlias] = {}
        self.inherent: dict[str, dict[str, n.FnDef]] = {}
        self.trait_impls: dict[str, list[tuple[str, dict]]] = {}
        user_names = {getattr(it, "name", None) for it in program.items}
        items = [it for it in prelude_items() if getattr(it, "name", None) not in user_names]
        for item in items + list(program.items):
            self.register(item)

    # registry

    def register(self, item) -> None:
        if isinstance(item, n.FnDef):
            self.fns[item.name] = item
        elif isinstance(item, n.StructDef):
            self.structs[item.name] = item
        elif isinstance(item, n.EnumDef):
            for v in item.variants:
                self.variants[v.name] = (item.name, v)
        elif isinstance(item, n.TraitDef):
            self.traits[item.name] = item
        elif isinstance(item, n.TypeAlias):
            self.aliases[item.name] = item
        elif isinstance(item, n.ImplBlock):
            key = _type_key(item.target)
            if isinstance(item.target, n.TypePath) and item.target.name in item.type_params:
                key = "*"
            methods = {m.name: m for m in item.methods}
            if item.trait is None:
                self.inherent.setdefault(key, {}).update(methods)
            else:
                self.trait_impls.setdefault(key, []).append((item.trait.name, methods))

    def find_method(self, tname: str, name: str) -> n.FnDef | None:
        for key in (tname, "*"):
            m = self.inherent.get(key, {}).get(name)
            if m is not None:
                return m
            found = []
            for trait, methods in self.trait_impls.get(key, []):
                if name in methods:
                    found.append(methods[name])
                else:
                    td = self.traits.get(trait)
                    for dm in (td.methods if td else []):
                        if dm.name == name and dm.body is not None:
                            found.append(dm)
            if len(found) > 1:
                raise AmbiguousMethod(f"method '{name}' is provided by more than one trait for type {tname}")
            if found:
                return found[0]
        return None

    # entry points

    def run(self, entry: str = "main"):
        fn = self.fns.get(entry)
        if fn is None:
            raise UnknownIdentifier(f"no function named '{entry}'")
        if fn.params or fn.self_param:
            raise ArityMismatch(f"entry function '{entry}' must take no parameters", fn.span)
        return self.call_function(fn, [])

    @property
    def stdout(self) -> str:
        return "".join(self.out)

    # evaluation

    def eval(self, node, env: Env):
        try:
            return getattr(self, "e_" + type(node).__name__)(node, env)
        except EvalError as exc:
            if exc.span == NO_SPAN and getattr(node, "span", None) is not None:
                exc.span = node.span
            raise

    def e_Literal(self, node: n.Literal, env):
        k = node.kind
        if k == "int":
            return Int.make(node.value, node.suffix or UNTYPED)
        if k == "float":
            return Float.make(node.value, node.suffix or UNTYPED)
        if k == "bool":
            return bool(node.value)
        if k == "char":
            return Char(node.value)
        if k == "str":
            return node.value
        if k == "byte":
            return Int(node.value, "u8")
        if k == "bytestr":
            return Vector([Int(b, "u8") for b in node.value])
        raise TypeMismatch(f"unknown literal kind {k!r}")

    def e_Path(self, node: n.Path, env: Env):
        if "::" not in node.name:
            cell = env.lookup(node.name)
            if cell is not None:
                if cell.value is None:
                    raise UnknownIdentifier(f"'{node.name}' is used before it is initialized")
                return cell.value
        return self.global_value(node.name)

    def global_value(self, name: str):
        last = name.split("::")[-1]
        if name in self.fns:
            return FnRef(name)
        if last in self.variants:
            enum, vdef = self.variants[last]
            if vdef.payload:
                return FnRef(name)
            return Variant(enum, last, [])
        sd = self.structs.get(last)
        if sd is not None and sd.fields is None:
            return Record(last, {})
        if last == "sqrt" or name in ("range", "Rc::new", "Box::new", "Vec::new"):
            return FnRef(name)
        raise UnknownIdentifier(f"unknown identifier '{name}'")

    def e_Block(self, node: n.Block, env: Env):
        inner = Env(env)
        for s in node.stmts:
            if isinstance(s, n.Let):
                self.do_let(s, inner)
            elif isinstance(s, n.ExprStmt):
                self.eval(s.expr, inner)
            else:
                self.eval(s, inner)
        if node.tail is not None:
            return self.eval(node.tail, inner)
        return UNIT

    def e_ExprStmt(self, node, env):
        self.eval(node.expr, env)
        return UNIT

    def do_let(self, s: n.Let, env: Env) -> None:
        if s.init is None:
            for name in _pattern_names(s.pattern):
                env.vars[name] = Cell(None)
            return
        value = self.coerce(copy_value(self.eval(s.init, env)), s.type)
        binds: dict = {}
        if not self.match_pattern(s.pattern, Cell(value), binds):
            raise NonExhaustiveMatch("refutable pattern in let did not match", s.span)
        for k, v in binds.items():
            env.declare(k, v)

    def e_TupleExpr(self, node, env):
        if not node.items:
            return UNIT
        return TupleV([copy_value(self.eval(x, env)) for x in node.items])

    def e_ArrayExpr(self, node, env):
        return Vector([copy_value(self.eval(x, env)) for x in node.items])

    def e_ArrayRepeat(self, node, env):
        value = self.eval(node.value, env)
        count = unwrap(self.eval(node.count, env))
        if not isinstance(count, Int) or count.value < 0:
            raise TypeMismatch("array repeat count must be a non-negative integer")
        return Vector([copy_value(value) for _ in range(count.value)])

    def e_RecordExpr(self, node: n.RecordExpr, env):
        name = node.name.split("::")[-1]
        sd = self.structs.get(name)
        if sd is None or sd.fields is None:
            raise UnknownIdentifier(f"unknown struct '{node.name}'")
        ftypes = {f.name: f.type for f in sd.fields}
        values: dict = {}
        for fi in node.fields:
            if fi.name not in ftypes:
                raise TypeMismatch(f"struct {name} has no field '{fi.name}'")
            values[fi.name] = self.coerce(copy_value(self.eval(fi.value, env)), ftypes[fi.name])
        if node.base is not None:
            base = unwrap(self.eval(node.base, env))
            if not isinstance(base, Record) or base.name != name:
                raise TypeMismatch(f"functional update base is not a {name}")
            for k, v in base.fields.items():
                values.setdefault(k, copy_value(v))
        missing = [f for f in ftypes if f not in values]
        if missing:
            raise TypeMismatch(f"missing field(s) {', '.join(missing)} in {name} literal")
        return Record(name, {f: values[f] for f in ftypes})

    def e_FieldAccess(self, node, env):
        return self.eval_place(node, env).get()

    def e_Index(self, node, env):
        return self.eval_place(node, env).get()

    def e_If(self, node: n.If, env):
        if self.truth(self.eval(node.cond, env)):
            return self.eval(node.then, env)
        if node.else_ is not None:
            return self.eval(node.else_, env)
        return UNIT

    def truth(self, v) -> bool:
        v = unwrap(v)
        if not isinstance(v, bool):
            raise TypeMismatch(f"expected a bool condition, found {type_name(v)}")
        return v

    def e_Match(self, node: n.Match, env):
        place = self.eval_place(node.scrutinee, env)
        for arm in node.arms:
            binds: dict = {}
            if not self.match_pattern(arm.pattern, place, binds):
                continue
            arm_env = Env(env)
            for k, v in binds.items():
                arm_env.declare(k, v)
            if arm.guard is not None and not self.truth(self.eval(arm.guard, arm_env)):
                continue
            return self.eval(arm.body, arm_env)
        raise NonExhaustiveMatch(f"no match arm matches {display(place.get())}")

    def e_Loop(self, node, env):
        while True:
            try:
                self.eval(node.body, env)
            except BreakSignal:
                return UNIT

    def e_While(self, node, env):
        while self.truth(self.eval(node.cond, env)):
            try:
                self.eval(node.body, env)
            except BreakSignal:
                break
        return UNIT

    def e_ForLoop(self, node: n.ForLoop, env):
        place = self.eval_place(node.iterable, env)
        while True:
            r = unwrap(self.dispatch_method(place, "next", []))
            if not isinstance(r, Variant) or r.name not in ("None", "Some"):
                raise TypeMismatch(f"next() must return None or Some(_), got {display(r)}")
            if r.name == "None":
                return UNIT
            binds: dict = {}
            if not self.match_pattern(node.pattern, Cell(r.payload[0]), binds):
                raise NonExhaustiveMatch("for-loop pattern did not match")
            body_env = Env(env)
            for k, v in binds.items():
                body_env.declare(k, v)
            try:
                self.eval(node.body, body_env)
            except BreakSignal:
                return UNIT

    def e_Break(self, node, env):
        raise BreakSignal()

    def e_Return(self, node, env):
        raise ReturnSignal(UNIT if node.value is None else self.eval(node.value, env))

    def e_BoxExpr(self, node, env):
        return BoxV(Cell(copy_value(self.eval(node.operand, env))))

    def e_Lambda(self, node: n.Lambda, env):
        return Closure(node.params, node.body, env, node.ret)

    def e_Assign(self, node: n.Assign, env):
        value = copy_value(self.eval(node.value, env))
        place = self.eval_place(node.place, env)
        place.set(self.adopt(place.get(), value))
        return UNIT

    def e_CompoundAssign(self, node: n.CompoundAssign, env):
        method = BINARY_OPERATORS[node.op].method
        place = self.eval_place(node.place, env)
        arg = copy_value(self.eval(node.value, env))
        result = self.dispatch_method(Cell(place.get()), method, [arg])
        place.set(self.adopt(place.get(), result))
        return UNIT

    def adopt(self, old, new):
        if isinstance(old, Int) and isinstance(new, Int) and new.ty == UNTYPED and old.ty != UNTYPED:
            return Int.make(new.value, old.ty)
        if isinstance(old, Float) and isinstance(new, Float) and new.ty == UNTYPED and old.ty != UNTYPED:
            return Float.make(new.value, old.ty)
        return new

    def e_UnaryOp(self, node: n.UnaryOp, env):
        if node.op in ("&", "&mut"):
            return Ref(self.eval_place(node.operand, env), node.op == "&mut")
        method = UNARY_OPERATORS[node.op].method
        return self.dispatch_method(self.eval_place(node.operand, env), method, [])

    def e_BinaryOp(self, node: n.BinaryOp, env):
        if node.op == "&&":
            return self.truth(self.eval(node.lhs, env)) and self.truth(self.eval(node.rhs, env))
        if node.op == "||":
            return self.truth(self.eval(node.lhs, env)) or self.truth(self.eval(node.rhs, env))
        place = self.eval_place(node.lhs, env)
        arg = copy_value(self.eval(node.rhs, env))
        return self.dispatch_method(place, BINARY_OPERATORS[node.op].method, [arg])

    def e_MethodCall(self, node: n.MethodCall, env):
        place = self.eval_place(node.receiver, env)
        args = [copy_value(self.eval(a, env)) for a in node.args]
        return self.dispatch_method(place, node.method, args)

    def e_Call(self, node: n.Call, env):
        f = node.func
        if isinstance(f, n.Path) and ("::" in f.name or env.lookup(f.name) is None):
            args = [copy_value(self.eval(a, env)) for a in node.args]
            return self.call_named(f.name, args)
        callee = self.eval(f, env)
        args = [copy_value(self.eval(a, env)) for a in node.args]
        return self.call_value(callee, args)

    def e_BuiltinMacro(self, node: n.BuiltinMacro, env):
        args = [self.eval(a, env) for a in node.args]
        if node.name == "vec":
            return Vector([copy_value(a) for a in args])
        if not args:
            raise FormatArityMismatch(f"{node.name}! needs a format string")
        template = unwrap(args[0])
        if not isinstance(template, str):
            raise TypeMismatch(f"{node.name}! format must be a string literal")
        text = format_template(template, args[1:])
        if node.name == "format":
            return text
        self.out.append(text + ("\n" if node.name == "println" else ""))
        return UNIT

    def e_MacroCall(self, node: n.MacroCall, env):
        raise EvalError(f"macro '{node.name}!' was not expanded before evaluation")

    # places

    def eval_place(self, node, env: Env) -> Place:
        if isinstance(node, n.Path) and "::" not in node.name:
            cell = env.lookup(node.name)
            if cell is not None:
                return cell
            return Cell(self.global_value(node.name))
        if isinstance(node, n.FieldAccess):
            p = deref_place(self.eval_place(node.base, env))
            v = p.get()
            if isinstance(v, Record) and node.name in v.fields:
                return SlotPlace(v.fields, node.name, p.readonly)
            if isinstance(v, TupleV) and node.name.isdigit() and int(node.name) < len(v.items):
                return SlotPlace(v.items, int(node.name), p.readonly)
            raise TypeMismatch(f"no field '{node.name}' on {type_name(v)}", node.span)
        if isinstance(node, n.Index):
            p = deref_place(self.eval_place(node.base, env))
            idx = unwrap(self.eval(node.index, env))
            v = p.get()
            if not isinstance(v, Vector):
                raise TypeMismatch(f"cannot index into {type_name(v)}", node.span)
            if not isinstance(idx, Int):
                raise TypeMismatch("vector index must be an integer", node.span)
            if not 0 <= idx.value < len(v.items):
                raise IndexOutOfBounds(
                    f"index out of bounds: the len is {len(v.items)} but the index is {idx.value}", node.span)
            return SlotPlace(v.items, idx.value, p.readonly)
        if isinstance(node, n.UnaryOp) and node.op == "*":
            return self.pointee(self.eval(node.operand, env))
        if isinstance(node, n.MethodCall) and node.method == "deref" and not node.args:
            v = self.eval(node.receiver, env)
            if isinstance(v, POINTERS):
                return inner_place(v)
        return Cell(self.eval(node, env))

    def pointee(self, v) -> Place:
        if isinstance(v, POINTERS):
            return inner_place(v)
        raise TypeMismatch(f"cannot dereference a value of type {type_name(v)}")

    # patterns

    def is_unit_name(self, name: str) -> bool:
        last = name.split("::")[-1]
        if last in self.variants:
            return True
        sd = self.structs.get(last)
        return sd is not None and sd.fields is None

    def match_pattern(self, pat, place: Place, binds: dict) -> bool:
        if isinstance(pat, n.WildcardPat):
            return True
        if isinstance(pat, n.BindPat):
            if not pat.mutable and not pat.by_ref and self.is_unit_name(pat.name):
                v = unwrap(place.get())
                last = pat.name.split("::")[-1]
                if isinstance(v, Variant):
                    return v.name == last and not v.payload
                return isinstance(v, Record) and v.name == last
            binds[pat.name] = Ref(place, pat.mutable) if pat.by_ref else copy_value(place.get())
            return True
        if isinstance(pat, n.AtPat):
            if self.match_pattern(pat.sub, place, binds):
                binds[pat.name] = copy_value(place.get())
                return True
            return False
        if isinstance(pat, n.LitPat):
            return literal_matches(pat.value, unwrap(place.get()))
        if isinstance(pat, n.RefPat):
            v = place.get()
            return self.match_pattern(pat.sub, inner_place(v) if isinstance(v, POINTERS) else place, binds)
        if isinstance(pat, n.OrPat):
            for alt in pat.alts:
                trial: dict = {}
                if self.match_pattern(alt, place, trial):
                    binds.update(trial)
                    return True
            return False
        p = deref_place(place)
        v = p.get()
        if isinstance(pat, n.TuplePat):
            if not pat.items and v is UNIT:
                return True
            if not isinstance(v, TupleV) or len(v.items) != len(pat.items):
                return False
            return all(self.match_pattern(sp, SlotPlace(v.items, i, p.readonly), binds)
                       for i, sp in enumerate(pat.items))
        if isinstance(pat, n.VariantPat):
            if not isinstance(v, Variant) or v.name != pat.name.split("::")[-1] \
                    or len(v.payload) != len(pat.items):
                return False
            return all(self.match_pattern(sp, SlotPlace(v.payload, i, p.readonly), binds)
                       for i, sp in enumerate(pat.items))
        if isinstance(pat, n.RecordPat):
            if not isinstance(v, Record) or v.name != pat.name.split("::")[-1]:
                return False
            for fp in pat.fields:
                if fp.name not in v.fields:
                    return False
                if not self.match_pattern(fp.pattern, SlotPlace(v.fields, fp.name, p.readonly), binds):
                    return False
            return True
        raise TypeMismatch(f"unsupported pattern {type(pat).__name__}")

    # calls

    def coerce(self, v, ty):
        if ty is None:
            return v
        if isinstance(ty, n.TypePath):
            name = ty.name.split("::")[-1]
            alias = self.aliases.get(name)
            if alias is not None:
                mapping = dict(zip(alias.type_params, ty.args))
                return self.coerce(v, _subst(alias.target, mapping))
            if isinstance(v, Int) and v.ty == UNTYPED and name in INT_WIDTHS:
                return Int.make(v.value, name)
            if isinstance(v, Float) and v.ty == UNTYPED and name in FLOAT_TYPES:
                return Float.make(v.value, name)
            if ty.args and isinstance(v, BoxV) and name == "Box":
                v.cell.value = self.coerce(v.cell.value, ty.args[0])
            elif ty.args and isinstance(v, Vector) and name == "Vec":
                v.items[:] = [self.coerce(x, ty.args[0]) for x in v.items]
            return v
        if isinstance(ty, n.TupleType) and isinstance(v, TupleV) and len(ty.items) == len(v.items):
            return TupleV([self.coerce(x, t) for x, t in zip(v.items, ty.items)])
        if isinstance(ty, n.SliceType) and isinstance(v, Vector):
            return Vector([self.coerce(x, ty.elem) for x in v.items])
        return v

    def bind_params(self, params: list, args: list, env: Env, what: str) -> None:
        if len(args) != len(params):
            raise ArityMismatch(f"{what} takes {len(params)} argument(s) but {len(args)} were supplied")
        for p, a in zip(params, args):
            binds: dict = {}
            if not self.match_pattern(p.pattern, Cell(self.coerce(a, p.type)), binds):
                raise NonExhaustiveMatch(f"argument does not match parameter pattern of {what}")
            for k, v in binds.items():
                env.declare(k, v)

    def enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            self.depth = 0
            raise StackOverflow(f"call depth exceeded {MAX_CALL_DEPTH} frames")

    def call_function(self, fn: n.FnDef, args: list, self_value=_NOT_FOUND):
        self.enter()
        try:
            env = Env()
            if fn.self_param is not None:
                if self_value is _NOT_FOUND:
                    if not args:
                        raise ArityMismatch(f"method '{fn.name}' needs a receiver")
                    self_value, args = args[0], args[1:]
                env.declare("self", self_value)
            self.bind_params(fn.params, args, env, f"function '{fn.name}'")
            if fn.body is None:
                raise NoMethodFound(f"'{fn.name}' has no body")
            try:
                result = self.eval(fn.body, env)
            except ReturnSignal as r:
                result = r.value
            return self.coerce(result, fn.ret)
        finally:
            if self.depth > 0:
                self.depth -= 1

    def call_closure(self, c: Closure, args: list):
        self.enter()
        try:
            env = Env(c.env)
            self.bind_params(c.params, args, env, "closure")
            try:
                result = self.eval(c.body, env)
            except ReturnSignal as r:
                result = r.value
            return self.coerce(result, c.ret)
        finally:
            if self.depth > 0:
                self.depth -= 1

    def call_value(self, callee, args: list):
        callee = unwrap(callee)
        if isinstance(callee, Closure):
            return self.call_closure(callee, args)
        if isinstance(callee, FnRef):
            return self.call_named(callee.name, args)
        raise TypeMismatch(f"a value of type {type_name(callee)} is not callable")

    def make_variant(self, name: str, payload: list) -> Variant:
        enum, vdef = self.variants[name]
        types = vdef.payload or []
        if len(payload) != len(types):
            raise ArityMismatch(f"variant {name} takes {len(types)} value(s) but {len(payload)} were supplied")
        return Variant(enum, name, [self.coerce(v, t) for v, t in zip(payload, types)])

    def call_named(self, name: str, args: list):
        segs = name.split("::")
        last = segs[-1]
        if name in self.fns:
            return self.call_function(self.fns[name], args)
        if last in self.variants and (len(segs) == 1 or segs[-2] == self.variants[last][0]):
            return self.make_variant(last, args)
        if name == "range":
            if len(args) != 2:
                raise ArityMismatch("range takes 2 arguments")
            a, b = unwrap(args[0]), unwrap(args[1])
            if not isinstance(a, Int) or not isinstance(b, Int):
                raise TypeMismatch("range bounds must be integers")
            ty = join_types(a.ty, b.ty, "range")
            return RangeIter(Int.make(a.value, ty), Int.make(b.value, ty))
        if last == "sqrt" and (len(segs) == 1 or segs[0] == "std"):
            if len(args) != 1:
                raise ArityMismatch("sqrt takes 1 argument")
            return float_method(unwrap(args[0]), "sqrt", [])
        if len(segs) >= 2:
            owner = segs[-2]
            if owner == "Rc" and last == "new" and len(args) == 1:
                return RcV.new(args[0])
            if owner == "Box" and last == "new" and len(args) == 1:
                return BoxV(Cell(args[0]))
            if owner == "Vec" and last == "new" and not args:
                return Vector([])
            if owner in self.traits and args:
                return self.dispatch_method(Cell(args[0]), last, args[1:])
            m = self.find_method(owner, last)
            if m is not None:
                return self.call_function(m, args)
        raise UnknownIdentifier(f"unknown function '{name}'")

    # methods

    def dispatch_method(self, place: Place, name: str, args: list):
        p = place
        while True:
            v = p.get()
            r = self.builtin_method(v, p, name, args)
            if r is not _NOT_FOUND:
                return r
            m = self.find_method(type_name(v), name)
            if m is not None:
                return self.call_method(m, v, p, args)
            if isinstance(v, POINTERS):
                p = inner_place(v)
                continue
            raise NoMethodFound(f"no method named '{name}' found for type {type_name(v)}")

    def call_method(self, m: n.FnDef, v, p: Place, args: list):
        if m.self_param in ("&self", "&mut self"):
            self_value = Ref(p, m.self_param == "&mut self")
        elif m.self_param is not None:
            self_value = copy_value(v)
        else:
            raise NoMethodFound(f"'{m.name}' is an associated function, not a method")
        return self.call_function(m, args, self_value)

    def values_equal(self, a, b) -> bool:
        r = self.dispatch_method(Cell(a), "eq", [b])
        if not isinstance(r, bool):
            raise TypeMismatch("eq must return a bool")
        return r

    def builtin_method(self, v, p: Place, name: str, args: list):
        if isinstance(v, Ref):
            if name == "deref" and not args:
                return v.place.get()
            return _NOT_FOUND
        if isinstance(v, BoxV):
            if name == "deref" and not args:
                return v.cell.get()
            if name == "clone" and not args:
                return BoxV(Cell(copy_value(v.cell.get())))
            return _NOT_FOUND
        if isinstance(v, RcV):
            if name == "deref" and not args:
                return v.cell.get()
            if name == "clone" and not args:
                return v
            return _NOT_FOUND
        if name == "clone" and not args and not isinstance(v, (Closure, FnRef)):
            return copy_value(v)
        if isinstance(v, bool):
            return bool_method(v, name, [unwrap(a) for a in args])
        if isinstance(v, Int):
            return int_method(v, name, [unwrap(a) for a in args])
        if isinstance(v, Float):
            return float_method(v, name, [unwrap(a) for a in args])
        if isinstance(v, (Char, str)) or v is UNIT:
            return ordered_method(v, name, [unwrap(a) for a in args])
        if isinstance(v, (TupleV, Vector)) and name in ("eq", "ne") and len(args) == 1:
            other = unwrap(args[0])
            same = (type(other) is type(v) and len(other.items) == len(v.items)
                    and all(self.values_equal(x, y) for x, y in zip(v.items, other.items)))
            return same if name == "eq" else not same
        if isinstance(v, Vector):
            return self.vector_method(v, p, name, args)
        if isinstance(v, RangeIter) and name == "next" and not args:
            p.check_writable()
            if v.current.value < v.end.value:
                out = v.current
                v.current = Int.make(out.value + 1, out.ty)
                return self.make_variant("Some", [out])
            return self.make_variant("None", [])
        if isinstance(v, VecIter) and name == "next" and not args:
            p.check_writable()
            if v.index < len(v.vector.items):
                v.index += 1
                return self.make_variant("Some", [copy_value(v.vector.items[v.index - 1])])
            return self.make_variant("None", [])
        return _NOT_FOUND

    def vector_method(self, v: Vector, p: Place, name: str, args: list):
        if name == "len" and not args:
            return Int(len(v.items), "uint")
        if name == "push" and len(args) == 1:
            p.check_writable()
            v.items.append(copy_value(args[0]))
            return UNIT
        if name == "get_mut" and len(args) == 1:
            p.check_writable()
            idx = unwrap(args[0])
            if not isinstance(idx, Int):
                raise TypeMismatch("vector index must be an integer")
            if not 0 <= idx.value < len(v.items):
                raise IndexOutOfBounds(
                    f"index out of bounds: the len is {len(v.items)} but the index is {idx.value}")
            return Ref(SlotPlace(v.items, idx.value, p.readonly), True)
        if name == "iter" and not args:
            return VecIter(v)
        return _NOT_FOUND


def deref_place(p: Place) -> Place:
    while isinstance(p.get(), POINTERS):
        p = inner_place(p.get())
    return p


def _pattern_names(pat) -> list[str]:
    return [x.name for x in n.walk(pat) if isinstance(x, (n.BindPat, n.AtPat))]


def literal_matches(lit: n.Literal, v) -> bool:
    k = lit.kind
    if k in ("int", "byte"):
        return isinstance(v, Int) and v.value == lit.value
    if k == "float":
        return isinstance(v, Float) and v.value == lit.value
    if k == "bool":
        return isinstance(v, bool) and v == lit.value
    if k == "char":
        return isinstance(v, Char) and v.ch == lit.value
    if k == "str":
        return isinstance(v, str) and v == lit.value
    return False


# builtin operator methods on primitives

_CMP = {
    "eq": lambda a, b: a == b, "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b, "gt": lambda a, b: a > b,
    "le": lambda a, b: a <= b, "ge": lambda a, b: a >= b,
}


def _one(name: str, args: list):
    if len(args) != 1:
        raise ArityMismatch(f"'{name}' takes 1 argument but {len(args)} were supplied")
    return args[0]


def int_method(a: Int, name: str, args: list):
    if not args:
        if name == "neg":
            return Int.make(-a.value, a.ty)
        if name == "not":
            return Int.make(~a.value, a.ty)
        if name in ("abs",):
            return Int.make(abs(a.value), a.ty)
    if name in _CMP or name in ("add", "sub", "mul", "div", "rem", "bitand", "bitor", "bitxor", "shl", "shr"):
        b = _one(name, args)
        if not isinstance(b, Int):
            raise TypeMismatch(f"'{name}' between int and {type_name(b)}")
        if name in ("shl", "shr"):
            ty = a.ty
            bits, signed = INT_WIDTHS[ty]
            shift = b.value & (bits - 1)
            if name == "shl":
                return Int.make(a.value << shift, ty)
            if signed:
                return Int.make(a.value >> shift, ty)
            return Int.make((a.value & ((1 << bits) - 1)) >> shift, ty)
        ty = join_types(a.ty, b.ty, name)
        if name in _CMP:
            return _CMP[name](a.value, b.value)
        x, y = a.value, b.value
        if name == "add":
            r = x + y
        elif name == "sub":
            r = x - y
        elif name == "mul":
            r = x * y
        elif name in ("div", "rem"):
            if y == 0:
                raise DivisionByZero("attempt to divide by zero" if name == "div"
                                     else "attempt to calculate the remainder with a divisor of zero")
            r = _int_div(x, y) if name == "div" else _int_rem(x, y)
        elif name == "bitand":
            r = x & y
        elif name == "bitor":
            r = x | y
        else:
            r = x ^ y
        return Int.make(r, ty)
    return _NOT_FOUND


def float_method(a, name: str, args: list):
    if not isinstance(a, Float):
        raise TypeMismatch(f"'{name}' expects a float, found {type_name(a)}")
    if not args:
        if name == "neg":
            return Float.make(-a.value, a.ty)
        if name == "sqrt":
            return Float.make(math.sqrt(a.value) if a.value >= 0 else math.nan, a.ty)
        if name == "abs":
            return Float.make(abs(a.value), a.ty)
    if name in _CMP or name in ("add", "sub", "mul", "div", "rem"):
        b = _one(name, args)
        if not isinstance(b, Float):
            raise TypeMismatch(f"'{name}' between float and {type_name(b)}")
        ty = join_types(a.ty, b.ty, name)
        if name in _CMP:
            return _CMP[name](a.value, b.value)
        x, y = a.value, b.value
        if name == "add":
            r = x + y
        elif name == "sub":
            r = x - y
        elif name == "mul":
            r = x * y
        elif name == "div":
            r = x / y if y != 0 else (math.nan if x == 0 or math.isnan(x) else math.copysign(math.inf, x) *
                                      math.copysign(1.0, y))
        else:
            r = math.fmod(x, y) if y != 0 else math.nan
        return Float.make(r, ty)
    return _NOT_FOUND


def bool_method(a: bool, name: str, args: list):
    if name == "not" and not args:
        return not a
    if name in _CMP or name in ("bitand", "bitor", "bitxor"):
        b = _one(name, args)
        if not isinstance(b, bool):
            raise TypeMismatch(f"'{name}' between bool and {type_name(b)}")
        if name in _CMP:
            return _CMP[name](a, b)
        return {"bitand": a and b, "bitor": a or b, "bitxor": a != b}[name]
    return _NOT_FOUND


def ordered_method(a, name: str, args: list):
    if name == "len" and not args and isinstance(a, str):
        return Int(len(a.encode("utf-8")), "uint")
    if name in _CMP:
        b = _one(name, args)
        if type(b) is not type(a):
            raise TypeMismatch(f"'{name}' between {type_name(a)} and {type_name(b)}")
        if a is UNIT:
            return name in ("eq", "le", "ge")
        x, y = (a.ch, b.ch) if isinstance(a, Char) else (a, b)
        return _CMP[name](x, y)
    return _NOT_FOUND


# formatting

def format_template(template: str, args: list) -> str:
    out = []
    i = 0
    k = 0
    while i < len(template):
        c = template[i]
        if c == "{":
            if template.startswith("{{", i):
                out.append("{")
                i += 2
                continue
            if template.startswith("{}", i):
                if k < len(args):
                    out.append(display(args[k]))
                k += 1
                i += 2
                continue
            raise EvalError(f"unsupported format placeholder at offset {i} (only {{}} is supported)")
        if c == "}":
            if template.startswith("}}", i):
                out.append("}")
                i += 2
                continue
            raise EvalError(f"unmatched '}}' in format string at offset {i}")
        out.append(c)
        i += 1
    if k != len(args):
        raise FormatArityMismatch(f"format string has {k} placeholder(s) but {len(args)} argument(s) were given")
    return "".join(out)


# running

def run_with_big_stack(fn, *args):
    """Run fn on a thread with a large stack and raised recursion limit; re-raise its exception."""
    result: dict = {}

    def target():
        try:
            result["value"] = fn(*args)
        except BaseException as exc:  # noqa: BLE001 - re-raised in the caller
            result["error"] = exc

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, 1_000_000))
    try:
        threading.stack_size(EVAL_STACK_BYTES)
        t = threading.Thread(target=target, name="frs-eval")
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in result:
        raise result["error"]
    return result.get("value")


def run_program(program: n.Program, entry: str = "main") -> tuple[str, int, FrsError | None]:
    """Evaluate ``entry``; returns (stdout, exit status, error or None)."""
    interp = Interpreter(program)

    def go():
        try:
            interp.run(entry)
        except BreakSignal:
            raise EvalError("'break' outside of a loop")
        except ReturnSignal:
            pass

    try:
        run_with_big_stack(go)
    except FrsError as exc:
        return interp.stdout, 1, exc
    except RecursionError:
        return interp.stdout, 1, StackOverflow("evaluation nested too deeply")
    return interp.stdout, 0, None


def eval_source_expr(source: str):
    """Evaluate a single expression with an empty program (handy in tests)."""
    from ..syntax.parser import parse_expr_source
    interp = Interpreter(n.Program([]))
    return interp.eval(parse_expr_source(source), Env())
