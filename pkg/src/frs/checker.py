"""Ownership and mutability analysis over the expanded, pre-desugar tree.

Bindings carry a syntactic kind: ``box`` (unique, moves), ``rc`` (shared,
copies), ``ref``/``refmut`` (references) or ``value`` (everything else,
copies).  Borrows taken by ``let r = &mut x`` last until the end of the
block declaring ``r``; borrows inside expressions are temporary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NO_SPAN, Diagnostic, SourceSpan
from .syntax import nodes as n

BOX, RC, REF, REFMUT, VALUE = "box", "rc", "ref", "refmut", "value"
ARITHMETIC_OPS = ("+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>")
MUTATING_BUILTIN_METHODS = ("push", "get_mut")
NON_MOVING_MACROS = ("println", "print", "format")
PRELUDE_VARIANTS = ("None", "Some")

E_IMMUT_ASSIGN = "E-IMMUT-ASSIGN"
E_BORROWED_USE = "E-BORROWED-USE"
E_MOVED_USE = "E-MOVED-USE"
E_MUTREF_IMMUT = "E-MUTREF-IMMUT"
E_ALIAS = "E-ALIAS"
E_REF_MISMATCH = "E-REF-MISMATCH"
E_REF_OPERAND = "E-REF-OPERAND"
W_GC_BOX = "W-GC-BOX"


@dataclass(eq=False)
class BindingState:
    name: str
    declared_mutable: bool
    kind: str = VALUE
    span: SourceSpan = NO_SPAN
    moved_at: SourceSpan | None = None
    borrowed_by: str | None = None  # name of the `&mut` reference holding it
    borrow_span: SourceSpan | None = None
    shared: int = 0

    @property
    def is_box(self) -> bool:
        return self.kind == BOX

    @property
    def state(self) -> str:
        if self.moved_at is not None:
            return "MovedOut"
        if self.borrowed_by is not None:
            return "MutablyBorrowed"
        if self.shared:
            return "SharedBorrowed"
        return "Live"


@dataclass
class _Scope:
    names: dict = field(default_factory=dict)
    releases: list = field(default_factory=list)  # (binding, mutable)


def _kind_of_type(ty) -> str:
    if isinstance(ty, n.RefType):
        return REFMUT if ty.mutable else REF
    if isinstance(ty, n.TypePath):
        last = ty.name.split("::")[-1]
        if last == "Box":
            return BOX
        if last == "Rc":
            return RC
    return VALUE


def place_root(e):
    """The binding name at the base of a place expression, or None."""
    while True:
        if isinstance(e, n.Path):
            return e.name if "::" not in e.name else None
        if isinstance(e, n.UnaryOp) and e.op == "*":
            e = e.operand
        elif isinstance(e, (n.FieldAccess, n.Index)):
            e = e.base
        else:
            return None


class Checker:
    def __init__(self, program: n.Program):
        self.diags: list[Diagnostic] = []
        self._seen: set = set()
        self.scopes: list[_Scope] = []
        self.fn_params: dict[str, list] = {}
        self.mut_methods: set[str] = set(MUTATING_BUILTIN_METHODS)
        self.variants: set[str] = set(PRELUDE_VARIANTS)
        for item in program.items:
            if isinstance(item, n.FnDef):
                self.fn_params[item.name] = [p.type for p in item.params]
            elif isinstance(item, n.EnumDef):
                self.variants.update(v.name for v in item.variants)
            elif isinstance(item, n.StructDef) and item.fields is None:
                self.variants.add(item.name)
            elif isinstance(item, (n.ImplBlock, n.TraitDef)):
                for m in item.methods:
                    if m.self_param == "&mut self":
                        self.mut_methods.add(m.name)

    # reporting

    def report(self, code: str, message: str, span, note: str | None = None,
               note_span=None, severity: str = "error") -> None:
        span = span or NO_SPAN
        key = (code, span, message)
        if key in self._seen:
            return
        self._seen.add(key)
        self.diags.append(Diagnostic(severity, code, message, span, note, note_span))

    # scopes

    def push(self) -> None:
        self.scopes.append(_Scope())

    def pop(self) -> None:
        scope = self.scopes.pop()
        for b, mutable in scope.releases:
            if mutable:
                b.borrowed_by = None
                b.borrow_span = None
            else:
                b.shared = max(0, b.shared - 1)

    def lookup(self, name: str) -> BindingState | None:
        for scope in reversed(self.scopes):
            if name in scope.names:
                return scope.names[name]
        return None

    def declare(self, name: str, mutable: bool, kind: str, span) -> BindingState:
        b = BindingState(name, mutable, kind, span or NO_SPAN)
        self.scopes[-1].names[name] = b
        return b

    def all_bindings(self) -> list[BindingState]:
        return [b for s in self.scopes for b in s.names.values()]

    def snapshot(self) -> dict:
        return {b: b.moved_at for b in self.all_bindings()}

    def restore(self, snap: dict) -> None:
        for b, moved in snap.items():
            b.moved_at = moved

    def merge(self, outcomes: list[dict]) -> None:
        for snap in outcomes:
            for b, moved in snap.items():
                if moved is not None and b.moved_at is None:
                    b.moved_at = moved

    # uses

    def use(self, name: str, span, move: bool = False) -> BindingState | None:
        b = self.lookup(name)
        if b is None:
            return None
        if b.moved_at is not None:
            self.report(E_MOVED_USE, f"use of moved value '{name}'", span,
                        "value moved here", b.moved_at)
        elif b.borrowed_by is not None:
            self.report(E_BORROWED_USE, f"cannot use '{name}' while it is mutably borrowed by '{b.borrowed_by}'",
                        span, "borrow taken here", b.borrow_span)
        elif move and b.kind == BOX:
            b.moved_at = span
        return b

    # patterns

    def bind_pattern(self, pat, kind: str = VALUE, span=None) -> None:
        if isinstance(pat, n.BindPat):
            if pat.name in self.variants and not pat.mutable and not pat.by_ref:
                return
            k = (REFMUT if pat.mutable else REF) if pat.by_ref else kind
            self.declare(pat.name, pat.mutable and not pat.by_ref, k, pat.span or span)
        elif isinstance(pat, n.AtPat):
            self.declare(pat.name, False, kind, pat.span or span)
            self.bind_pattern(pat.sub, VALUE, span)
        elif isinstance(pat, (n.TuplePat, n.VariantPat)):
            for p in pat.items:
                self.bind_pattern(p, VALUE, span)
        elif isinstance(pat, n.RecordPat):
            for fp in pat.fields:
                self.bind_pattern(fp.pattern, VALUE, span)
        elif isinstance(pat, n.RefPat):
            self.bind_pattern(pat.sub, VALUE, span)
        elif isinstance(pat, n.OrPat) and pat.alts:
            self.bind_pattern(pat.alts[0], kind, span)

    def kind_of_init(self, init) -> str:
        if isinstance(init, n.BoxExpr):
            return BOX
        if isinstance(init, n.UnaryOp) and init.op in ("&", "&mut"):
            return REFMUT if init.op == "&mut" else REF
        if isinstance(init, n.Call) and isinstance(init.func, n.Path):
            tail = init.func.name.split("::")
            if tail[-2:] == ["Rc", "new"]:
                return RC
            if tail[-2:] == ["Box", "new"]:
                return BOX
        if isinstance(init, n.MethodCall) and init.method == "clone":
            return self.kind_of_init(init.receiver)
        if isinstance(init, n.Path):
            b = self.lookup(init.name)
            if b is not None:
                return b.kind
        return VALUE

    # functions

    def check_fn(self, fn: n.FnDef) -> None:
        if fn.body is None:
            return
        self.push()
        if fn.self_param is not None:
            kind = {"&self": REF, "&mut self": REFMUT}.get(fn.self_param, VALUE)
            self.declare("self", fn.self_param == "mut self", kind, fn.span)
        for p in fn.params:
            self.bind_pattern(p.pattern, _kind_of_type(p.type), p.span)
        self.expr(fn.body)
        self.pop()

    # statements

    def block(self, blk: n.Block) -> None:
        self.push()
        for s in blk.stmts:
            self.stmt(s)
        if blk.tail is not None:
            self.expr(blk.tail, move=True)
        self.pop()

    def stmt(self, s) -> None:
        if isinstance(s, n.Let):
            self.let(s)
        elif isinstance(s, n.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, n.Node):
            self.expr(s)

    def let(self, s: n.Let) -> None:
        if s.init is not None:
            self.expr(s.init, move=True)
        kind = _kind_of_type(s.type) if s.type is not None else VALUE
        if kind == VALUE and s.init is not None:
            kind = self.kind_of_init(s.init)
        if isinstance(s.pattern, n.TuplePat) and isinstance(s.init, n.TupleExpr) \
                and len(s.pattern.items) == len(s.init.items):
            for p, e in zip(s.pattern.items, s.init.items):
                self.bind_pattern(p, self.kind_of_init(e), s.span)
        else:
            self.bind_pattern(s.pattern, kind, s.span)
        # a reference held by a binding keeps its borrow until the enclosing block ends
        if isinstance(s.init, n.UnaryOp) and s.init.op in ("&", "&mut") and isinstance(s.pattern, n.BindPat):
            root = place_root(s.init.operand)
            target = self.lookup(root) if root else None
            if target is not None and root != s.pattern.name:
                if s.init.op == "&mut":
                    target.borrowed_by = s.pattern.name
                    target.borrow_span = s.init.span
                    self.scopes[-1].releases.append((target, True))
                else:
                    target.shared += 1
                    self.scopes[-1].releases.append((target, False))

    # expressions

    def exprs(self, items, move: bool) -> None:
        for e in items:
            self.expr(e, move=move)

    def expr(self, e, move: bool = False) -> None:
        if e is None or not isinstance(e, n.Node):
            return
        meth = getattr(self, "x_" + type(e).__name__, None)
        if meth is not None:
            meth(e, move)
        else:
            for c in n.children(e):
                if isinstance(c, n.Node):
                    self.expr(c)

    def x_Literal(self, e, move):
        pass

    def x_Path(self, e: n.Path, move):
        if "::" not in e.name:
            self.use(e.name, e.span, move)

    def x_Block(self, e, move):
        self.block(e)

    def x_UnaryOp(self, e: n.UnaryOp, move):
        if e.op in ("&", "&mut"):
            self.check_borrow(e)
        else:
            self.expr(e.operand)

    def x_BinaryOp(self, e: n.BinaryOp, move):
        self.expr(e.lhs)
        self.expr(e.rhs)
        if e.op in ARITHMETIC_OPS:
            for side in (e.lhs, e.rhs):
                if isinstance(side, n.Path):
                    b = self.lookup(side.name)
                    if b is not None and b.kind in (REF, REFMUT):
                        self.report(E_REF_OPERAND,
                                    f"'{e.op}' cannot be applied to the reference '{side.name}'; "
                                    f"dereference it with '*{side.name}'", side.span)

    def x_Assign(self, e: n.Assign, move):
        self.expr(e.value, move=True)
        self.check_assignment(e.place, e.span)

    def x_CompoundAssign(self, e: n.CompoundAssign, move):
        self.expr(e.value)
        self.check_assignment(e.place, e.span, compound=True)

    def x_Call(self, e: n.Call, move):
        self.expr(e.func)
        self.exprs(e.args, move=True)
        if isinstance(e.func, n.Path) and e.func.name in self.fn_params \
                and self.lookup(e.func.name) is None:
            for ty, arg in zip(self.fn_params[e.func.name], e.args):
                if isinstance(ty, n.RefType) and ty.mutable and not self.is_mut_ref(arg):
                    self.report(E_REF_MISMATCH,
                                f"'{e.func.name}' expects a mutable reference (&mut) here", arg.span)

    def is_mut_ref(self, arg) -> bool:
        if isinstance(arg, n.UnaryOp) and arg.op == "&mut":
            return True
        if isinstance(arg, n.Path):
            b = self.lookup(arg.name)
            return b is None or b.kind == REFMUT
        return not (isinstance(arg, n.UnaryOp) and arg.op == "&") and not isinstance(arg, n.Literal)

    def x_MethodCall(self, e: n.MethodCall, move):
        self.expr(e.receiver)
        if e.method in self.mut_methods:
            root = place_root(e.receiver)
            b = self.lookup(root) if root else None
            if b is not None and b.kind != REFMUT:
                if b.kind in (REF, RC) or not b.declared_mutable:
                    self.report(E_MUTREF_IMMUT,
                                f"cannot borrow '{root}' as mutable for '.{e.method}()': "
                                f"'{root}' is not declared mutable", e.receiver.span)
        self.exprs(e.args, move=True)

    def x_FieldAccess(self, e, move):
        self.expr(e.base)

    def x_Index(self, e, move):
        self.expr(e.base)
        self.expr(e.index)

    def x_RecordExpr(self, e: n.RecordExpr, move):
        for f in e.fields:
            self.expr(f.value, move=True)
        self.expr(e.base)

    def x_TupleExpr(self, e, move):
        self.exprs(e.items, move=True)

    def x_ArrayExpr(self, e, move):
        self.exprs(e.items, move=True)

    def x_BoxExpr(self, e: n.BoxExpr, move):
        if e.allocator == "GC":
            self.report(W_GC_BOX, "box(GC) is treated as a uniquely owned box", e.span, severity="warning")
        self.expr(e.operand, move=True)

    def x_BuiltinMacro(self, e: n.BuiltinMacro, move):
        self.exprs(e.args, move=e.name not in NON_MOVING_MACROS)

    def x_Return(self, e, move):
        self.expr(e.value, move=True)

    def x_Lambda(self, e: n.Lambda, move):
        self.push()
        for p in e.params:
            self.bind_pattern(p.pattern, _kind_of_type(p.type), p.span)
        self.expr(e.body, move=True)
        self.pop()

    def x_If(self, e: n.If, move):
        self.expr(e.cond)
        before = self.snapshot()
        self.expr(e.then, move)
        after_then = self.snapshot()
        self.restore(before)
        self.expr(e.else_, move)
        self.merge([after_then])

    def x_Match(self, e: n.Match, move):
        self.expr(e.scrutinee)
        # a bare binding arm takes the scrutinee's kind (`match &mut it { v => ... }`)
        kind = self.kind_of_init(e.scrutinee)
        before = self.snapshot()
        outcomes = []
        for arm in e.arms:
            self.restore(before)
            self.push()
            self.bind_pattern(arm.pattern, kind if isinstance(arm.pattern, n.BindPat) else VALUE, arm.span)
            self.expr(arm.guard)
            self.expr(arm.body, move)
            self.pop()
            outcomes.append(self.snapshot())
        self.restore(before)
        self.merge(outcomes)

    def _twice(self, fn) -> None:
        fn()
        fn()

    def x_Loop(self, e: n.Loop, move):
        self._twice(lambda: self.expr(e.body))

    def x_While(self, e: n.While, move):
        def once():
            self.expr(e.cond)
            self.expr(e.body)
        self._twice(once)

    def x_ForLoop(self, e: n.ForLoop, move):
        self.expr(e.iterable)

        def once():
            self.push()
            self.bind_pattern(e.pattern, VALUE, e.span)
            self.expr(e.body)
            self.pop()
        self._twice(once)

    # borrows and assignment

    def check_borrow(self, e: n.UnaryOp) -> None:
        operand = e.operand
        root = place_root(operand)
        b = self.lookup(root) if root else None
        if b is None:
            self.expr(operand)
            return
        self._place_subexprs(operand)
        if b.moved_at is not None:
            self.report(E_MOVED_USE, f"borrow of moved value '{root}'", operand.span, "value moved here",
                        b.moved_at)
            return
        if b.borrowed_by is not None:
            self.report(E_BORROWED_USE,
                        f"cannot borrow '{root}' while it is mutably borrowed by '{b.borrowed_by}'",
                        operand.span, "borrow taken here", b.borrow_span)
            return
        if e.op == "&mut":
            through_ref = not isinstance(operand, n.Path) and b.kind == REFMUT
            if not b.declared_mutable and not through_ref:
                self.report(E_MUTREF_IMMUT,
                            f"cannot borrow '{root}' as mutable: '{root}' is not declared mutable",
                            operand.span)
            elif b.shared:
                self.report(E_ALIAS, f"cannot borrow '{root}' as mutable while it is also borrowed as shared",
                            operand.span)

    def _place_subexprs(self, place) -> None:
        while True:
            if isinstance(place, n.Index):
                self.expr(place.index)
                place = place.base
            elif isinstance(place, n.FieldAccess):
                place = place.base
            elif isinstance(place, n.UnaryOp) and place.op == "*":
                place = place.operand
            else:
                return

    def check_assignment(self, place, span, compound: bool = False) -> None:
        if isinstance(place, n.Path):
            b = self.lookup(place.name)
            if b is None:
                return
            if b.borrowed_by is not None:
                self.report(E_BORROWED_USE,
                            f"cannot assign to '{place.name}' while it is mutably borrowed by '{b.borrowed_by}'",
                            place.span, "borrow taken here", b.borrow_span)
            elif not b.declared_mutable:
                what = "a reference binding" if b.kind in (REF, REFMUT) else "an immutable binding"
                self.report(E_IMMUT_ASSIGN, f"cannot assign twice to '{place.name}', {what} not declared mut",
                            place.span, "declared here", b.span)
            elif compound and b.moved_at is not None:
                self.use(place.name, place.span)
            else:
                b.moved_at = None
            return
        if isinstance(place, n.UnaryOp) and place.op == "*" and not isinstance(place.operand, n.Path):
            self.expr(place.operand)
            return
        root = place_root(place)
        b = self.lookup(root) if root else None
        if b is None:
            self.expr(place)
            return
        self._place_subexprs(place)
        if b.moved_at is not None:
            self.report(E_MOVED_USE, f"assignment through moved value '{root}'", place.span,
                        "value moved here", b.moved_at)
        elif b.borrowed_by is not None:
            self.report(E_BORROWED_USE,
                        f"cannot assign through '{root}' while it is mutably borrowed by '{b.borrowed_by}'",
                        place.span, "borrow taken here", b.borrow_span)
        elif b.kind == REFMUT:
            return
        elif b.kind == REF:
            self.report(E_IMMUT_ASSIGN, f"cannot assign through '{root}', which is a shared (&) reference",
                        place.span)
        elif b.kind == RC:
            self.report(E_IMMUT_ASSIGN, f"cannot assign through '{root}': Rc contents are immutable",
                        place.span)
        elif not b.declared_mutable:
            self.report(E_IMMUT_ASSIGN, f"cannot assign through '{root}': '{root}' is not declared mutable",
                        place.span, "declared here", b.span)


def check_program(p: n.Program) -> list[Diagnostic]:
    """Check every function, method and default method body; diagnostics sorted by position."""
    c = Checker(p)
    for item in p.items:
        if isinstance(item, n.FnDef):
            c.check_fn(item)
        elif isinstance(item, (n.ImplBlock, n.TraitDef)):
            for m in item.methods:
                c.check_fn(m)
    return sorted(c.diags, key=Diagnostic.sort_key)


def check_assignment(place, checker: Checker) -> list[Diagnostic]:
    before = len(checker.diags)
    checker.check_assignment(place, place.span)
    return checker.diags[before:]


def check_borrow(expr: n.UnaryOp, checker: Checker) -> list[Diagnostic]:
    before = len(checker.diags)
    checker.check_borrow(expr)
    return checker.diags[before:]


def check_moves(expr, checker: Checker) -> list[Diagnostic]:
    before = len(checker.diags)
    checker.expr(expr, move=True)
    return checker.diags[before:]


def errors_only(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]
