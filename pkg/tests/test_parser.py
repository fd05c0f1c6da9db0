import pytest

from frs.errors import ParseError, ParseFailure
from frs.lexer import tokenize
from frs.syntax import nodes as n
from frs.syntax.parser import parse, parse_expr_source, parse_pattern, parse_type
from helpers import ALL_FILES, CORPUS


def lit(v, kind="int", suffix="untyped"):
    return n.Literal(kind, v, suffix)


def expr(src):
    return parse_expr_source(src)


def pat(src):
    return parse_pattern(tokenize(src))


def test_collatz_has_two_functions():
    prog = parse((CORPUS / "collatz_ok.frs").read_text())
    assert [type(i).__name__ for i in prog.items] == ["FnDef", "FnDef"]
    assert [i.name for i in prog.items] == ["collatz", "main"]


def test_empty_main():
    (fn,) = parse("fn main() {}").items
    assert fn.name == "main" and fn.body == n.Block([], None)


def test_peano_impl_block():
    prog = parse((CORPUS / "peano_ok.frs").read_text())
    impl = next(i for i in prog.items if isinstance(i, n.ImplBlock))
    assert impl.trait.name == "PartialEq" and len(impl.methods) == 1
    trait = next(i for i in prog.items if isinstance(i, n.TraitDef))
    assert [m.body is None for m in trait.methods] == [True, False]


@pytest.mark.parametrize("path", ALL_FILES, ids=lambda p: p.name)
def test_corpus_parses(path):
    assert parse(path.read_text()).items


@pytest.mark.parametrize("src,tree", [
    ("3 + 4 * 5", n.BinaryOp("+", lit(3), n.BinaryOp("*", lit(4), lit(5)))),
    ("1 - 2 - 3", n.BinaryOp("-", n.BinaryOp("-", lit(1), lit(2)), lit(3))),
    ("a", n.Path("a")),
    ("[x, ..10]", n.ArrayRepeat(n.Path("x"), lit(10))),
    ("1 << 2 + 3", n.BinaryOp("<<", lit(1), n.BinaryOp("+", lit(2), lit(3)))),
    ("a & b ^ c | d", n.BinaryOp("|", n.BinaryOp("^", n.BinaryOp("&", n.Path("a"), n.Path("b")), n.Path("c")),
                                 n.Path("d"))),
    ("a < b && c || d", n.BinaryOp("||", n.BinaryOp("&&", n.BinaryOp("<", n.Path("a"), n.Path("b")),
                                                    n.Path("c")), n.Path("d"))),
    ("-a * b", n.BinaryOp("*", n.UnaryOp("-", n.Path("a")), n.Path("b"))),
    ("*x + 1", n.BinaryOp("+", n.UnaryOp("*", n.Path("x")), lit(1))),
    ("&mut v", n.UnaryOp("&mut", n.Path("v"))),
    ("box 3i", n.BoxExpr(lit(3, suffix="i"))),
    ("box(GC) 5", n.BoxExpr(lit(5), "GC")),
    ("R{a:30, ..z}", n.RecordExpr("R", [n.FieldInit("a", lit(30))], n.Path("z"))),
    ("(1, 'x')", n.TupleExpr([lit(1), lit("x", "char", None)])),
    ("(1,)", n.TupleExpr([lit(1)])),
    ("(1)", lit(1)),
    ("x = y = 1", n.Assign(n.Path("x"), n.Assign(n.Path("y"), lit(1)))),
    ("v.len()", n.MethodCall(n.Path("v"), "len", [])),
    ("p.x", n.FieldAccess(n.Path("p"), "x")),
    ("t.0", n.FieldAccess(n.Path("t"), "0")),
    ("Rc::new(3)", n.Call(n.Path("Rc::new"), [lit(3)])),
    ("f(1)(2)", n.Call(n.Call(n.Path("f"), [lit(1)]), [lit(2)])),
])
def test_expressions(src, tree):
    assert expr(src) == tree


def test_block_value_rule():
    with_tail = expr("{x;y;z}")
    no_tail = expr("{x;y;}")
    assert with_tail.tail == n.Path("z") and len(with_tail.stmts) == 2
    assert no_tail.tail is None and len(no_tail.stmts) == 2


def test_block_like_statements_need_no_semicolon():
    block = expr("{ if a { 1 } else { 2 } match b { _ => 3 } loop { break; } x }")
    assert len(block.stmts) == 3 and block.tail == n.Path("x")


def test_comparisons_do_not_chain():
    with pytest.raises(ParseError):
        expr("a < b < c")


def test_match_arms_and_guards():
    m = expr("match x { 0 => 1, n if n < 10 => 3, t @ 2 => t + 1, _ => { 4 } }")
    assert [type(a.pattern).__name__ for a in m.arms] == ["LitPat", "BindPat", "AtPat", "WildcardPat"]
    assert m.arms[1].guard == n.BinaryOp("<", n.Path("n"), lit(10))
    assert m.arms[0].guard is None


def test_no_struct_literal_in_condition():
    e = expr("if x { y } else { z }")
    assert e.cond == n.Path("x") and e.then.tail == n.Path("y")


def test_lambda_with_annotations():
    e = expr("|x: int, y| -> int { x + y }")
    assert e.params[0].type == n.TypePath("int") and e.params[1].type is None
    assert e.ret == n.TypePath("int")


@pytest.mark.parametrize("src,tree", [
    ("&Succ(ref a)", n.RefPat(n.VariantPat("Succ", [n.BindPat("a", by_ref=True)]))),
    ("_", n.WildcardPat()),
    ("t @ 2", n.AtPat("t", n.LitPat(lit(2)))),
    ("(a, mut b)", n.TuplePat([n.BindPat("a"), n.BindPat("b", mutable=True)])),
    ("Point { x, y: 0, .. }", n.RecordPat("Point", [n.FieldPat("x", n.BindPat("x")),
                                                     n.FieldPat("y", n.LitPat(lit(0)))], True)),
    ("1 | 2", n.OrPat([n.LitPat(lit(1)), n.LitPat(lit(2))])),
    ("-1", n.LitPat(lit(-1))),
])
def test_patterns(src, tree):
    assert pat(src) == tree


@pytest.mark.parametrize("src,tree", [
    ("int", n.TypePath("int")),
    ("&mut Vec<int>", n.RefType(True, n.TypePath("Vec", [n.TypePath("int")]))),
    ("Box<Lst<t>>", n.TypePath("Box", [n.TypePath("Lst", [n.TypePath("t")])])),
    ("(int, char)", n.TupleType([n.TypePath("int"), n.TypePath("char")])),
    ("|int,int|->int", n.FnType([n.TypePath("int"), n.TypePath("int")], n.TypePath("int"))),
])
def test_types(src, tree):
    assert parse_type(tokenize(src)) == tree


def test_items():
    prog = parse("""
        struct P { x: int, y: int }
        struct U;
        enum E<T> { A, B(T, Box<E<T>>) }
        type Pair<T> = (T, T);
        use std::rc::Rc;
        macro_rules! m ( ($a:expr) => ($a) );
        fn f<T>(&self, a: &mut int) -> int { 1 }
    """)
    kinds = [type(i).__name__ for i in prog.items]
    assert kinds == ["StructDef", "StructDef", "EnumDef", "TypeAlias", "UseDecl", "MacroDef", "FnDef"]
    assert prog.items[1].fields is None
    assert prog.items[2].variants[1].payload[1] == n.TypePath("Box", [n.TypePath("E", [n.TypePath("T")])])
    assert prog.items[6].self_param == "&self" and prog.items[6].type_params == ["T"]


def test_macro_call_keeps_raw_tokens():
    call = expr("foo!(a + 1, b)")
    assert isinstance(call, n.MacroCall)
    assert [t.text for t in call.tokens] == ["a", "+", "1", ",", "b"]


def test_errors_recover_at_next_item():
    with pytest.raises(ParseFailure) as info:
        parse("fn a( {}\nfn b() { let = 1; }\nfn c() {}")
    errs = info.value.errors
    assert len(errs) == 2
    assert [e.span.start_line for e in errs] == [1, 2]


def test_error_reports_expected_and_found():
    with pytest.raises(ParseFailure) as info:
        parse("fn main() { let x = ; }")
    (err,) = info.value.errors
    assert "found ';'" in str(err)
    assert (err.span.start_line, err.span.start_col) == (1, 21)
