import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frs.errors import (AmbiguousMethod, ArityMismatch, DivisionByZero, FormatArityMismatch, IndexOutOfBounds,
                        NoMethodFound, NonExhaustiveMatch, SharedMutation, StackOverflow, UnknownIdentifier)
from frs.interp import UNIT, display, format_template
from frs.interp.machine import eval_source_expr
from frs.interp.values import Float, Int, Record, Vector, format_float, wrap_int
from helpers import CORPUS, OK_FILES, main_of, run


def out(body: str, items: str = "") -> str:
    return run(items + main_of(body))


def show(expr: str, items: str = "") -> str:
    return out(f'println!("{{}}", {expr});', items).rstrip("\n")


@pytest.mark.parametrize("path", OK_FILES, ids=lambda p: p.name)
def test_corpus_golden_output(path):
    expected = path.with_suffix(".out").read_text()
    assert run(path.read_text(), checked=True) == expected


def test_collatz_lines():
    got = run((CORPUS / "collatz_ok.frs").read_text()).split()
    assert got == "76 38 19 58 29 88 44 22 11 34 17 52 26 13 40 20 10 5 16 8 4 2 1".split()


def test_empty_main():
    assert run("fn main() {}") == ""


@pytest.mark.parametrize("expr,want", [
    ("{1; 2; 3}", "3"),
    ("{1; 2;}", "()"),
    ("()", "()"),
    ("if false { 1 }", "()"),
    ("match 2 { 0 | 1 => 1, t @ 2 => t + 1, n if n < 10 => 3, _ => 4 }", "3"),
    ("match 5 { 0 | 1 => 1, t @ 2 => t + 1, n if n < 10 => 3, _ => 4 }", "3"),
    ("match 50 { 0 | 1 => 1, t @ 2 => t + 1, n if n < 10 => 3, _ => 4 }", "4"),
    ("match 7 { _ => 42 }", "42"),
    ("3.add(4)", "7"),
    ("7 / 2", "3"),
    ("-7 / 2", "-3"),
    ("-7 % 2", "-1"),
    ("1.5 * 2.0", "3"),
    ("1.0 / 3.0", "0.3333333333333333"),
    ("1.0f32 / 3.0f32", "0.33333334"),
    ("2.0f64.sqrt()", "1.4142135623730951"),
    ("(1, 'x', \"s\")", "(1, x, s)"),
    ("(1,)", "(1,)"),
    ("[1, 2, 3]", "[1, 2, 3]"),
    ("[0u8, ..3]", "[0, 0, 0]"),
    ("vec!(1, 2).len()", "2"),
    ("box 5", "5"),
    ("box(GC) 5", "5"),
    ("Rc::new(3)", "3"),
    ("*&4", "4"),
    ("true && !false", "true"),
    ("'a' < 'b'", "true"),
    ("\"ab\" == \"ab\"", "true"),
    ("(1, 2) == (1, 2)", "true"),
    ("vec!(1, 2) != vec!(1, 3)", "true"),
    ("255u8 + 1", "0"),
    ("127i8 + 1", "-128"),
    ("0u32 - 1", "4294967295"),
    ("1i64 << 63", "-9223372036854775808"),
    ("b'a'", "97"),
    ("format!(\"{}-{}\", 1, 2)", "1-2"),
])
def test_expressions(expr, want):
    assert show(expr) == want


def test_record_update_and_display():
    items = "struct R { a: int, b: int }\n"
    assert out('let z = R{a:10, b:20}; let w = R{a:30, ..z}; println!("{}", w);', items) == "R { a: 30, b: 20 }\n"


def test_option_matching():
    assert show("match None { None => false, Some(_) => true }") == "false"
    assert show("match Some(3) { None => 0, Some(x) => x * 2 }") == "6"


def test_peano_dispatch():
    peano = (CORPUS / "peano_ok.frs").read_text().split("fn main()")[0]
    assert show("Succ(box Zero).eq(&Succ(box Zero))", peano) == "true"
    assert show("Succ(box Zero).ne(&Succ(box Zero))", peano) == "false"


def test_testable_dispatch():
    testable = (CORPUS / "testable_ok.frs").read_text().split("fn main()")[0]
    assert show("0.test()", testable) == "false"


def test_inherent_methods_shadow_trait_methods():
    items = """
struct S { v: int }
trait T { fn get(&self) -> int { 1 } }
impl T for S {}
impl S { fn get(&self) -> int { self.v } }
"""
    assert show("S { v: 9 }.get()", items) == "9"


def test_trait_default_used_when_impl_omits_method():
    items = """
struct S;
trait T { fn name(&self) -> int { 7 } fn twice(&self) -> int { self.name() * 2 } }
impl T for S { fn name(&self) -> int { 5 } }
"""
    assert show("S.twice()", items) == "10"


def test_ambiguous_trait_methods():
    items = """
struct S;
trait A { fn m(&self) -> int { 1 } }
trait B { fn m(&self) -> int { 2 } }
impl A for S {}
impl B for S {}
"""
    with pytest.raises(AmbiguousMethod):
        show("S.m()", items)


def test_user_iterator_drives_for_loop():
    items = """
struct Count { n: int }
impl Count {
    fn next(&mut self) -> Option<int> {
        if self.n == 0 { None } else { self.n -= 1; Some(self.n) }
    }
}
"""
    assert out('let c = Count { n: 2 }; for x in c { println!("{}", x); }', items) == "1\n0\n"


def test_ranges_are_half_open():
    assert out('for i in range(0, 3) { print!("{} ", i); }') == "0 1 2 "
    assert out('for i in range(5, 5) { print!("{} ", i); }') == ""


def test_closures_capture_environment():
    assert out('let k = 10; let f = |x: int| x + k; println!("{}", f(5));') == "15\n"
    items = "fn apply(f: |int|->int, v: int) -> int { f(v) }\n"
    assert out('println!("{}", apply(|x| x * x, 7));', items) == "49\n"


def test_mutation_through_mut_ref_is_observed():
    assert out('let mut a = 1; { let ra = &mut a; *ra = 3; } println!("{}", a);') == "3\n"


def test_vector_mutation():
    assert out('let mut w = box vec!(1, 2, 3); *w.get_mut(0) = 42; w[1] = 7; println!("{}", w);') == "[42, 7, 3]\n"


def test_deep_recursion_and_overflow():
    items = "fn down(n: int) -> int { if n == 0 { 0 } else { 1 + down(n - 1) } }\n"
    assert show("down(5000)", items) == "5000"
    with pytest.raises(StackOverflow):
        show("down(100000)", items)


@pytest.mark.parametrize("body,err", [
    ('let v = vec!(1); println!("{}", v[1]);', IndexOutOfBounds),
    ('println!("{}", 1 / 0);', DivisionByZero),
    ('println!("{}", ().frob());', NoMethodFound),
    ('let x = match 3 { 1 => 1 };', NonExhaustiveMatch),
    ('println!("{}", nothing);', UnknownIdentifier),
    ('println!("{} {}", 1);', FormatArityMismatch),
    ('println!("{}", 1, 2);', FormatArityMismatch),
    ('let r = Rc::new(vec!(1)); r[0] = 2;', SharedMutation),
])
def test_runtime_errors(body, err):
    with pytest.raises(err):
        out(body)


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        out("f(1, 2);", "fn f(a: int) {}\n")


def test_format_template():
    assert format_template("{} and {{}}", [Int(1)]) == "1 and {}"
    assert format_template("no placeholders", []) == "no placeholders"
    with pytest.raises(FormatArityMismatch):
        format_template("{}", [])


def test_display_values():
    assert display(UNIT) == "()"
    assert display(Record("P", {"x": Int(1)})) == "P { x: 1 }"
    assert display(Vector([Int(2), Int(4), Int(5)])) == "[2, 4, 5]"
    assert format_float(1e21, "f64") == "1000000000000000000000"
    assert format_float(float("inf"), "f64") == "inf"
    assert eval_source_expr("2 + 3") == Int(5)


# properties

WIDTHS = ["i8", "i16", "i32", "i64", "u8", "u16", "u32", "u64"]


def wrap_oracle(v: int, ty: str) -> int:
    bits = int(ty[1:])
    v %= 1 << bits
    if ty[0] == "i" and v >= 1 << (bits - 1):
        v -= 1 << bits
    return v


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(WIDTHS), st.integers(0, 300), st.integers(0, 300), st.sampled_from(["+", "-", "*"]))
def test_wraparound_for_every_width(ty, a, b, op):
    got = int(show(f"{a}{ty} {op} {b}{ty}"))
    x, y = wrap_oracle(a, ty), wrap_oracle(b, ty)
    assert got == wrap_oracle({"+": x + y, "-": x - y, "*": x * y}[op], ty)
    assert wrap_int(got, ty) == got


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-100, 100), min_size=0, max_size=6), st.integers(0, 12))
def test_bound_check(items, i):
    vec = "vec!(" + ", ".join(map(str, items)) + ")"
    if i < len(items):
        assert show(f"{vec}[{i}]") == str(items[i])
    else:
        with pytest.raises(IndexOutOfBounds):
            show(f"{vec}[{i}]")


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.sampled_from("abcde"), st.integers(-9, 9), min_size=1),
       st.dictionaries(st.sampled_from("abcde"), st.integers(-9, 9)))
def test_functional_update_preserves_unlisted_fields(base, update):
    fields = sorted(base)
    update = {k: v for k, v in update.items() if k in base}
    items = "struct R { " + ", ".join(f"{f}: int" for f in fields) + " }\n"
    init = ", ".join(f"{f}: {base[f]}" for f in fields)
    upd = "".join(f"{f}: {v}, " for f, v in update.items())
    body = f"let z = R {{ {init} }}; let w = R {{ {upd}..z }}; " + \
        'println!("{}", (' + ", ".join(f"w.{f}" for f in fields) + ',));'
    got = out(body, items).strip()
    vals = [str(update.get(f, base[f])) for f in fields]
    want = f"({vals[0]},)" if len(vals) == 1 else "(" + ", ".join(vals) + ")"
    assert got == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4))
def test_default_ne_is_not_eq(i, j):
    peano = (CORPUS / "peano_ok.frs").read_text().split("fn main()")[0]
    mk = lambda k: "Succ(box " * k + "Zero" + ")" * k
    got = out(f'let a = {mk(i)}; let b = {mk(j)}; println!("{{}} {{}}", a == b, a != b);', peano).split()
    assert got == [str(i == j).lower(), str(i != j).lower()]


@given(st.integers(-50, 50))
def test_shared_ref_contents_never_change(v):
    items = "struct P { x: int }\n"
    with pytest.raises(SharedMutation):
        out(f"let r = Rc::new(P {{ x: {v} }}); r.x = {v + 1};", items)
    assert out(f'let r = Rc::new(P {{ x: {v} }}); let s = r; println!("{{}} {{}}", r.x, s.x);', items) == \
        f"{v} {v}\n"


@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_float_display_round_trips(x):
    assert float(format_float(x, "f64")) == x
    assert Float.make(x, "f64").value == x
