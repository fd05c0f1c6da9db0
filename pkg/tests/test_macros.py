import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frs.errors import (MacroDefinitionError, NoRuleMatched, ParseFailure, RecursionLimitExceeded,
                        RepetitionCountMismatch, UnboundFragment, UnknownMacro)
from frs.lexer import tokenize
from frs.macros import (DEFAULT_DEPTH_LIMIT, Expander, collect_macros, contains_invocations, default_depth_limit,
                        expand_all, match_rule, transcribe)
from frs.syntax import nodes as n
from frs.syntax.parser import parse
from frs.syntax.printer import pretty_print
from frs.syntax.treeio import dump_tree
from helpers import CORPUS, main_of, run

PFOR_PATTERN = tokenize("$x:ident = $s:expr to $e:expr $body:expr")
PRINTALL_PATTERN = tokenize("$( $arg:expr ),*")
PRINTALL_TEMPLATE = tokenize('$( println!("{}", $arg) );*')
PFOR_STEP = (CORPUS / "pfor_step_ok.frs").read_text().split("// Example use:")[0]


def texts(tokens):
    return [t.text for t in tokens]


def test_pfor_bindings():
    b = match_rule(PFOR_PATTERN, tokenize('i = 0 to 10 {println!("{}", i);}'))
    assert b.texts("x") == "i" and b.texts("s") == "0" and b.texts("e") == "10"
    assert b["body"].tokens[0].text == "{" and b["body"].tokens[-1].text == "}"


def test_expr_capture_stops_at_literal_word():
    b = match_rule(tokenize("$s:expr to $e:expr step $st:expr"), tokenize("a + 1 to f(b) * 2 step -1"))
    assert (b.texts("s"), b.texts("e"), b.texts("st")) == ("a + 1", "f ( b ) * 2", "- 1")


def test_printall_captures():
    b = match_rule(PRINTALL_PATTERN, tokenize('"hello", 42, 3.14'))
    assert [c.tokens[0].payload for c in b["arg"]] == ["hello", 42, 3.14]
    assert match_rule(PRINTALL_PATTERN, [])["arg"] == []


def test_no_match_is_none():
    assert match_rule(PFOR_PATTERN, tokenize("i = 0 until 10 {}")) is None
    assert match_rule(tokenize("$x:ident"), tokenize("1")) is None


def test_transcribe_printall():
    b = match_rule(PRINTALL_PATTERN, tokenize('"hello", 42, 3.14'))
    out = texts(transcribe(PRINTALL_TEMPLATE, b))
    assert out == texts(tokenize('println!("{}", "hello"); println!("{}", 42); println!("{}", 3.14)'))


def test_transcribe_verbatim_and_recursive_call():
    assert texts(transcribe(tokenize("1 + x"), {})) == ["1", "+", "x"]
    b = match_rule(PFOR_PATTERN, tokenize("i = 0 to 10 { f(i); }"))
    out = transcribe(tokenize("pfor!($x = $s to $e step 1 $body)"), b)
    assert texts(out) == texts(tokenize("pfor!(i = 0 to 10 step 1 { f(i); })"))


def test_transcribe_errors():
    with pytest.raises(UnboundFragment):
        transcribe(tokenize("$y"), match_rule(tokenize("$x:ident"), tokenize("a")))
    b = match_rule(tokenize("$($a:ident),* ; $($b:ident),*"), tokenize("p, q ; r"))
    with pytest.raises(RepetitionCountMismatch):
        transcribe(tokenize("$($a $b)*"), b)


def test_multi_token_expr_capture_keeps_grouping():
    src = "macro_rules! triple ( ($a:expr) => ($a * 3); )\n" + main_of('println!("{}", triple!(1 + 2));')
    assert run(src) == "9\n"


@pytest.mark.parametrize("body", [
    "($x:ident) +) => (1);",
    "($x:ty) => (1);",
    "($($x:expr),+) => (1);",
    "($x) => (1);",
])
def test_definition_errors(body):
    with pytest.raises((MacroDefinitionError, ParseFailure)):
        collect_macros(parse(f"macro_rules! m ( {body} )"))


def test_duplicate_definition():
    with pytest.raises(MacroDefinitionError):
        collect_macros(parse("macro_rules! m ( () => (1); ) macro_rules! m ( () => (2); )"))


def test_unknown_macro_and_no_rule():
    with pytest.raises(UnknownMacro):
        expand_all(parse(main_of("nope!(1);")))
    with pytest.raises(NoRuleMatched):
        expand_all(parse("macro_rules! m ( (a) => (1); )\n" + main_of("m!(b);")))


def test_builtins_become_builtin_nodes_and_can_be_shadowed():
    prog = expand_all(parse(main_of('println!("{} {}", 1, vec!(2, 3));')))
    (stmt,) = prog.items[0].body.stmts
    assert isinstance(stmt.expr, n.BuiltinMacro) and isinstance(stmt.expr.args[2], n.BuiltinMacro)
    src = "macro_rules! vec ( ($a:expr) => ($a + 1); )\n" + main_of('println!("{}", vec!(1));')
    assert run(src) == "2\n"


def test_pfor_needs_two_steps():
    prog = parse(PFOR_STEP + main_of("pfor!(i = 0 to 3 { print!(\"{}\", i); });"))
    expander = Expander(collect_macros(prog), 2)
    out = expander.visit(prog, 0)
    assert expander.expansions == 2 and not contains_invocations(out)
    with pytest.raises(RecursionLimitExceeded):
        Expander(collect_macros(prog), 1).visit(prog, 0)


def test_loopy_default_limit():
    prog = parse("macro_rules! loopy ( () => (loopy!()); )\n" + main_of("let x = loopy!();"))
    with pytest.raises(RecursionLimitExceeded) as info:
        expand_all(prog, depth_limit=DEFAULT_DEPTH_LIMIT)
    assert info.value.depth_limit == 128


def test_depth_from_environment(monkeypatch):
    monkeypatch.setenv("FRS_MACRO_DEPTH", "7")
    assert default_depth_limit() == 7
    monkeypatch.delenv("FRS_MACRO_DEPTH")
    assert default_depth_limit() == DEFAULT_DEPTH_LIMIT
    with pytest.raises(ValueError):
        Expander({}, 0)


def test_no_invocations_is_unchanged():
    prog = parse("fn main() { let x = 1 + 2; }")
    assert expand_all(prog) == prog


def test_expansion_is_unhygienic():
    # pfor binds `e`; a body that mentions its own `e` sees the macro's
    src = PFOR_STEP + main_of('let e = 100; pfor!(i = 0 to 1 { println!("{}", e); });')
    assert run(src) == "1\n1\n"


def test_expanded_tokens_carry_the_call_site_span():
    prog = expand_all(parse("macro_rules! one ( () => (1); )\nfn main() {\n    let x = one!();\n}"))
    init = prog.items[1].body.stmts[0].init
    assert init.span.start_line == 3


# properties

@settings(max_examples=50, deadline=None)
@given(st.integers(-30, 30), st.integers(0, 30))
def test_step_equivalence(s, width):
    e = s + width
    plain = PFOR_STEP + main_of(f'pfor!(i = {s} to {e} {{ print!("{{}} ", i); }});')
    stepped = PFOR_STEP + main_of(f'pfor!(i = {s} to {e} step 1 {{ print!("{{}} ", i); }});')
    assert run(plain) == run(stepped) == "".join(f"{i} " for i in range(s, e + 1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 20), st.integers(1, 5))
def test_bound_is_evaluated_once(bound, step):
    src = PFOR_STEP + f"""
fn bump(c: &mut int) -> int {{ *c += 1; {bound} }}
fn main() {{
    let mut c = 0;
    pfor!(i = 0 to bump(&mut c) step {step} {{ }});
    println!("{{}}", c);
}}
"""
    assert run(src) == "1\n"


@given(st.integers(0, 12))
def test_printall_arity(k):
    src = (CORPUS / "printall_ok.frs").read_text().split("// example use:")[0]
    prog = expand_all(parse(src + main_of(f"printall!({', '.join(str(i) for i in range(k))});")))
    body = prog.items[1].body
    stmts = body.stmts + ([body.tail] if body.tail is not None else [])
    assert len(stmts) == k


@given(st.integers(-100, 100))
def test_first_listed_rule_wins(v):
    rules = ["($a:expr) => (1)", "($a:expr) => (2)"]
    for order, want in ((rules, "1"), (rules[::-1], "2")):
        src = f"macro_rules! pick ( {'; '.join(order)}; )\n" + main_of(f'println!("{{}}", pick!({v}));')
        assert run(src) == want + "\n"


@given(st.integers(0, 5), st.integers(1, 4))
def test_expansion_is_deterministic(s, k):
    src = PFOR_STEP + main_of(f"pfor!(i = {s} to {s + k} {{ print!(\"{{}}\", i * 2); }});")
    a, b = expand_all(parse(src)), expand_all(parse(src))
    assert dump_tree(a) == dump_tree(b) and pretty_print(a) == pretty_print(b)


@pytest.mark.parametrize("limit", [1, 2, 10, 50])
def test_recursion_limit_is_exact(limit):
    prog = parse("macro_rules! loopy ( () => (loopy!()); )\n" + main_of("loopy!();"))
    expander = Expander(collect_macros(prog), limit)
    with pytest.raises(RecursionLimitExceeded):
        expander.visit(prog, 0)
    assert expander.expansions == limit
