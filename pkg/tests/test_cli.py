import io
import json
import subprocess
import sys

import pytest

from frs.cli import main, render_diagnostics, summary_line
from frs.errors import Diagnostic, SourceSpan
from helpers import CORPUS, INVALID_FILES, OK_FILES


def cli(*argv, stdin: str | None = None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    status = main(list(argv), stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


def diag(line, col, end_col=None, code="E-X", msg="bad"):
    return Diagnostic("error", code, msg, SourceSpan(line, col, line, end_col or col + 1))


def test_run_collatz():
    status, out, _ = cli("run", str(CORPUS / "collatz_ok.frs"))
    assert status == 0 and out.split()[:3] == ["76", "38", "19"] and out.endswith("1\n")


def test_check_borrow_invalid():
    status, out, err = cli("check", str(CORPUS / "borrow_invalid.frs"))
    assert status == 1
    assert err.count("error[E-BORROWED-USE]") == 2
    assert out == "2 errors\n"


def test_missing_file_is_usage_error():
    status, _, err = cli("lex", "/nonexistent.frs")
    assert status == 2 and "cannot read" in err


@pytest.mark.parametrize("argv", [[], ["frob", "x"], ["run"], ["check", "x", "--format", "tree"],
                                  ["expand", "x", "--macro-depth", "0"], ["run", "a", "b"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "lex" in capsys.readouterr().out


@pytest.mark.parametrize("path", INVALID_FILES, ids=lambda p: p.name)
def test_invalid_corpus_exits_one(path):
    assert cli("check", str(path))[0] == 1
    status, out, err = cli("run", str(path))
    assert status == 1 and out == "" and "not running" in err


@pytest.mark.parametrize("path", OK_FILES, ids=lambda p: p.name)
def test_ok_corpus_exit_codes_and_staging(path, monkeypatch):
    assert cli("check", str(path))[0] == 0
    status, direct, _ = cli("run", str(path))
    assert status == 0 and direct == path.with_suffix(".out").read_text()
    for fmt in ("tree", "text"):
        status, staged, _ = cli("desugar", str(path), "--format", fmt)
        assert status == 0 and staged.endswith("\n")
        status, again, _ = cli("run", "-", stdin=staged, monkeypatch=monkeypatch)
        assert status == 0 and again == direct


def test_deny_warnings():
    path = str(CORPUS / "boxes_ok.frs")
    status, out, err = cli("check", path)
    assert status == 0 and out == "0 errors, 1 warning\n" and "warning[W-GC-BOX]" in err
    assert cli("check", path, "--deny-warnings")[0] == 1
    assert cli("run", path, "--deny-warnings")[0] == 1


def test_unchecked_run():
    status, out, err = cli("run", str(CORPUS / "borrow_invalid.frs"), "--unchecked")
    assert status == 0 and out == "2\n3\n3\n3\n"


def test_json_diagnostics():
    status, _, err = cli("check", str(CORPUS / "boxes_invalid.frs"), "--format", "json")
    rows = [json.loads(line) for line in err.splitlines()]
    assert status == 1 and [r["line"] for r in rows] == [4, 5, 10, 15]
    assert set(rows[0]) >= {"code", "severity", "line", "col", "end_line", "end_col", "message"}


def test_macro_depth_flag_and_env(monkeypatch, tmp_path):
    # the two-rule pfor needs two expansion steps when called without `step`
    macro = (CORPUS / "pfor_step_ok.frs").read_text().split("// Example use:")[0]
    path = tmp_path / "nostep.frs"
    path.write_text(macro + 'fn main() { pfor!(i = 0 to 2 { println!("{}", i); }); }\n')
    path = str(path)
    assert cli("run", path, "--macro-depth", "2")[0] == 0
    status, _, err = cli("run", path, "--macro-depth", "1")
    assert status == 1 and "E-MACRO-RECURSION" in err
    monkeypatch.setenv("FRS_MACRO_DEPTH", "1")
    assert cli("expand", path)[0] == 1
    assert cli("expand", path, "--macro-depth", "5")[0] == 0


def test_stage_formats(monkeypatch):
    path = str(CORPUS / "printall_ok.frs")
    status, out, _ = cli("lex", path, "--format", "json")
    assert status == 0 and json.loads(out.splitlines()[0])["text"] == "macro_rules"
    status, out, _ = cli("lex", path)
    assert out.splitlines()[0] == "1:1 Keyword macro_rules → macro_rules"
    status, out, _ = cli("parse", path, "--format", "json")
    assert json.loads(out)["node"] == "Program"
    status, out, _ = cli("expand", path, "--format", "tokens")
    assert status == 0 and "Ident println" in out
    status, out, _ = cli("expand", path)
    assert out.split("fn main")[1].count("println!") == 3
    status, out, _ = cli("desugar", "-", stdin="fn main() { let x = 1 + 2; }", monkeypatch=monkeypatch)
    assert "1.add(2)" in out
    status, out, _ = cli("parse", "-", stdin="fn main() {}", monkeypatch=monkeypatch)
    assert out == "fn main() {}\n"


def test_errors_render_with_filename(monkeypatch):
    status, _, err = cli("parse", "-", stdin="fn main() { let = 1; }", monkeypatch=monkeypatch)
    assert status == 1 and err.startswith("<stdin>:1:17: error[")
    status, out, err = cli("run", "-", stdin='fn main() { println!("{}", vec!(1)[4]); }', monkeypatch=monkeypatch)
    assert status == 1 and "error[E-INDEX" in err


def test_caret_under_column():
    source = "\n".join(f"line {i}" for i in range(1, 7)) + "\n    foo(bar);\n"
    text = render_diagnostics([diag(7, 5, 8)], source, filename="f.frs")
    lines = text.splitlines()
    assert lines[0] == "f.frs:7:5: error[E-X]: bad"
    assert lines[1] == "        foo(bar);"
    assert lines[2] == "    " + " " * 4 + "^^^"


def test_empty_and_ordering():
    assert render_diagnostics([], "x") == ""
    assert summary_line([]) == "0 errors"
    text = render_diagnostics([diag(1, 9, msg="second"), diag(1, 2, msg="first")], "let a = b c;\n")
    heads = [line for line in text.splitlines() if "error[" in line]
    assert ["first" in heads[0], "second" in heads[1]] == [True, True]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "frs", "run", str(CORPUS / "list_ok.frs")],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and proc.stdout == "2\n"
