"""Run every corpus program through the full pipeline and report per-file status.

For *_ok.frs files the stdout must match the sibling .out file; for
*_invalid.frs files every `// invalid!` line must carry an error and no
other line may, apart from lines tagged [erratum].
"""

import argparse
import re
import sys
from pathlib import Path

from frs import check_program, compile_source, desugar_program, run_program

ROOT = Path(__file__).resolve().parent.parent


def check_annotations(source: str, name: str) -> list[str]:
    problems = []
    flagged = {d.line for d in check_program(compile_source(source, name)) if d.severity == "error"}
    for i, line in enumerate(source.splitlines(), 1):
        erratum = "[erratum]" in line
        if re.search(r"//\s*invalid!", line) and i not in flagged:
            problems.append(f"line {i}: expected a diagnostic")
        elif i in flagged and not erratum and not re.search(r"//\s*invalid!", line):
            problems.append(f"line {i}: unexpected diagnostic")
        elif erratum and i not in flagged:
            problems.append(f"line {i}: erratum line not flagged")
    return problems


def run_file(path: Path) -> list[str]:
    source = path.read_text()
    if path.name.endswith("_invalid.frs"):
        return check_annotations(source, path.name)
    program = compile_source(source, path.name)
    errors = [d for d in check_program(program) if d.severity == "error"]
    if errors:
        return [f"checker: {d.code} at line {d.line}" for d in errors]
    out, status, err = run_program(desugar_program(program))
    if err is not None:
        return [f"runtime: {err}"]
    expected = path.with_suffix(".out")
    if not expected.exists():
        return ["missing .out file"]
    return [] if out == expected.read_text() else ["stdout differs from .out"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus", nargs="?", default=str(ROOT / "corpus"))
    args = ap.parse_args(argv)
    failed = 0
    for path in sorted(Path(args.corpus).glob("*.frs")):
        problems = run_file(path)
        print(f"{'ok  ' if not problems else 'FAIL'} {path.name}")
        for p in problems:
            print(f"     {p}")
        failed += bool(problems)
    print(f"{failed} failing file(s)")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
