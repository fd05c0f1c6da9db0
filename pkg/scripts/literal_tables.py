"""Print how the lexer decodes every row of the literal tables, with a match flag."""

import importlib.util
import sys
from pathlib import Path

from frs.lexer import payload_repr, tokenize

ROOT = Path(__file__).resolve().parent.parent


def load_rows():
    spec = importlib.util.spec_from_file_location("literal_tables", ROOT / "tests" / "literal_tables.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def show(source: str, expected) -> bool:
    (tok,) = tokenize(source)
    ok = tok.payload == expected
    print(f"{'ok  ' if ok else 'FAIL'} {source:<24} {tok.kind:<10} {payload_repr(tok)}")
    return ok


def main() -> int:
    rows = load_rows()
    good = True
    print("numbers")
    for src, _, value, _ in rows.NUMBER_ROWS:
        good &= show(src, value)
    print("escapes")
    for char_src, byte_src, cp, str_src, str_cp in rows.ESCAPE_ROWS:
        good &= show(char_src, chr(cp))
        if byte_src:
            good &= show(byte_src, cp)
        good &= show(str_src, chr(str_cp))
    print("strings")
    for src, value, bsrc, bvalues in rows.STRING_ROWS:
        good &= show(src, value)
        good &= show(bsrc, bytes(bvalues))
    return 0 if good else 1


if __name__ == "__main__":
    sys.exit(main())
