"""Rows of the number, escape and string literal tables.

Each expected value is written independently of the lexer: integers as
Python ints, floats via float() on a plain decimal spelling, strings as
Python literals and byte strings as explicit byte lists.
"""

# (source, kind, value, suffix)
NUMBER_ROWS = [
    ("123i", "IntLit", 123, "i"),
    ("123u", "IntLit", 123, "u"),
    ("123i8", "IntLit", 123, "i8"),
    ("123u8", "IntLit", 123, "u8"),
    ("123i16", "IntLit", 123, "i16"),
    ("123u16", "IntLit", 123, "u16"),
    ("123i32", "IntLit", 123, "i32"),
    ("123u32", "IntLit", 123, "u32"),
    ("123i64", "IntLit", 123, "i64"),
    ("123u64", "IntLit", 123, "u64"),
    ("1_2_3_4", "IntLit", 1234, "untyped"),
    ("1234_i", "IntLit", 1234, "i"),
    ("0x1234", "IntLit", 4660, "untyped"),
    ("0x1234u16", "IntLit", 4660, "u16"),
    ("0b1010", "IntLit", 10, "untyped"),
    ("0o1234", "IntLit", 668, "untyped"),
    ("b'a'", "ByteLit", 97, "u8"),
    ("12.34", "FloatLit", float("12.34"), "untyped"),
    ("12.34f32", "FloatLit", float("12.34"), "f32"),
    ("12.34f64", "FloatLit", float("12.34"), "f64"),
    ("12e34", "FloatLit", float("120000000000000000000000000000000000"), "untyped"),
    ("12E34", "FloatLit", float("120000000000000000000000000000000000"), "untyped"),
    ("12E+34", "FloatLit", float("120000000000000000000000000000000000"), "untyped"),
    ("12E-34", "FloatLit", float("0.0000000000000000000000000000000012"), "untyped"),
    ("1_2e34", "FloatLit", float("120000000000000000000000000000000000"), "untyped"),
    ("1_2e3_4", "FloatLit", float("120000000000000000000000000000000000"), "untyped"),
]

# b"a" is a byte string, kept apart from the scalar rows
BYTE_STRING_NUMBER_ROW = ('b"a"', [97])

# (char form, byte form, code point, string form, string code point);
# the \u rows have no byte form
ESCAPE_ROWS = [
    (r"'\x61'", r"b'\x61'", 0x61, r'"\x61"', 0x61),
    (r"'\\'", r"b'\\'", 0x5C, r'"\\"', 0x5C),
    (r"'\''", r"b'\''", 0x27, r'"\""', 0x22),
    (r"'\0'", r"b'\0'", 0x00, r'"\0"', 0x00),
    (r"'\t'", r"b'\t'", 0x09, r'"\t"', 0x09),
    (r"'\n'", r"b'\n'", 0x0A, r'"\n"', 0x0A),
    (r"'\r'", r"b'\r'", 0x0D, r'"\r"', 0x0D),
    (r"'\u0123'", None, 0x0123, r'"\u0123"', 0x0123),
    (r"'\U00012345'", None, 0x12345, r'"\U00012345"', 0x12345),
]

# (string source, value, byte string source, bytes)
STRING_ROWS = [
    ('"foo"', "foo", 'b"foo"', [102, 111, 111]),
    (r'"fo\"o"', 'fo"o', r'b"fo\"o"', [102, 111, 34, 111]),
    (r'r"fo\n"', "fo\\n", r'rb"fo\n"', [102, 111, 92, 110]),
    (r'r#"fo\"o"#', 'fo\\"o', r'rb#"fo\"o"#', [102, 111, 92, 34, 111]),
    (r'"foo#\"#bar"', 'foo#"#bar', r'b"foo#\"#bar"', [102, 111, 111, 35, 34, 35, 98, 97, 114]),
    ('r##"foo#"#bar"##', 'foo#"#bar', 'rb##"foo#"#bar"##', [102, 111, 111, 35, 34, 35, 98, 97, 114]),
]

REJECTED_ESCAPES = [r"'\a'", r'"\f"', r'"\0123"', r"b'\a'", r'"\v"', r"'\e'", r'"\01"']
