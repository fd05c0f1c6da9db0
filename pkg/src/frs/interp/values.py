"""Runtime values, storage places and display formatting."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any

from ..errors import SharedMutation, TypeMismatch

UNTYPED = "untyped"
INT_WIDTHS = {
    "i8": (8, True), "i16": (16, True), "i32": (32, True), "i64": (64, True),
    "u8": (8, False), "u16": (16, False), "u32": (32, False), "u64": (64, False),
    "int": (64, True), "uint": (64, False), UNTYPED: (64, True),
}
FLOAT_TYPES = ("f32", "f64")
SUFFIX_TYPES = {"i": "int", "u": "uint"}


def wrap_int(value: int, ty: str) -> int:
    bits, signed = INT_WIDTHS[ty]
    value &= (1 << bits) - 1
    if signed and value >= 1 << (bits - 1):
        value -= 1 << bits
    return value


def round_f32(x: float) -> float:
    if math.isnan(x) or math.isinf(x):
        return x
    try:
        return struct.unpack("f", struct.pack("f", x))[0]
    except OverflowError:
        return math.copysign(math.inf, x)


class UnitType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "()"


UNIT = UnitType()


@dataclass(frozen=True)
class Int:
    value: int
    ty: str = UNTYPED

    @classmethod
    def make(cls, value: int, ty: str = UNTYPED) -> "Int":
        ty = SUFFIX_TYPES.get(ty, ty)
        return cls(wrap_int(value, ty), ty)


@dataclass(frozen=True)
class Float:
    value: float
    ty: str = UNTYPED

    @classmethod
    def make(cls, value: float, ty: str = UNTYPED) -> "Float":
        return cls(round_f32(value) if ty == "f32" else float(value), ty)


@dataclass(frozen=True)
class Char:
    ch: str


@dataclass(eq=False)
class TupleV:
    items: list


@dataclass(eq=False)
class Record:
    name: str
    fields: dict


@dataclass(eq=False)
class Variant:
    enum: str
    name: str
    payload: list = field(default_factory=list)


@dataclass(eq=False)
class Vector:
    items: list


@dataclass(eq=False)
class Closure:
    params: list
    body: Any
    env: Any
    ret: Any = None


@dataclass(eq=False)
class FnRef:
    name: str


@dataclass(eq=False)
class RangeIter:
    current: Int
    end: Int


@dataclass(eq=False)
class VecIter:
    vector: Vector
    index: int = 0


# places

class Place:
    readonly = False

    def get(self):
        raise NotImplementedError

    def set(self, value) -> None:
        raise NotImplementedError

    def check_writable(self) -> None:
        if self.readonly:
            raise SharedMutation("cannot mutate the contents of an Rc (shared values are immutable)")


class Cell(Place):
    __slots__ = ("value", "readonly")

    def __init__(self, value=None, readonly: bool = False):
        self.value = value
        self.readonly = readonly

    def get(self):
        return self.value

    def set(self, value) -> None:
        self.check_writable()
        self.value = value


class SlotPlace(Place):
    """An element of a list or dict held by an aggregate value."""
    __slots__ = ("container", "key", "readonly")

    def __init__(self, container, key, readonly: bool = False):
        self.container = container
        self.key = key
        self.readonly = readonly

    def get(self):
        return self.container[self.key]

    def set(self, value) -> None:
        self.check_writable()
        self.container[self.key] = value


@dataclass(eq=False)
class BoxV:
    cell: Cell


@dataclass(eq=False)
class RcV:
    """Reference-counted shared value; its contents never change."""
    cell: Cell

    @classmethod
    def new(cls, value) -> "RcV":
        return cls(Cell(value, readonly=True))


@dataclass(eq=False)
class Ref:
    place: Place
    mutable: bool = False


POINTERS = (Ref, BoxV, RcV)


def inner_place(v) -> Place:
    if isinstance(v, Ref):
        return v.place
    return v.cell


def unwrap(v):
    while isinstance(v, POINTERS):
        v = inner_place(v).get()
    return v


def copy_value(v):
    """Value semantics for aggregates; pointers and scalars are shared."""
    if isinstance(v, TupleV):
        return TupleV([copy_value(x) for x in v.items])
    if isinstance(v, Record):
        return Record(v.name, {k: copy_value(x) for k, x in v.fields.items()})
    if isinstance(v, Variant):
        return Variant(v.enum, v.name, [copy_value(x) for x in v.payload])
    if isinstance(v, Vector):
        return Vector([copy_value(x) for x in v.items])
    if isinstance(v, RangeIter):
        return RangeIter(v.current, v.end)
    if isinstance(v, VecIter):
        return VecIter(v.vector, v.index)
    return v


def type_name(v) -> str:
    if isinstance(v, Int):
        return "int" if v.ty == UNTYPED else v.ty
    if isinstance(v, Float):
        return "f64" if v.ty == UNTYPED else v.ty
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, Char):
        return "char"
    if isinstance(v, str):
        return "str"
    if v is UNIT:
        return "()"
    if isinstance(v, Record):
        return v.name
    if isinstance(v, Variant):
        return v.enum
    if isinstance(v, Vector):
        return "Vec"
    if isinstance(v, TupleV):
        return "tuple"
    if isinstance(v, (Closure, FnRef)):
        return "fn"
    if isinstance(v, BoxV):
        return "Box"
    if isinstance(v, RcV):
        return "Rc"
    if isinstance(v, Ref):
        return "&"
    if isinstance(v, RangeIter):
        return "Range"
    if isinstance(v, VecIter):
        return "VecIter"
    return type(v).__name__


def join_types(a: str, b: str, op: str = "") -> str:
    if a == UNTYPED:
        return b
    if b == UNTYPED or a == b:
        return a
    raise TypeMismatch(f"mismatched operand types {a} and {b}" + (f" for '{op}'" if op else ""))


# display

def format_float(x: float, ty: str) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if ty == "f32":
        text = repr(x)
        for p in range(1, 18):
            cand = f"{x:.{p}g}"
            if round_f32(float(cand)) == x:
                text = cand
                break
    else:
        text = repr(x)
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("", "-"):
        text += "0"
    return text


def display(v) -> str:
    if v is UNIT:
        return "()"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Int):
        return str(v.value)
    if isinstance(v, Float):
        return format_float(v.value, v.ty)
    if isinstance(v, Char):
        return v.ch
    if isinstance(v, str):
        return v
    if isinstance(v, bytes):
        return "[" + ", ".join(str(b) for b in v) + "]"
    if isinstance(v, TupleV):
        if len(v.items) == 1:
            return f"({display(v.items[0])},)"
        return "(" + ", ".join(display(x) for x in v.items) + ")"
    if isinstance(v, Vector):
        return "[" + ", ".join(display(x) for x in v.items) + "]"
    if isinstance(v, Record):
        if not v.fields:
            return v.name
        return v.name + " { " + ", ".join(f"{k}: {display(x)}" for k, x in v.fields.items()) + " }"
    if isinstance(v, Variant):
        if not v.payload:
            return v.name
        return v.name + "(" + ", ".join(display(x) for x in v.payload) + ")"
    if isinstance(v, POINTERS):
        return display(inner_place(v).get())
    if isinstance(v, (Closure, FnRef)):
        return "<fn>"
    if isinstance(v, RangeIter):
        return f"range({v.current.value}, {v.end.value})"
    return str(v)
