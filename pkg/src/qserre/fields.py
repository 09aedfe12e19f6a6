"""Exact base fields: GF(2) and the rationals."""

from __future__ import annotations

import enum
import re
from fractions import Fraction

_RATIONAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)(/\d+)?$")


def parse_rational(value) -> Fraction:
    """Parse an int, Fraction, or decimal/fraction string exactly.

    Binary floats are refused: ``0.5`` as a float has no place in an exact
    model, write ``"0.5"`` or ``"1/2"`` instead.
    """
    if isinstance(value, bool):
        raise ValueError(f"boolean is not a number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL.match(text):
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    raise ValueError(f"not an exact rational: {value!r}")


class FieldChoice(str, enum.Enum):
    GF2 = "GF2"
    RATIONALS = "Q"

    @classmethod
    def from_name(cls, name: str) -> "FieldChoice":
        key = name.strip().upper()
        if key in ("GF2", "Z2", "Z/2", "F2"):
            return cls.GF2
        if key in ("Q", "QQ", "RATIONALS"):
            return cls.RATIONALS
        raise ValueError(f"unknown field {name!r}")

    @property
    def zero(self):
        return 0 if self is FieldChoice.GF2 else Fraction(0)

    @property
    def one(self):
        return 1 if self is FieldChoice.GF2 else Fraction(1)

    def coerce(self, value):
        q = parse_rational(value)
        if self is FieldChoice.GF2:
            if q.denominator % 2 == 0:
                raise ValueError(f"{value!r} has no image in GF(2)")
            return q.numerator % 2
        return q

    def add(self, a, b):
        return (a ^ b) if self is FieldChoice.GF2 else a + b

    def sub(self, a, b):
        return (a ^ b) if self is FieldChoice.GF2 else a - b

    def neg(self, a):
        return a if self is FieldChoice.GF2 else -a

    def mul(self, a, b):
        return (a & b) if self is FieldChoice.GF2 else a * b

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return 1 if self is FieldChoice.GF2 else 1 / a

    def sign(self, exponent: int):
        """(-1)**exponent in the field."""
        if self is FieldChoice.GF2 or exponent % 2 == 0:
            return self.one
        return Fraction(-1)

    def format(self, a) -> str:
        return str(a)
