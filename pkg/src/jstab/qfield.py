"""Exact arithmetic in Q(sqrt(d)).

Weights of one-parameter subgroups may be irrational; comparing monomial
weights in floating point would make initial forms unreliable, so weights
live in a quadratic extension with one fixed square-free radicand.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from numbers import Rational
from typing import Union

Number = Union[int, Fraction, "QNumber"]


def _is_square_free(d: int) -> bool:
    if d < 2:
        return False
    for p in range(2, math.isqrt(d) + 1):
        if d % (p * p) == 0:
            return False
    return True


@total_ordering
class QNumber:
    """The number ``a + b*sqrt(d)`` with ``a, b`` rational.

    When ``b == 0`` the radicand is irrelevant and stored as 0, so rational
    values built with different radicands compare and hash equal.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 0):
        a = Fraction(a)
        b = Fraction(b)
        if b == 0:
            d = 0
        elif not _is_square_free(d):
            raise ValueError(f"radicand must be a square-free integer > 1, got {d}")
        self.a = a
        self.b = b
        self.d = d

    # -- construction -------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "QNumber":
        if isinstance(x, QNumber):
            return x
        if isinstance(x, (int, Rational)):
            return cls(Fraction(x))
        raise TypeError(f"cannot convert {type(x).__name__} to QNumber")

    @classmethod
    def parse(cls, text: str, d: int = 0) -> "QNumber":
        """Parse ``"3/2"``, ``"1+2w"``, ``"-w"``, ``"1/2-3/4w"``; ``w`` is sqrt(d)."""
        s = text.replace(" ", "").replace("*", "")
        if not s:
            raise ValueError("empty number")
        a = Fraction(0)
        b = Fraction(0)
        for sign, body in re.findall(r"([+-]?)([^+-]+)", s):
            if body.endswith("w"):
                coeff = body[:-1]
                val = Fraction(coeff) if coeff else Fraction(1)
                b += -val if sign == "-" else val
            else:
                val = Fraction(body)
                a += -val if sign == "-" else val
        if re.sub(r"[+-]?[^+-]+", "", s):
            raise ValueError(f"malformed number {text!r}")
        if b != 0 and d == 0:
            raise ValueError(f"{text!r} uses w but no radicand d was given")
        return cls(a, b, d)

    # -- helpers ------------------------------------------------------
    def _common_d(self, other: "QNumber") -> int:
        if self.d and other.d and self.d != other.d:
            raise ValueError(f"mixed radicands {self.d} and {other.d}")
        return self.d or other.d

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> "QNumber":
        return QNumber(self.a, -self.b, self.d)

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs = a * a
        rhs = b * b * self.d
        if a > 0:
            return 1 if lhs > rhs else -1
        return 1 if rhs > lhs else -1

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def to_rational(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        try:
            o = QNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return QNumber(self.a + o.a, self.b + o.b, self._common_d(o))

    __radd__ = __add__

    def __neg__(self):
        return QNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = QNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return QNumber(self.a - o.a, self.b - o.b, self._common_d(o))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        try:
            o = QNumber.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._common_d(o)
        return QNumber(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = QNumber.coerce(other)
        except TypeError:
            return NotImplemented
        if o.b == 0:
            if o.a == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt d)")
            return QNumber(self.a / o.a, self.b / o.a, self.d)
        norm = o.a * o.a - o.b * o.b * o.d
        num = self * o.conjugate()
        return QNumber(num.a / norm, num.b / norm, num.d)

    def __rtruediv__(self, other):
        return QNumber.coerce(other).__truediv__(self)

    # -- comparison ---------------------------------------------------
    def __eq__(self, other):
        try:
            o = QNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        try:
            o = QNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __repr__(self):
        return f"QNumber({self})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        bpart = "w" if self.b == 1 else "-w" if self.b == -1 else f"{self.b}w"
        if self.a == 0:
            return bpart
        if bpart.startswith("-"):
            return f"{self.a}{bpart}"
        return f"{self.a}+{bpart}"


def exact_str(x) -> str:
    """Canonical string of an exact value (Fraction, int or QNumber)."""
    if isinstance(x, QNumber):
        return str(x)
    return str(Fraction(x))


def as_exact(x):
    """Collapse a rational QNumber to a Fraction; leave irrational ones alone."""
    if isinstance(x, QNumber):
        return x.a if x.b == 0 else x
    return Fraction(x)
