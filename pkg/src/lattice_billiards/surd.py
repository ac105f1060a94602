"""Exact numbers of the form a + b*sqrt(3) with rational a, b.

Every 2D vertex and lattice vector in the catalog lives in Q(sqrt 3), so the
amplitude identities can be checked without floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction, "Surd"]

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Surd:
    rational: Fraction = Fraction(0)
    root3: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "rational", Fraction(self.rational))
        object.__setattr__(self, "root3", Fraction(self.root3))

    @classmethod
    def of(cls, value: Number) -> "Surd":
        if isinstance(value, Surd):
            return value
        return cls(Fraction(value), Fraction(0))

    def __add__(self, other: Number) -> "Surd":
        other = Surd.of(other)
        return Surd(self.rational + other.rational, self.root3 + other.root3)

    __radd__ = __add__

    def __neg__(self) -> "Surd":
        return Surd(-self.rational, -self.root3)

    def __sub__(self, other: Number) -> "Surd":
        return self + (-Surd.of(other))

    def __rsub__(self, other: Number) -> "Surd":
        return Surd.of(other) - self

    def __mul__(self, other: Number) -> "Surd":
        other = Surd.of(other)
        a, b = self.rational, self.root3
        c, d = other.rational, other.root3
        return Surd(a * c + 3 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Surd":
        other = Surd.of(other)
        c, d = other.rational, other.root3
        norm = c * c - 3 * d * d
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        return self * Surd(c / norm, -d / norm)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Surd.of(other)
        if not isinstance(other, Surd):
            return NotImplemented
        return self.rational == other.rational and self.root3 == other.root3

    def __hash__(self) -> int:
        return hash((self.rational, self.root3))

    def __float__(self) -> float:
        return float(self.rational) + float(self.root3) * SQRT3

    @property
    def is_rational(self) -> bool:
        return self.root3 == 0

    def to_json(self) -> list[str]:
        return [str(self.rational), str(self.root3)]

    def __repr__(self) -> str:
        if self.root3 == 0:
            return f"Surd({self.rational})"
        return f"Surd({self.rational} + {self.root3}*sqrt3)"

    def __str__(self) -> str:
        if self.root3 == 0:
            return str(self.rational)
        r3 = "sqrt3" if self.root3 == 1 else f"{self.root3}*sqrt3"
        if self.rational == 0:
            return r3
        sign = "-" if self.root3 < 0 else "+"
        r3 = r3 if self.root3 > 0 else ("sqrt3" if self.root3 == -1 else f"{-self.root3}*sqrt3")
        return f"{self.rational}{sign}{r3}"


def s3(rational: int | Fraction | str = 0, root3: int | Fraction | str = 0) -> Surd:
    """Shorthand constructor: ``s3(1, '1/3')`` is 1 + sqrt(3)/3."""
    return Surd(Fraction(rational), Fraction(root3))


def dot(u, v) -> Surd:
    total = Surd()
    for a, b in zip(u, v):
        total = total + Surd.of(a) * Surd.of(b)
    return total


def to_float(vec) -> tuple[float, ...]:
    return tuple(float(Surd.of(c)) for c in vec)
