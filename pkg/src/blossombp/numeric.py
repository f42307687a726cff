"""Exact dyadic rationals and lexicographic tie-break costs.

Every weight, dual value and objective handled by the solver is a
:class:`Dyadic`, i.e. ``numerator / 2**exponent`` with arbitrary-precision
integers, so comparisons are exact and ties are genuine ties.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction


class Dyadic:
    """An exact rational of the form ``num / 2**exp`` kept in canonical form.

    Canonical means ``exp == 0`` or ``num`` is odd, so equal values have
    identical ``(num, exp)`` pairs and hash alike.
    """

    __slots__ = ("num", "exp")

    def __init__(self, num: int = 0, exp: int = 0):
        if exp < 0:
            raise ValueError("exponent must be non-negative")
        if num == 0:
            exp = 0
        elif exp:
            tz = (num & -num).bit_length() - 1
            if tz:
                shift = min(tz, exp)
                num >>= shift
                exp -= shift
        self.num = num
        self.exp = exp

    @classmethod
    def coerce(cls, value: Dyadic | int) -> Dyadic:
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value)
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, value: Fraction) -> Dyadic:
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, den.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def scaled(self, exp: int) -> int:
        """Return ``self * 2**exp`` as an int; ``exp`` must be >= ``self.exp``."""
        if exp < self.exp:
            raise ValueError(f"{self} is not an integer multiple of 2**-{exp}")
        return self.num << (exp - self.exp)

    def halve(self) -> Dyadic:
        if self.num == 0:
            return self
        return Dyadic(self.num, self.exp + 1)

    def is_integer(self) -> bool:
        return self.exp == 0

    def _align(self, other: Dyadic) -> tuple[int, int, int]:
        if self.exp >= other.exp:
            return self.num, other.num << (self.exp - other.exp), self.exp
        return self.num << (other.exp - self.exp), other.num, other.exp

    def __add__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        if not isinstance(other, int):
            return NotImplemented
        return Dyadic(other) - self

    def __neg__(self) -> Dyadic:
        return Dyadic(-self.num, self.exp)

    def __mul__(self, other):
        if isinstance(other, int):
            return Dyadic(self.num * other, self.exp)
        if isinstance(other, Dyadic):
            return Dyadic(self.num * other.num, self.exp + other.exp)
        return NotImplemented

    __rmul__ = __mul__

    def _cmp(self, other) -> int | None:
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return None
        a, b, _ = self._align(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        if self.exp == 0:
            return hash(self.num)
        return hash((self.num, self.exp))

    def __bool__(self):
        return self.num != 0

    def __repr__(self):
        if self.exp == 0:
            return f"Dyadic({self.num})"
        return f"Dyadic({self.num}, {self.exp})"

    def __str__(self):
        return to_decimal(self)


def to_decimal(value: Dyadic) -> str:
    """Render exactly in decimal: ``19/4 -> '4.75'``, ``-1/2 -> '-0.5'``, ``5 -> '5'``."""
    if value.exp == 0:
        return str(value.num)
    sign = "-" if value.num < 0 else ""
    mag = abs(value.num)
    # num / 2**k == num * 5**k / 10**k; k fractional digits, never trailing zeros
    digits = str(mag * 5**value.exp).rjust(value.exp + 1, "0")
    return f"{sign}{digits[:-value.exp]}.{digits[-value.exp:]}"


def dyadic_add(a: Dyadic, b: Dyadic) -> Dyadic:
    return a + b


def dyadic_halve(a: Dyadic) -> Dyadic:
    return a.halve()


def common_exponent(values) -> int:
    """Smallest ``k`` such that every value times ``2**k`` is an integer."""
    return max((v.exp for v in values), default=0)


class Order(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True, order=True)
class TieBreakCost:
    """Cost ordered lexicographically by ``(primary, secondary)``.

    The secondary channel only matters when primaries are exactly equal.
    """

    primary: Dyadic
    secondary: int = 0

    def __add__(self, other: TieBreakCost) -> TieBreakCost:
        return TieBreakCost(self.primary + other.primary, self.secondary + other.secondary)

    def __str__(self):
        return f"({self.primary}, {self.secondary})"


def cost_min(a: TieBreakCost, b: TieBreakCost) -> tuple[TieBreakCost, Order]:
    """Lexicographic minimum of ``a`` and ``b`` plus how ``a`` compares to ``b``."""
    if a < b:
        return a, Order.LESS
    if a == b:
        return a, Order.EQUAL
    return b, Order.GREATER
