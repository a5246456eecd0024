"""Exact money arithmetic.

All settlement math runs on :class:`fractions.Fraction` so that transfers
cancel exactly. Documents carry money as integer micro-units.
"""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Union

MICRO = 1_000_000
#: Smallest representable money amount (one micro-unit).
MONEY_UNIT = Fraction(1, MICRO)

MoneyLike = Union[int, float, str, Decimal, Fraction]


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


def to_money(value: MoneyLike, name: str = "value") -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``
    rather than the binary expansion.
    """
    if isinstance(value, bool):
        raise DomainError(f"{name}: booleans are not money")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"{name}: non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise DomainError(f"{name}: non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"{name}: cannot parse {value!r}") from exc
    raise DomainError(f"{name}: unsupported type {type(value).__name__}")


def from_micro(value: Union[int, str]) -> Fraction:
    """Parse an integer (or exact decimal string) count of micro-units."""
    return to_money(value, "micro-units") / MICRO


def to_micro(amount: Fraction) -> Union[int, str]:
    """Serialize an amount as micro-units.

    Integral micro-unit counts come back as ``int``. Sub-micro amounts (half
    micro-units from a Nash price split, for example) come back as an exact
    decimal string so no precision is dropped.
    """
    micro = Fraction(amount) * MICRO
    if micro.denominator == 1:
        return micro.numerator
    return _exact_decimal(micro)


def quantize_micro(amount: Fraction) -> int:
    """Round to the nearest whole micro-unit (half to even)."""
    return round(Fraction(amount) * MICRO)


def _exact_decimal(x: Fraction) -> str:
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        # non-terminating; fall back to an exact ratio
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    scaled = x * 10**digits
    sign = "-" if scaled < 0 else ""
    n = abs(scaled.numerator)
    whole, frac = divmod(n, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def money_str(amount: Fraction) -> str:
    """Human-readable rendering in currency units."""
    amount = Fraction(amount)
    if amount.denominator == 1:
        return str(amount.numerator)
    text = _exact_decimal(amount)
    if "/" in text:
        return f"{float(amount):.6g}"
    return text
