from decimal import Decimal
from fractions import Fraction

import pytest

from nashpeering.money import (
    MONEY_UNIT,
    DomainError,
    from_micro,
    money_str,
    quantize_micro,
    to_micro,
    to_money,
)


@pytest.mark.parametrize(
    "value, expected",
    [
        (3, Fraction(3)),
        (0.1, Fraction(1, 10)),
        ("2.5", Fraction(5, 2)),
        ("7/3", Fraction(7, 3)),
        (Decimal("0.000001"), MONEY_UNIT),
        (Fraction(-4, 6), Fraction(-2, 3)),
    ],
)
def test_to_money_is_exact(value, expected):
    assert to_money(value) == expected


@pytest.mark.parametrize("bad", [float("inf"), float("nan"), "abc", True, None, Decimal("NaN")])
def test_to_money_rejects(bad):
    with pytest.raises(DomainError):
        to_money(bad)


def test_micro_roundtrip_integral_and_sub_micro():
    assert to_micro(Fraction(3)) == 3_000_000
    assert to_micro(Fraction(-1, 4)) == -250_000
    # half a micro-unit survives as an exact decimal string
    assert to_micro(Fraction(1, 2_000_000)) == "0.5"
    assert from_micro(to_micro(Fraction(1, 2_000_000))) == Fraction(1, 2_000_000)
    assert from_micro(1_500_000) == Fraction(3, 2)


def test_to_micro_non_terminating_is_still_exact():
    text = to_micro(Fraction(1, 3))
    assert from_micro(text) == Fraction(1, 3)


def test_quantize_and_render():
    assert quantize_micro(Fraction(1, 3)) == 333_333
    assert money_str(Fraction(7, 2)) == "3.5"
    assert money_str(Fraction(-2)) == "-2"
