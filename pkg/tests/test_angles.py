import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flagforge.angles import DyadicAngle


def test_make_reduces_to_canonical():
    a = DyadicAngle.make(4, 3)
    assert (a.numerator, a.log2_denom) == (1, 1)
    assert DyadicAngle.make(6, 1) == DyadicAngle(3, 0)
    assert DyadicAngle.make(0, 7) == DyadicAngle(0, 0)


def test_raw_constructor_rejects_non_canonical():
    with pytest.raises(ValueError):
        DyadicAngle(2, 1)
    with pytest.raises(ValueError):
        DyadicAngle(0, 3)
    with pytest.raises(ValueError):
        DyadicAngle(1, -1)


def test_pi_over_and_sign():
    t = DyadicAngle.pi_over(2)
    assert t.turns_of_pi == Fraction(1, 4)
    assert DyadicAngle.pi_over(2, -1).turns_of_pi == Fraction(-1, 4)
    with pytest.raises(ValueError):
        DyadicAngle.pi_over(2, 2)


def test_binary_fraction_forms():
    assert DyadicAngle.from_binary_fraction("0.1").turns_of_pi == Fraction(1, 2)
    assert DyadicAngle.from_binary_fraction("1.01").turns_of_pi == Fraction(5, 4)
    assert DyadicAngle.from_binary_fraction(".101").turns_of_pi == Fraction(5, 8)
    assert DyadicAngle.from_binary_fraction("11").turns_of_pi == 3
    assert DyadicAngle.from_binary_fraction("-0.11").turns_of_pi == Fraction(-3, 4)
    for bad in ("", ".", "0.2", "abc", "0.0"):
        with pytest.raises(ValueError):
            DyadicAngle.from_binary_fraction(bad)


def test_arithmetic():
    t = DyadicAngle.pi_over(2)
    assert t + t == DyadicAngle.pi_over(1)
    assert t - t == DyadicAngle.zero()
    assert (-t).radians() == -t.radians()
    assert t.doubled() == DyadicAngle.pi_over(1)
    assert t.halved() == DyadicAngle.pi_over(3)
    assert DyadicAngle(3, 0).doubled() == DyadicAngle(6, 0)
    assert math.isclose(t.radians(), math.pi / 4)


def test_parse_inverts_str():
    for a in (DyadicAngle.zero(), DyadicAngle.pi_over(3), DyadicAngle(-5, 2),
              DyadicAngle(7, 0)):
        assert DyadicAngle.parse(str(a)) == a
    assert DyadicAngle.parse(" -3/8 ") == DyadicAngle(-3, 3)
    assert DyadicAngle.parse("2") == DyadicAngle(2, 0)
    with pytest.raises(ValueError):
        DyadicAngle.parse("1/3")
    with pytest.raises(ValueError):
        DyadicAngle.parse("1/0")


@given(st.integers(-1000, 1000), st.integers(0, 20))
def test_make_always_canonical(num, l):
    a = DyadicAngle.make(num, l)
    assert a.numerator % 2 or a.numerator == 0 or a.log2_denom == 0
    assert a.turns_of_pi == Fraction(num, 2**l)
    assert DyadicAngle.parse(str(a)) == a


@given(st.integers(-64, 64), st.integers(0, 8), st.integers(-64, 64),
       st.integers(0, 8))
def test_addition_matches_fractions(n1, l1, n2, l2):
    a, b = DyadicAngle.make(n1, l1), DyadicAngle.make(n2, l2)
    assert (a + b).turns_of_pi == a.turns_of_pi + b.turns_of_pi
    assert (a - b).turns_of_pi == a.turns_of_pi - b.turns_of_pi
    assert a.doubled().turns_of_pi == 2 * a.turns_of_pi
    assert a.halved().turns_of_pi == a.turns_of_pi / 2
