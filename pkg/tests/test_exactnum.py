from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from expflow.exactnum import MismatchedField, Quad, parse_scalar, qfloor, qmod1, sqrt_sign

fr = st.fractions(min_value=-50, max_value=50, max_denominator=60)
ds = st.sampled_from([2, 3, 5, 7])


@given(fr, fr, ds)
def test_sign_matches_float(a, b, d):
    x = Quad(a, b, d)
    v = float(a) + float(b) * d ** 0.5
    if abs(v) > 1e-9:
        assert x.sign() == (1 if v > 0 else -1)


@given(fr, fr, fr, fr, ds)
def test_field_axioms(a, b, c, e, d):
    x, y = Quad(a, b, d), Quad(c, e, d)
    assert x + y - y == x
    assert (x * y) == (y * x)
    if y:
        assert (x / y) * y == x


@given(fr, fr, ds)
def test_floor_and_mod(a, b, d):
    x = Quad(a, b, d)
    k = qfloor(x)
    assert k <= x < k + 1
    r = qmod1(x)
    assert 0 <= r < 1 and (x - r).is_rational


@given(fr, fr, ds)
def test_str_roundtrip(a, b, d):
    x = Quad(a, b, d)
    assert parse_scalar(str(x)) == x


def test_known_values():
    s2 = Quad.sqrt(2)
    assert s2 * s2 == 2
    assert (s2 - 1) * (s2 + 1) == 1
    assert str(3 - 2 * s2) == "3-2*sqrt(2)"
    assert str(-s2) == "-sqrt(2)"
    assert sqrt_sign(-7, 5, 2) == 1 and sqrt_sign(7, -5, 2) == -1
    assert sqrt_sign(-3, 1, 9) == 0
    assert Quad(Fraction(1, 2)) == Fraction(1, 2)


def test_errors():
    with pytest.raises(MismatchedField):
        Quad.sqrt(2) + Quad.sqrt(3)
    with pytest.raises(ZeroDivisionError):
        Quad.sqrt(5) / Quad(0)
    with pytest.raises(ValueError):
        Quad(0, 1, 4)
    with pytest.raises(ValueError):
        parse_scalar("1.5")
    with pytest.raises(MismatchedField):
        parse_scalar("sqrt(3)", d=2)


def test_rational_mixes_with_any_field():
    assert (Quad.sqrt(2) + 1) * Fraction(1, 3) == Quad(Fraction(1, 3), Fraction(1, 3), 2)
    assert (Quad.sqrt(2) - Quad.sqrt(2) + Quad.sqrt(3)).d == 3
