import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import SQRT2, SQRT5, golden_321, random_rational_lengths, random_sqrt2_lengths
from expflow.exactnum import Quad, qmod1
from expflow.iem import (DomainError, IntervalExchange, apply, conjugate_by_rotation,
                         detect_periodic, inverse, is_expansive_iem, orbit,
                         saddle_connection_search, separation_test, singular_set,
                         verify_connection, verify_periodic)


def test_two_interval_swap():
    f = IntervalExchange([Fraction(3, 10), Fraction(7, 10)], [2, 1])
    assert f(Fraction(1, 10)) == Fraction(4, 5)
    assert f(Fraction(1, 2)) == Fraction(1, 5)
    # a swap is a rotation: both breakpoints are removable
    assert singular_set(f).singular == ()
    assert len(singular_set(f).removable) == 2


def test_validation():
    with pytest.raises(ValueError):
        IntervalExchange([Fraction(1, 2), Fraction(1, 3)], [2, 1])
    with pytest.raises(ValueError):
        IntervalExchange([Fraction(1, 2), Fraction(1, 2)], [1, 1])
    with pytest.raises(ValueError):
        IntervalExchange([Fraction(3, 2), Fraction(-1, 2)], [2, 1])
    with pytest.raises(TypeError):
        IntervalExchange([0.5, 0.5], [2, 1])
    f = golden_321()
    with pytest.raises(DomainError):
        f(f.breakpoints[1])


def test_golden_321_data():
    f = golden_321()
    assert f.breakpoints == (Quad(0), (3 - SQRT5) / 2, 3 - SQRT5)
    assert len(singular_set(f).singular) == 3
    # irrational parts of the translations all share a sign
    assert len({t.b > 0 for t in f.translations}) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10**6))
def test_inverse_roundtrip(n, seed):
    rng = random.Random(seed)
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    f = IntervalExchange(random_sqrt2_lengths(rng, n), perm)
    g = inverse(f)
    x = qmod1(Quad(Fraction(rng.randint(0, 997), 997), Fraction(1, 101), 2))
    if x in f.breakpoints:
        return
    assert apply(g, apply(f, x)) == x


def test_json_roundtrip():
    f = golden_321()
    assert IntervalExchange.from_dict(f.to_dict()) == f
    with pytest.raises(ValueError):
        IntervalExchange.from_dict({"n": 4, "lengths": ["1/2", "1/2"], "permutation": [2, 1]})


def test_orbit_truncates_at_breakpoint():
    f = IntervalExchange([Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)], [3, 2, 1])
    res = orbit(f, Fraction(1, 8), 5)
    assert res.hit is None and len(res.points) == 6
    res = orbit(f, Fraction(1, 2), 3)
    assert res.hit == Fraction(1, 2) and res.hit_step == 0


def test_rational_periodic_and_connection(rng):
    f = IntervalExchange(random_rational_lengths(rng, 4, 60), [4, 2, 3, 1])
    cert = detect_periodic(f)
    assert cert.verdict == "Yes" and verify_periodic(f, cert.witness)
    conn = saddle_connection_search(f, 1000)
    if singular_set(f).singular:
        assert conn.verdict == "Yes" and verify_connection(f, conn.witness)


def test_rotation_not_expansive():
    r = IntervalExchange.rotation((SQRT5 - 1) / 2)
    assert is_expansive_iem(r).verdict == "No"
    assert detect_periodic(r).verdict == "No"


def test_drift_certificate():
    cert = is_expansive_iem(golden_321())
    assert cert.verdict == "Yes" and not cert.conditional


def test_degenerate_321_is_periodic():
    # equal outer lengths make the middle translation vanish
    f = IntervalExchange([SQRT2 - 1, 3 - 2 * SQRT2, SQRT2 - 1], [3, 2, 1])
    assert f.translations[1] == 0
    cert = is_expansive_iem(f)
    assert cert.verdict == "No" and verify_periodic(f, cert.witness)


def test_conjugate_by_rotation():
    a = SQRT2 / 4
    f = IntervalExchange([a, Fraction(1, 2) - a, Fraction(1, 5), Fraction(3, 10)], [4, 3, 2, 1])
    g = conjugate_by_rotation(f, Fraction(1, 2))
    for x in (Quad(Fraction(1, 7)), SQRT2 / 3, Quad(Fraction(9, 10))):
        assert g(x) == qmod1(f(qmod1(x + Fraction(1, 2))) - Fraction(1, 2))
    with pytest.raises(ValueError):
        conjugate_by_rotation(f, Fraction(1, 3))


def test_separation_basic():
    f = golden_321()
    x = Quad(Fraction(1, 10), Fraction(1, 1000), 5)
    y = x + Fraction(1, 10**4)
    res = separation_test(f, x, y, Fraction(1, 20), 10**5)
    assert res.separated and res.n > 0 and res.distance > Fraction(1, 20)
    same = separation_test(f, x, x, Fraction(1, 20), 10)
    assert not same.separated
    with pytest.raises(ValueError):
        separation_test(f, x, y, 0)
