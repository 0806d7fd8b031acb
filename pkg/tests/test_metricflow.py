from fractions import Fraction as F

import pytest

from conftest import SQRT2, golden_321
from expflow.exactnum import Quad
from expflow.iem import IntervalExchange, separation_test
from expflow.metricflow import (DIAMETER, SingularHit, SuspensionFlow, SuspensionPoint,
                                beta0_lower_bound, dist_phi, distance, expansive_pair_test,
                                kstar_pair_test)


@pytest.fixture
def flow():
    return SuspensionFlow(golden_321())


def test_point_validation():
    with pytest.raises(ValueError):
        SuspensionPoint(F(1, 3), 1)
    assert SuspensionPoint(F(4, 3)).base == Quad(F(1, 3))


def test_flow_composes(flow):
    p = SuspensionPoint(F(1, 10), F(1, 3))
    assert flow.flow(flow.flow(p, F(7, 4)), F(-7, 4)) == p
    assert flow.flow(p, 2) == flow.flow(flow.flow(p, 1), 1)


def test_roof_wrap(flow):
    p = SuspensionPoint(F(1, 10), F(99, 100))
    q = flow.flow(p, F(2, 100))
    assert q.height == F(1, 100)
    assert distance(flow, p, q) == F(2, 100)


def test_dist_phi_basics(flow, rng):
    p = SuspensionPoint(F(1, 10), F(1, 3))
    assert dist_phi(flow, p, p) == 0
    q = flow.flow(p, F(1, 100))
    assert dist_phi(flow, p, q) == dist_phi(flow, q, p) == F(1, 100)
    other = SuspensionPoint(F(1, 10) + SQRT2 / 1000, F(1, 3))
    assert dist_phi(flow, p, other) == DIAMETER
    for _ in range(30):
        a = SuspensionPoint(Quad(F(rng.randint(1, 999), 1000)), F(rng.randint(0, 9), 10))
        b = flow.flow(a, F(rng.randint(-30, 30), 10))
        assert dist_phi(flow, a, b) == dist_phi(flow, b, a) <= DIAMETER


def test_beta0_bound(flow):
    b = beta0_lower_bound(flow, samples=5, length=12)
    assert 0 < b <= DIAMETER
    # a longer segment can only have a larger diameter
    assert beta0_lower_bound(flow, samples=5, length=24) >= b


def test_pair_test_matches_separation(flow, rng):
    f = flow.f
    delta = min(f.lengths) * F(3, 10)
    for _ in range(40):
        x = Quad(F(rng.randint(1, 10**6 - 1), 10**6))
        y = x + Quad(F(rng.randint(1, 999), 10**6))
        r = expansive_pair_test(flow, SuspensionPoint(x), SuspensionPoint(y), delta, 10**4)
        s = separation_test(f, x, y, delta, 10**4)
        assert r.separated == s.separated
        assert r.n == s.n


def test_pair_test_same_point(flow):
    p = SuspensionPoint(F(1, 7), F(1, 2))
    r = expansive_pair_test(flow, p, p, F(1, 100))
    assert not r.separated and r.sup == 0 and r.dphi == 0


def test_singular_hit(flow):
    b = flow.f.breakpoints[1]
    p, q = SuspensionPoint(b - F(1, 10**6)), SuspensionPoint(b)
    assert expansive_pair_test(flow, p, q, F(1, 2)).hit["orbit"] == "y"
    with pytest.raises(SingularHit):
        expansive_pair_test(flow, p, q, F(1, 2), strict=True)


def test_rotation_pairs_stay_close():
    flow = SuspensionFlow(IntervalExchange.rotation(SQRT2 - 1))
    p, q = SuspensionPoint(F(1, 10)), SuspensionPoint(F(11, 100))
    r = expansive_pair_test(flow, p, q, F(1, 50), 2000)
    assert not r.separated and r.sup == F(1, 100)
    assert r.dphi == DIAMETER


def test_kstar(flow):
    p = SuspensionPoint(F(1, 10), F(1, 3))
    q = flow.flow(p, F(1, 100))
    k = kstar_pair_test(flow, p, q, F(1, 10), F(1, 20))
    assert k.verdict == "witness" and abs(k.s) < F(1, 20)
    far = SuspensionPoint(F(1, 10) + F(1, 1000), F(1, 3))
    assert kstar_pair_test(flow, p, far, min(flow.f.lengths) * F(3, 10), F(1, 20),
                           10**5).verdict == "separated"
