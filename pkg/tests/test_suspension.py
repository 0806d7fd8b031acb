import math
import random
from fractions import Fraction

import pytest

from conftest import SQRT5, golden_321, random_irreducible, random_sqrt2_lengths
from expflow.exactnum import Quad
from expflow.iem import Certificate, IntervalExchange, conjugate_by_rotation, singular_set
from expflow.suspension import (FlowSurfaceDescriptor, ReduciblePermutation, circle_classes,
                                descriptor, is_expansive_flow, suspend, torus_descriptor,
                                vertex_classes)


def _corner_angles(c):
    pts = c.polygon_points()
    out = []
    for i in range(len(pts)):
        a, b, d = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
        th = math.atan2(a[1] - b[1], a[0] - b[0]) - math.atan2(d[1] - b[1], d[0] - b[0])
        out.append(th % (2 * math.pi))
    return out


def test_multiplicities_match_cone_angles(rng):
    # independent oracle: total polygon angle at each class is 2 pi k
    for _ in range(100):
        n = rng.randint(2, 8)
        f = IntervalExchange(random_sqrt2_lengths(rng, n), random_irreducible(rng, n))
        c = suspend(f)
        assert c.pairing_ok()
        ang = _corner_angles(c)
        for g, k in zip(c.classes, c.multiplicities):
            assert abs(sum(ang[i] for i in g) / (2 * math.pi) - k) < 1e-9


def test_known_strata():
    f = IntervalExchange([Fraction(1, 4)] * 4, [4, 3, 2, 1])
    assert suspend(f).multiplicities == (3,)
    f = IntervalExchange([Fraction(1, 3)] * 3, [3, 2, 1])
    assert suspend(f).multiplicities == (1, 1)
    f = IntervalExchange([Fraction(1, 5)] * 5, [5, 4, 3, 2, 1])
    assert sorted(suspend(f).multiplicities) == [2, 2]


def test_reducible():
    with pytest.raises(ReduciblePermutation):
        suspend(IntervalExchange([Fraction(1, 3)] * 3, [1, 3, 2]))


def test_vertex_records():
    recs = vertex_classes(suspend(golden_321()))
    assert [r.index for r in recs] == [0, 0]


def test_circle_index_zero_is_removable(rng):
    for _ in range(50):
        n = rng.randint(2, 7)
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        f = IntervalExchange(random_sqrt2_lengths(rng, n), perm)
        classes = circle_classes(f)
        zero = {cl.breakpoints[0] for cl in classes if cl.k == 1}
        assert zero == set(singular_set(f).removable)
        assert sum(cl.k for cl in classes) == n


def test_descriptor_relabel_invariant():
    a = Quad.sqrt(2) / 4
    f = IntervalExchange([a, Fraction(1, 2) - a, Fraction(1, 5), Fraction(3, 10)], [4, 3, 2, 1])
    g = conjugate_by_rotation(f, Fraction(1, 2))
    df, dg = descriptor(f, budget=500), descriptor(g, budget=500)
    assert (df.h, sorted(s.k for s in df.singularities)) == \
        (dg.h, sorted(s.k for s in dg.singularities))
    assert is_expansive_flow(df).verdict == is_expansive_flow(dg).verdict


def test_expansive_flow_rules():
    d = descriptor(golden_321())
    assert d.h == 2 and d.index_sum() == d.chi == -2
    assert is_expansive_flow(d).verdict == "Yes"
    assert is_expansive_flow(torus_descriptor()).verdict == "No"
    rot = descriptor(IntervalExchange.rotation((SQRT5 - 1) / 2))
    assert rot.is_torus and is_expansive_flow(rot).verdict == "No"
    per = FlowSurfaceDescriptor(True, 2, 0, 0, d.singularities,
                                Certificate("Yes", {"point": "1/3", "period": 2}))
    assert is_expansive_flow(per).verdict == "No"
    unk = FlowSurfaceDescriptor(True, 2, 0, 0, d.singularities, Certificate("Unknown", depth=40))
    cert = is_expansive_flow(unk)
    assert cert.verdict == "Yes" and cert.conditional and cert.depth == 40


def test_descriptor_roundtrip():
    d = descriptor(golden_321())
    e = FlowSurfaceDescriptor.from_dict(d.to_dict())
    assert e.to_dict() == d.to_dict()
