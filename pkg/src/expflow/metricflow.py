"""Orbit distance and pairwise separation tests for suspension flows.

The flow is the suspension of a circle exchange ``f`` under the constant roof
1: a point is ``(x, h)`` with ``0 <= h < 1`` and ``(x, 1)`` is identified with
``(f(x), 0)``.  Distances use the max of the circle distance on the base and
the height gap, minimised over the wrap through the roof.  Everything is exact.

Reparametrisations are restricted to the canonical pairing that matches the
n-th section return of one orbit with the n-th return of the other.  A pair
that stays close under this pairing is evidence, not proof, against
expansiveness.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import Quad, as_quad, qmod1, sqrt_sign
from .iem import DomainError, IntervalExchange, apply, circle_distance, inverse

__all__ = [
    "SuspensionPoint", "SuspensionFlow", "SingularHit", "PairResult", "KStarResult",
    "DIAMETER", "distance", "dist_phi", "beta0_lower_bound", "expansive_pair_test",
    "kstar_pair_test",
]

DIAMETER = Quad(Fraction(1, 2))


class SingularHit(ValueError):
    def __init__(self, msg: str, witness: dict):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class SuspensionPoint:
    base: Quad
    height: Quad = Quad(0)

    def __post_init__(self):
        object.__setattr__(self, "base", qmod1(as_quad(self.base)))
        h = as_quad(self.height)
        if h < 0 or h >= 1:
            raise ValueError(f"height {h} is not below the roof")
        object.__setattr__(self, "height", h)

    def to_dict(self):
        return {"base": str(self.base), "height": str(self.height)}


@dataclass
class SuspensionFlow:
    f: IntervalExchange
    _inv: IntervalExchange | None = field(default=None, repr=False)

    @property
    def inv(self) -> IntervalExchange:
        if self._inv is None:
            self._inv = inverse(self.f)
        return self._inv

    def forward(self, x: Quad, k: int) -> Quad:
        g = self.f if k >= 0 else self.inv
        for _ in range(abs(k)):
            try:
                x = apply(g, x)
            except DomainError:
                raise SingularHit(f"orbit of {x} meets a breakpoint",
                                  {"point": str(x), "steps": k}) from None
        return x

    def flow(self, p: SuspensionPoint, t) -> SuspensionPoint:
        t = as_quad(t)
        s = p.height + t
        k = s.floor()
        return SuspensionPoint(self.forward(p.base, k), s - k)

    def roof_image(self, x: Quad) -> Quad:
        """Where ``(x, 1-)`` continues: the right limit at a breakpoint."""
        return self.f.right_limit(x) if x in self.f.breakpoints else apply(self.f, x)


def distance(flow: SuspensionFlow, p: SuspensionPoint, q: SuspensionPoint,
             roofs: tuple[Quad, Quad] | None = None) -> Quad:
    rp, rq = roofs or (flow.roof_image(p.base), flow.roof_image(q.base))
    d = max(circle_distance(p.base, q.base), abs(p.height - q.height))
    # one of the points may sit just below the roof
    d = min(d, max(circle_distance(rp, q.base), abs(p.height - 1 - q.height)))
    d = min(d, max(circle_distance(p.base, rq), abs(q.height - 1 - p.height)))
    return d


def _orbit_offset(flow: SuspensionFlow, x: Quad, y: Quad, horizon: int) -> int | None:
    """Some ``j`` with ``f^j(x) = y`` and ``|j| <= horizon``, smallest first."""
    if x == y:
        return 0
    fwd, bwd = x, x
    for j in range(1, horizon + 1):
        try:
            fwd = apply(flow.f, fwd) if fwd is not None else None
        except DomainError:
            fwd = None
        if fwd == y:
            return j
        try:
            bwd = apply(flow.inv, bwd) if bwd is not None else None
        except DomainError:
            bwd = None
        if bwd == y:
            return -j
        if fwd is None and bwd is None:
            break
    return None


def _segment_samples(flow: SuspensionFlow, p: SuspensionPoint, j: int,
                     end: SuspensionPoint) -> list[SuspensionPoint]:
    """Endpoints of the vertical pieces of the orbit segment from ``p`` to ``end``."""
    pts = [p]
    x = p.base
    for _ in range(j):
        x = flow.forward(x, 1)
        pts.append(SuspensionPoint(x, 0))
    pts.append(end)
    return pts


def _diameter(flow: SuspensionFlow, pts: list[SuspensionPoint]) -> Quad:
    roofs = [flow.roof_image(p.base) for p in pts]
    best = Quad(0)
    for i, a in enumerate(pts):
        for k in range(i + 1, len(pts)):
            best = max(best, distance(flow, a, pts[k], (roofs[i], roofs[k])))
            if best == DIAMETER:
                return best
    return best


def dist_phi(flow: SuspensionFlow, p: SuspensionPoint, q: SuspensionPoint,
             horizon: int = 50) -> Quad:
    """Diameter of the shortest orbit segment through both points.

    The diameter is taken over the piece endpoints of the segment.  Points
    not joined by an orbit segment within ``horizon`` returns get the
    diameter of the whole surface.
    """
    if p == q:
        return Quad(0)
    j = _orbit_offset(flow, p.base, q.base, horizon)
    if j is None:
        return DIAMETER
    if j < 0 or (j == 0 and q.height < p.height):
        p, q, j = q, p, -j
    return _diameter(flow, _segment_samples(flow, p, j, q))


def beta0_lower_bound(flow: SuspensionFlow, samples: int = 20, length: int = 20,
                      seed: int = 0) -> Quad:
    """Smallest diameter among ``samples`` orbit segments of ``length`` returns.

    A sampling estimate of beta0, not a certified bound.
    """
    rng = random.Random(seed)
    best = None
    for _ in range(samples):
        x = Quad(Fraction(rng.randint(1, 10**6 - 1), 10**6))
        try:
            pts = _segment_samples(flow, SuspensionPoint(x), length - 1,
                                   SuspensionPoint(flow.forward(x, length)))
        except SingularHit:
            continue
        d = _diameter(flow, pts)
        best = d if best is None else min(best, d)
    return best if best is not None else Quad(0)


def _scaled_circle_distance(ker, a, b):
    du, dv = a[0] - b[0], a[1] - b[1]
    if sqrt_sign(du, dv, ker.d) < 0:
        du, dv = -du, -dv
    if sqrt_sign(2 * du - ker.L, 2 * dv, ker.d) > 0:
        du, dv = ker.L - du, -dv
    return du, dv


@dataclass(frozen=True)
class PairResult:
    separated: bool
    n: int | None                   # return index of the first separation
    sup: Quad                       # sup of matched distances seen so far
    distance: Quad | None = None    # distance at separation
    dphi: Quad | None = None        # orbit distance of the pair when not separated
    hit: dict | None = None

    def to_dict(self):
        def s(v):
            return None if v is None else str(v)
        return {"separated": self.separated, "n": self.n, "sup": s(self.sup),
                "distance": s(self.distance), "dphi": s(self.dphi), "hit": self.hit}


def expansive_pair_test(flow: SuspensionFlow, p: SuspensionPoint, q: SuspensionPoint, delta,
                        horizon: int = 1000, strict: bool = False) -> PairResult:
    """Follow both orbits under the return-to-return pairing.

    Between returns the paired points sit at matching heights, so the
    matched distance only changes at the start and at each return.  With
    ``strict`` a singular hit raises :class:`SingularHit`; otherwise it is
    reported in the result.
    """
    delta = as_quad(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    d0 = distance(flow, p, q)
    if d0 > delta:
        return PairResult(True, 0, d0, d0)
    sup = d0
    if p.base == q.base:
        return PairResult(False, None, sup, dphi=dist_phi(flow, p, q))
    ker = flow.f.kernel(p.base, q.base, delta, sup)
    a, b = ker.scale(p.base), ker.scale(q.base)
    dl, top = ker.scale(delta), ker.scale(sup)
    for n in range(1, horizon + 1):
        a2, i = ker.step(a)
        b2, j = ker.step(b)
        if a2 is None or b2 is None:
            who, k = ("x", i) if a2 is None else ("y", j)
            w = {"orbit": who, "breakpoint": str(flow.f.breakpoints[k]), "return": n - 1}
            if strict:
                raise SingularHit("orbit enters a singular point", w)
            return PairResult(False, n - 1, ker.unscale(top), hit=w)
        a, b = a2, b2
        d = _scaled_circle_distance(ker, a, b)
        if ker.cmp(d, top) > 0:
            top = d
        if ker.cmp(d, dl) > 0:
            return PairResult(True, n, ker.unscale(top), ker.unscale(d))
    sup = ker.unscale(top)
    return PairResult(False, None, sup, dphi=dist_phi(flow, p, q))


@dataclass(frozen=True)
class KStarResult:
    verdict: str                    # 'witness' | 'separated' | 'failure'
    t0: Quad | None = None
    s: Quad | None = None
    pair: PairResult | None = None

    def to_dict(self):
        return {"verdict": self.verdict, "t0": None if self.t0 is None else str(self.t0),
                "s": None if self.s is None else str(self.s),
                "pair": self.pair.to_dict() if self.pair else None}


def kstar_pair_test(flow: SuspensionFlow, p: SuspensionPoint, q: SuspensionPoint, delta, eps,
                    horizon: int = 1000) -> KStarResult:
    """Look for ``(t0, s)`` with ``|s| < eps`` and ``phi_{h(t0)}(p) = phi_{t0+s}(q)``.

    ``t0`` is a time of ``q`` and ``h`` the canonical pairing.  At ``t0 = 0``
    the offset is minus the flow time from ``p`` to ``q``; at the first
    matched return it is zero when both bases coincide.
    """
    eps = as_quad(eps)
    pair = expansive_pair_test(flow, p, q, delta, horizon)
    if pair.separated:
        return KStarResult("separated", pair=pair)
    j = _orbit_offset(flow, p.base, q.base, min(horizon, 50))
    if j is not None:
        sigma = j + q.height - p.height          # q = phi_sigma(p)
        cands = [(Quad(0), -sigma)]
        if j == 0:
            cands.append((1 - q.height, Quad(0)))
        t0, s = min(cands, key=lambda c: abs(c[1]))
        if abs(s) < eps:
            h_t0 = Quad(0) if t0 == 0 else 1 - p.height
            assert flow.flow(p, h_t0) == flow.flow(q, t0 + s)
            return KStarResult("witness", t0, s, pair)
    return KStarResult("failure", pair=pair)
