"""Interval exchange maps of the circle R/Z.

An :class:`IntervalExchange` cuts ``[0, 1)`` into ``n`` half-open intervals
``I_1, ..., I_n`` (left to right) and translates them, modulo 1, so that the
images appear in the order given by the permutation: ``permutation[i]`` is
the (1-based) position of the image of ``I_{i+1}``.

All computations are exact.  Internally every orbit is iterated on integer
pairs ``(u, v)`` standing for ``(u + v*sqrt(d)) / L`` with a common
denominator ``L``; see :class:`_Kernel`.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .exactnum import Quad, as_quad, parse_scalar, qmod1, sqrt_sign

__all__ = [
    "IntervalExchange", "DomainError", "Certificate", "SingularData", "OrbitResult",
    "SeparationResult", "apply", "orbit", "singular_set", "detect_periodic",
    "saddle_connection_search", "is_expansive_iem", "separation_test",
    "circle_distance", "inverse", "conjugate_by_rotation", "verify_periodic",
    "verify_connection", "irrational_drift", "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10_000


class DomainError(ValueError):
    """Raised when a map is evaluated on one of its breakpoints."""


def circle_distance(x: Quad, y: Quad) -> Quad:
    g = abs(x - y)
    g = g - g.floor()
    return min(g, 1 - g)


@dataclass(frozen=True)
class Certificate:
    """Outcome of a (semi-)decision with a re-checkable witness.

    ``verdict`` is ``"Yes"``, ``"No"`` or ``"Unknown"``.  ``conditional`` marks a
    ``Yes`` that rests on a search exhausted to ``depth`` rather than on an
    exact argument.
    """

    verdict: str
    witness: dict | None = None
    conditional: bool = False
    depth: int | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "conditional": self.conditional,
               "depth": self.depth, "reason": self.reason,
               "witness": _jsonable(self.witness)}
        return out

    @property
    def klass(self) -> tuple:
        return (self.verdict, self.conditional)


def _jsonable(obj):
    if isinstance(obj, (Quad, Fraction)):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


class _Kernel:
    """Integer-scaled copy of an IEM for fast exact iteration.

    A point ``(u, v)`` denotes ``(u + v*sqrt(d)) / L``.
    """

    def __init__(self, f: "IntervalExchange", L: int):
        self.L = L
        self.d = f.d
        self.sd = math.sqrt(f.d)
        self.breaks = [self.scale(a) for a in f.breakpoints]
        self.trans = [self.scale(t) for t in f.translations]
        self.fbreaks = [self.approx(p) for p in self.breaks]
        self.n = f.n

    def scale(self, x: Quad) -> tuple[int, int]:
        u = x.a * self.L
        v = x.b * self.L
        if u.denominator != 1 or v.denominator != 1:
            raise ValueError("point not on kernel grid")
        return int(u), int(v)

    def unscale(self, p: tuple[int, int]) -> Quad:
        return Quad(Fraction(p[0], self.L), Fraction(p[1], self.L), self.d)

    def approx(self, p) -> float:
        return (p[0] + p[1] * self.sd) / self.L

    def cmp(self, p, q) -> int:
        return sqrt_sign(p[0] - q[0], p[1] - q[1], self.d)

    def locate(self, p) -> int:
        """Index of the interval containing ``p``, or ``-1 - j`` if ``p`` is breakpoint ``j``."""
        i = bisect.bisect_right(self.fbreaks, self.approx(p)) - 1
        i = min(max(i, 0), self.n - 1)
        # float guess is off by at most one; fix exactly
        while i > 0 and self.cmp(p, self.breaks[i]) < 0:
            i -= 1
        while i + 1 < self.n and self.cmp(p, self.breaks[i + 1]) >= 0:
            i += 1
        if p == self.breaks[i]:
            return -1 - i
        return i

    def reduce(self, p):
        u, v = p
        L = self.L
        while sqrt_sign(u - L, v, self.d) >= 0:
            u -= L
        while sqrt_sign(u, v, self.d) < 0:
            u += L
        return (u, v)

    def step(self, p):
        i = self.locate(p)
        if i < 0:
            return None, -1 - i
        t = self.trans[i]
        return self.reduce((p[0] + t[0], p[1] + t[1])), i


def _den(x: Quad) -> int:
    return math.lcm(x.a.denominator, x.b.denominator)


class IntervalExchange:
    """Orientation-preserving interval exchange of the circle ``R/Z``."""

    def __init__(self, lengths: Sequence, permutation: Sequence[int]):
        lengths = tuple(as_quad(x) for x in lengths)
        perm = tuple(int(p) for p in permutation)
        n = len(lengths)
        if n == 0 or len(perm) != n:
            raise ValueError("lengths and permutation must have the same positive size")
        if sorted(perm) != list(range(1, n + 1)):
            raise ValueError(f"{list(perm)} is not a permutation of 1..{n}")
        ds = {x.d for x in lengths if not x.is_rational}
        if len(ds) > 1:
            raise ValueError(f"lengths live in different fields {sorted(ds)}")
        if any(x.sign() <= 0 for x in lengths):
            raise ValueError("interval lengths must be positive")
        if sum(lengths, Quad(0)) != 1:
            raise ValueError("interval lengths must sum to 1")
        self.lengths = lengths
        self.permutation = perm
        self.n = n
        self.d = ds.pop() if ds else 1
        self._kernels: dict[int, _Kernel] = {}

    # -- derived data ---------------------------------------------------

    @cached_property
    def breakpoints(self) -> tuple[Quad, ...]:
        out, acc = [], Quad(0)
        for x in self.lengths:
            out.append(acc)
            acc = acc + x
        return tuple(out)

    @cached_property
    def image_starts(self) -> tuple[Quad, ...]:
        order = sorted(range(self.n), key=lambda i: self.permutation[i])
        starts = [Quad(0)] * self.n
        acc = Quad(0)
        for i in order:
            starts[i] = acc
            acc = acc + self.lengths[i]
        return tuple(starts)

    @cached_property
    def translations(self) -> tuple[Quad, ...]:
        """Displacement of each interval, normalised into ``(-1, 1)``."""
        return tuple(s - a for s, a in zip(self.image_starts, self.breakpoints))

    @property
    def image_breakpoints(self) -> tuple[Quad, ...]:
        return tuple(sorted(set(self.image_starts)))

    @property
    def is_rational(self) -> bool:
        return all(x.is_rational for x in self.lengths)

    @cached_property
    def denominator(self) -> int:
        L = 1
        for x in self.lengths:
            L = math.lcm(L, _den(x))
        return L

    def kernel(self, *points: Quad) -> _Kernel:
        L = self.denominator
        for p in points:
            L = math.lcm(L, _den(p))
        k = self._kernels.get(L)
        if k is None:
            k = self._kernels[L] = _Kernel(self, L)
        return k

    def interval_of(self, x: Quad) -> int:
        """0-based index of the interval containing ``x``; DomainError on a breakpoint."""
        k = self.kernel(x)
        i = k.locate(k.scale(qmod1(x)))
        if i < 0:
            raise DomainError(f"{x} is a breakpoint of the exchange")
        return i

    def __call__(self, x) -> Quad:
        return apply(self, x)

    def left_limit(self, a: Quad) -> Quad:
        """``lim_{x -> a-} f(x)`` for a breakpoint ``a``."""
        j = self.breakpoints.index(a)
        i = (j - 1) % self.n
        return qmod1(self.image_starts[i] + self.lengths[i])

    def right_limit(self, a: Quad) -> Quad:
        j = self.breakpoints.index(a)
        return self.image_starts[j]

    # -- equality / serialisation --------------------------------------

    def __eq__(self, other):
        return (isinstance(other, IntervalExchange) and self.lengths == other.lengths
                and self.permutation == other.permutation)

    def __hash__(self):
        return hash((self.lengths, self.permutation))

    def __repr__(self):
        return (f"IntervalExchange(lengths=[{', '.join(map(str, self.lengths))}], "
                f"permutation={list(self.permutation)})")

    def to_dict(self) -> dict:
        return {"n": self.n, "lengths": [str(x) for x in self.lengths],
                "permutation": list(self.permutation), "field_d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "IntervalExchange":
        d = data.get("field_d")
        d = None if d in (None, 1) else int(d)
        lengths = [parse_scalar(s, d) if isinstance(s, str) else as_quad(s)
                   for s in data["lengths"]]
        if "n" in data and int(data["n"]) != len(lengths):
            raise ValueError(f"n={data['n']} but {len(lengths)} lengths given")
        return cls(lengths, data["permutation"])

    @classmethod
    def rotation(cls, alpha) -> "IntervalExchange":
        """Rotation ``x -> x + alpha`` presented as a 2-interval swap."""
        alpha = qmod1(as_quad(alpha))
        if alpha == 0:
            return cls([1], [1])
        return cls([1 - alpha, alpha], [2, 1])

    @classmethod
    def normalized(cls, lengths, permutation) -> "IntervalExchange":
        lengths = [as_quad(x) for x in lengths]
        total = sum(lengths, Quad(0))
        return cls([x / total for x in lengths], permutation)


def inverse(f: IntervalExchange) -> IntervalExchange:
    pinv = [0] * f.n
    for i, p in enumerate(f.permutation):
        pinv[p - 1] = i + 1
    return IntervalExchange([f.lengths[pinv[k] - 1] for k in range(f.n)], pinv)


def conjugate_by_rotation(f: IntervalExchange, s) -> IntervalExchange:
    """``x -> f(x + s) - s``: the same circle map read from origin ``s``.

    ``s`` must be both a breakpoint and an image breakpoint so that the
    conjugate is again presented with ``0`` as a cut on both sides.
    """
    s = qmod1(as_quad(s))
    if s not in f.breakpoints or s not in f.image_starts:
        raise ValueError(f"{s} is not a common breakpoint of f and its image")
    j0 = f.breakpoints.index(s)
    idx = [(j0 + t) % f.n for t in range(f.n)]
    starts = [qmod1(f.image_starts[i] - s) for i in idx]
    order = sorted(range(f.n), key=lambda t: starts[t])
    perm = [0] * f.n
    for pos, t in enumerate(order):
        perm[t] = pos + 1
    return IntervalExchange([f.lengths[i] for i in idx], perm)


def apply(f: IntervalExchange, x) -> Quad:
    x = qmod1(as_quad(x))
    k = f.kernel(x)
    q, i = k.step(k.scale(x))
    if q is None:
        raise DomainError(f"{x} is a breakpoint of the exchange")
    return k.unscale(q)


@dataclass(frozen=True)
class SingularData:
    singular: tuple[Quad, ...]
    removable: tuple[Quad, ...]

    def to_dict(self):
        return {"singular": [str(a) for a in self.singular],
                "removable": [str(a) for a in self.removable]}


def singular_set(f: IntervalExchange) -> SingularData:
    sing, rem = [], []
    for a in f.breakpoints:
        (sing if f.left_limit(a) != f.right_limit(a) else rem).append(a)
    return SingularData(tuple(sing), tuple(rem))


@dataclass(frozen=True)
class OrbitResult:
    points: tuple[Quad, ...]
    hit: Quad | None = None
    hit_step: int | None = None

    def to_dict(self):
        return {"points": [str(p) for p in self.points],
                "hit": None if self.hit is None else str(self.hit),
                "hit_step": self.hit_step}


def orbit(f: IntervalExchange, x, k: int) -> OrbitResult:
    """``[x, f(x), ..., f^k(x)]``, truncated at the first breakpoint met.

    When ``f^j(x)`` is a breakpoint the orbit stops there with ``hit_step = j``.
    """
    x = qmod1(as_quad(x))
    ker = f.kernel(x)
    p = ker.scale(x)
    pts = [p]
    for j in range(k):
        q, i = ker.step(p)
        if q is None:
            return OrbitResult(tuple(ker.unscale(t) for t in pts), f.breakpoints[i], j)
        pts.append(q)
        p = q
    if ker.locate(p) < 0:
        return OrbitResult(tuple(ker.unscale(t) for t in pts), ker.unscale(p), k)
    return OrbitResult(tuple(ker.unscale(t) for t in pts))


# -- periodicity --------------------------------------------------------


def _first_return(ker: _Kernel, p, limit: int) -> int | None:
    q = p
    for j in range(1, limit + 1):
        q, _ = ker.step(q)
        if q is None:
            return None
        if q == p:
            return j
    return None


def _preimage_cells(f: IntervalExchange, levels: int) -> list[Quad]:
    """Midpoints of the partition of the circle by ``f^{-j}(A)``, ``0 <= j < levels``."""
    g = inverse(f)
    cuts = set(f.breakpoints)
    front = set(f.breakpoints)
    for _ in range(levels - 1):
        nxt = set()
        for a in front:
            try:
                nxt.add(apply(g, a))
            except DomainError:
                pass
        nxt -= cuts
        if not nxt:
            break
        cuts |= nxt
        front = nxt
    pts = sorted(cuts)
    mids = [(pts[i] + pts[i + 1]) / 2 for i in range(len(pts) - 1)]
    mids.append(qmod1((pts[-1] + pts[0] + 1) / 2))
    return mids


def irrational_drift(f: IntervalExchange) -> int:
    """+1/-1 if every translation has irrational part of that strict sign, else 0.

    A periodic point needs a sum of translations in Z, hence irrational parts
    summing to zero; a common strict sign rules that out.
    """
    signs = {(t.b > 0) - (t.b < 0) for t in f.translations}
    if signs == {1}:
        return 1
    if signs == {-1}:
        return -1
    return 0


def detect_periodic(f: IntervalExchange, budget: int = DEFAULT_BUDGET,
                    seeds: Iterable = ()) -> Certificate:
    """Search for a periodic orbit.

    ``Yes`` carries ``(x, period)``; ``No`` is returned only on exact grounds
    (constant sign of the irrational parts of the translations); otherwise
    ``Unknown`` with ``depth`` = the period bound below which no periodic orbit
    exists (exhaustive over cells of the preimage partition).
    """
    if f.is_rational:
        q = f.denominator
        x = Quad(Fraction(1, 2 * q))
        ker = f.kernel(x)
        p = _first_return(ker, ker.scale(x), q)
        assert p is not None, "half-grid point must be periodic"
        return Certificate("Yes", {"point": x, "period": p},
                           reason="rational lengths: every orbit is periodic")

    drift = irrational_drift(f)
    if drift:
        return Certificate("No", {"irrational_parts": [t.b for t in f.translations],
                                  "d": f.d},
                           reason="irrational parts of all translations share one sign")

    for s in seeds:
        x = qmod1(as_quad(s))
        ker = f.kernel(x)
        p = ker.scale(x)
        if ker.locate(p) < 0:
            continue
        per = _first_return(ker, p, budget)
        if per:
            return Certificate("Yes", {"point": x, "period": per}, reason="seeded orbit closes")

    # long orbits of interval midpoints
    bps = list(f.breakpoints) + [Quad(1)]
    for i in range(f.n):
        x = (bps[i] + bps[i + 1]) / 2
        ker = f.kernel(x)
        per = _first_return(ker, ker.scale(x), budget)
        if per:
            return Certificate("Yes", {"point": x, "period": per}, reason="midpoint orbit closes")

    # exhaustive small periods: a periodic component of period p contains a
    # whole cell of the level-p preimage partition
    levels = max(1, math.isqrt(max(1, budget // max(1, f.n))))
    for x in _preimage_cells(f, levels):
        ker = f.kernel(x)
        per = _first_return(ker, ker.scale(x), levels)
        if per:
            return Certificate("Yes", {"point": x, "period": per}, reason="cell orbit closes")
    return Certificate("Unknown", None, depth=levels,
                       reason=f"no periodic orbit of period <= {levels}; "
                              f"midpoint orbits open for {budget} steps")


def verify_periodic(f: IntervalExchange, witness: dict) -> bool:
    x, p = as_quad(witness["point"]), int(witness["period"])
    res = orbit(f, x, p)
    return res.hit is None and res.points[-1] == res.points[0] and \
        all(pt != res.points[0] for pt in res.points[1:-1])


# -- saddle connections -------------------------------------------------


def saddle_connection_search(f: IntervalExchange, depth: int = DEFAULT_BUDGET) -> Certificate:
    """Iterate both one-sided images of every singular point looking for a singular point.

    ``Yes`` carries ``(source, side, target, steps)`` where ``steps`` counts
    applications of ``f`` starting with the one-sided limit.
    """
    sd = singular_set(f)
    if not sd.singular:
        return Certificate("Unknown", {"singular_empty": True}, depth=0,
                           reason="no singular points")
    sing = set(sd.singular)
    rem = set(sd.removable)
    for a in sd.singular:
        for side, z in (("-", f.left_limit(a)), ("+", f.right_limit(a))):
            ker = f.kernel(z)
            p = ker.scale(z)
            for steps in range(1, depth + 1):
                i = ker.locate(p)
                if i < 0:
                    b = f.breakpoints[-1 - i]
                    if b in sing:
                        return Certificate("Yes", {"source": a, "side": side, "target": b,
                                                   "steps": steps})
                    assert b in rem
                    # continuous through a removable point
                    p = ker.scale(f.right_limit(b))
                    continue
                if steps == depth:
                    break
                p, _ = ker.step(p)
    return Certificate("Unknown", None, depth=depth,
                       reason=f"no saddle connection within {depth} steps")


def verify_connection(f: IntervalExchange, witness: dict) -> bool:
    a, b = as_quad(witness["source"]), as_quad(witness["target"])
    z = f.left_limit(a) if witness["side"] == "-" else f.right_limit(a)
    sing = set(singular_set(f).singular)
    if a not in sing or b not in sing:
        return False
    for _ in range(int(witness["steps"]) - 1):
        if z in f.breakpoints:
            if z in sing:
                return False
            z = f.right_limit(z)
        else:
            z = apply(f, z)
    return z == b


def is_expansive_iem(f: IntervalExchange, budget: int = DEFAULT_BUDGET,
                     seeds: Iterable = ()) -> Certificate:
    """Expansiveness: no periodic orbits and a nonempty singular set."""
    sd = singular_set(f)
    if not sd.singular:
        return Certificate("No", {"singular": []},
                           reason="no singular points: a circle homeomorphism is never expansive")
    per = detect_periodic(f, budget, seeds)
    if per.verdict == "Yes":
        return Certificate("No", per.witness, reason="periodic orbit")
    if per.verdict == "No":
        return Certificate("Yes", {"singular": list(sd.singular), **per.witness},
                           reason="singular set nonempty and periodic orbits excluded exactly")
    conn = saddle_connection_search(f, budget)
    if conn.verdict == "Unknown":
        return Certificate("Yes", {"singular": list(sd.singular)}, conditional=True,
                           depth=budget,
                           reason=f"no periodic orbit of period <= {per.depth} and no "
                                  f"saddle connection within {budget} steps")
    return Certificate("Unknown", conn.witness, depth=budget,
                       reason="saddle connection found and periodicity undecided")


# -- separation ---------------------------------------------------------


@dataclass(frozen=True)
class SeparationResult:
    separated: bool
    n: int | None = None
    distance: Quad | None = None
    hit: dict | None = None
    horizon: int | None = None
    sup: Quad | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable({"separated": self.separated, "n": self.n, "distance": self.distance,
                          "hit": self.hit, "horizon": self.horizon, "sup": self.sup,
                          **self.extra})


def separation_test(f: IntervalExchange, x, y, delta, horizon: int = DEFAULT_BUDGET
                    ) -> SeparationResult:
    """Least ``n <= horizon`` with ``dist(f^n x, f^n y) > delta`` (strict)."""
    x, y, delta = qmod1(as_quad(x)), qmod1(as_quad(y)), as_quad(delta)
    if delta.sign() <= 0:
        raise ValueError("delta must be positive")
    if x == y:
        return SeparationResult(False, horizon=horizon, sup=Quad(0))
    ker = f.kernel(x, y, delta)
    p, q = ker.scale(x), ker.scale(y)
    dl = ker.scale(delta)
    L = ker.L
    sup = None
    for n in range(horizon + 1):
        # circle distance in scaled units
        du, dv = p[0] - q[0], p[1] - q[1]
        if sqrt_sign(du, dv, ker.d) < 0:
            du, dv = -du, -dv
        if sqrt_sign(2 * du - L, 2 * dv, ker.d) > 0:
            du, dv = L - du, -dv
        if sup is None or sqrt_sign(du - sup[0], dv - sup[1], ker.d) > 0:
            sup = (du, dv)
        if sqrt_sign(du - dl[0], dv - dl[1], ker.d) > 0:
            return SeparationResult(True, n, ker.unscale((du, dv)), horizon=horizon,
                                    sup=ker.unscale(sup))
        if n == horizon:
            break
        np_, i = ker.step(p)
        nq, j = ker.step(q)
        if np_ is None or nq is None:
            who = "x" if np_ is None else "y"
            b = f.breakpoints[i if np_ is None else j]
            return SeparationResult(False, n, hit={"orbit": who, "breakpoint": b, "step": n},
                                    horizon=horizon, sup=ker.unscale(sup))
        p, q = np_, nq
    return SeparationResult(False, horizon=horizon, sup=ker.unscale(sup))
