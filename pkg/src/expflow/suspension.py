"""Suspensions of interval exchanges as combinatorial translation surfaces.

Two constructions are provided.

``suspend`` builds the classical 2n-gon: top edges ``1..n`` left to right,
bottom edges in permuted order, paired by translation.  Vertex classes come
from gluing the polygon corners; the cone multiplicity of a class is the
number of interior top corners it contains (one downward separatrix each), so
the multiplicities always add up to ``n - 1``.

``circle_classes`` glues the annulus ``S^1 x [0, 1]`` top to bottom through
the circle map itself.  This is the surface on which the circle is a closed
cross-section with first return ``f``; its index-0 points are exactly the
removable breakpoints.  The flow descriptor is built from this surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .exactnum import Quad
from .iem import (DEFAULT_BUDGET, Certificate, IntervalExchange, detect_periodic,
                  saddle_connection_search, singular_set)

__all__ = [
    "ReduciblePermutation", "SuspensionComplex", "SingularityRecord", "FlowSurfaceDescriptor",
    "is_irreducible", "suspend", "vertex_classes", "circle_classes", "descriptor",
    "is_expansive_flow", "torus_descriptor",
]


class ReduciblePermutation(ValueError):
    pass


def is_irreducible(perm: Sequence[int]) -> bool:
    n = len(perm)
    return not any(set(perm[:k]) == set(range(1, k + 1)) for k in range(1, n))


class _UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def groups(self) -> list[list]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return [sorted(g) for _, g in sorted(out.items())]


@dataclass(frozen=True)
class SingularityRecord:
    k: int
    boundary: bool = False
    label: str = ""

    @property
    def sectors(self) -> int:
        # hyperbolic sectors: 2k in the interior, the boundary count otherwise
        return self.k if self.boundary else 2 * self.k

    @property
    def index(self) -> int:
        return 1 - self.sectors if self.boundary else 1 - self.sectors // 2

    def to_dict(self):
        return {"k": self.k, "index": self.index, "sectors": self.sectors,
                "boundary": self.boundary, "label": self.label}


@dataclass(frozen=True)
class SuspensionComplex:
    base: IntervalExchange
    # polygon corners in counter-clockwise order; ('P', k) top, ('Q', k) bottom
    corners: tuple
    # edge i joins corners[i] -> corners[i+1]; (label, 'top'|'bottom')
    edges: tuple
    classes: tuple  # tuple of tuples of corner indices
    multiplicities: tuple

    @property
    def chi(self) -> int:
        return len(self.classes) - self.base.n + 1

    def pairing_ok(self) -> bool:
        tops = sorted(lab for lab, side in self.edges if side == "top")
        bots = sorted(lab for lab, side in self.edges if side == "bottom")
        return tops == bots == list(range(1, self.base.n + 1))

    def polygon_points(self) -> list[tuple[int, int]]:
        """Integer coordinates of the corners for the unit-width suspension."""
        perm = self.base.permutation
        n = self.base.n
        tau = [perm[j] - (j + 1) for j in range(n)]
        top = [(0, 0)]
        for j in range(n):
            top.append((top[-1][0] + 1, top[-1][1] + tau[j]))
        order = sorted(range(n), key=lambda j: perm[j])
        bot = [(0, 0)]
        for j in order:
            bot.append((bot[-1][0] + 1, bot[-1][1] + tau[j]))
        return [top[k] if s == "P" else bot[k] for s, k in self.corners]


def suspend(f: IntervalExchange) -> SuspensionComplex:
    """The 2n-gon suspension with corner classes and cone multiplicities."""
    n, perm = f.n, f.permutation
    if n < 2 or not is_irreducible(perm):
        raise ReduciblePermutation(f"permutation {list(perm)} is reducible")
    corners = [("Q", k) for k in range(n)] + [("P", n)] + [("P", k) for k in range(n - 1, 0, -1)]
    index = {c: i for i, c in enumerate(corners)}
    index[("Q", n)] = index[("P", n)]
    index[("P", 0)] = index[("Q", 0)]
    m = len(corners)
    by_pos = {perm[j]: j + 1 for j in range(n)}
    edges = [(by_pos[k + 1], "bottom") for k in range(n)] + \
            [(k, "top") for k in range(n, 0, -1)]
    uf = _UnionFind(range(m))
    for lab in range(1, n + 1):
        pos = perm[lab - 1]
        # bottom edge runs Q_{pos-1} -> Q_pos, top edge P_lab -> P_{lab-1}
        uf.union(index[("Q", pos - 1)], index[("P", lab - 1)])
        uf.union(index[("Q", pos)], index[("P", lab)])
    classes = tuple(tuple(g) for g in uf.groups())
    interior_top = {index[("P", k)] for k in range(1, n)}
    mult = tuple(sum(1 for c in g if c in interior_top) for g in classes)
    return SuspensionComplex(f, tuple(corners), tuple(edges), classes, mult)


def vertex_classes(c: SuspensionComplex) -> list[SingularityRecord]:
    recs = [SingularityRecord(k, label=",".join(f"{s}{i}" for s, i in (c.corners[j] for j in g)))
            for k, g in zip(c.multiplicities, c.classes)]
    assert sum(r.k for r in recs) == c.base.n - 1
    return recs


@dataclass(frozen=True)
class CircleClass:
    breakpoints: tuple[Quad, ...]   # top points (breakpoints of f)
    images: tuple[Quad, ...]        # bottom points (one-sided limits)

    @property
    def k(self) -> int:
        return len(self.breakpoints)


def circle_classes(f: IntervalExchange) -> list[CircleClass]:
    """Cone points of the annulus suspension of the circle map ``f``.

    Top point ``a`` is glued to the bottom points ``f(a-)`` and ``f(a+)``; each
    boundary point of the annulus carries angle pi, so a class with ``k`` top
    points has cone angle ``2 pi k``.
    """
    uf = _UnionFind()
    for a in f.breakpoints:
        uf.union(("top", a), ("bot", f.left_limit(a)))
        uf.union(("top", a), ("bot", f.right_limit(a)))
    out = []
    for g in uf.groups():
        tops = tuple(sorted(p for s, p in g if s == "top"))
        bots = tuple(sorted(p for s, p in g if s == "bot"))
        assert len(tops) == len(bots)
        out.append(CircleClass(tops, bots))
    return sorted(out, key=lambda c: c.breakpoints[0])


@dataclass
class FlowSurfaceDescriptor:
    """Topology plus dynamical flags of a flow on a compact surface."""

    orientable: bool = True
    h: int = 0
    b: int = 0
    c: int = 0
    singularities: tuple[SingularityRecord, ...] = ()
    periodic: Certificate = field(default_factory=lambda: Certificate("Unknown"))
    nonwandering_full: bool = True
    saddle_connections: Certificate = field(default_factory=lambda: Certificate("Unknown"))
    label: str = ""

    @property
    def chi(self) -> int:
        return 2 - 2 * self.h - self.b - self.c

    @property
    def genus(self) -> int:
        return self.h if self.orientable else 2 * self.h + self.c

    @property
    def is_torus(self) -> bool:
        return self.orientable and (self.h, self.b, self.c) == (1, 0, 0)

    def index_sum(self) -> int:
        interior = sum(s.index for s in self.singularities if not s.boundary)
        bdry = sum(s.index for s in self.singularities if s.boundary)
        assert bdry % 2 == 0
        return interior + bdry // 2

    def without_fake_saddles(self) -> "FlowSurfaceDescriptor":
        d = FlowSurfaceDescriptor(**self.__dict__)
        d.singularities = tuple(s for s in self.singularities if s.index != 0)
        return d

    def to_dict(self):
        return {"orientable": self.orientable, "h": self.h, "b": self.b, "c": self.c,
                "chi": self.chi, "genus": self.genus,
                "singularities": [s.to_dict() for s in self.singularities],
                "periodic": self.periodic.to_dict(),
                "nonwandering_full": self.nonwandering_full,
                "saddle_connections": self.saddle_connections.to_dict(),
                "label": self.label}

    @classmethod
    def from_dict(cls, data: dict) -> "FlowSurfaceDescriptor":
        def cert(x):
            return Certificate(x["verdict"], x.get("witness"), x.get("conditional", False),
                               x.get("depth"), x.get("reason", "")) if x else Certificate("Unknown")
        sings = tuple(SingularityRecord(s["k"], s.get("boundary", False), s.get("label", ""))
                      for s in data.get("singularities", ()))
        return cls(data.get("orientable", True), data.get("h", 0), data.get("b", 0),
                   data.get("c", 0), sings, cert(data.get("periodic")),
                   data.get("nonwandering_full", True), cert(data.get("saddle_connections")),
                   data.get("label", ""))


def descriptor(c: SuspensionComplex | IntervalExchange, periodic: Certificate | None = None,
               connections: Certificate | None = None,
               budget: int = DEFAULT_BUDGET) -> FlowSurfaceDescriptor:
    """Closed orientable descriptor of the suspension flow of ``c``'s base map."""
    f = c.base if isinstance(c, SuspensionComplex) else c
    classes = circle_classes(f)
    chi = sum(1 - cl.k for cl in classes)
    assert chi % 2 == 0
    sings = tuple(SingularityRecord(cl.k, label=str(cl.breakpoints[0])) for cl in classes)
    if periodic is None:
        periodic = detect_periodic(f, budget)
    if connections is None:
        connections = saddle_connection_search(f, budget)
    # measure preserving first return: no wandering points
    return FlowSurfaceDescriptor(True, (2 - chi) // 2, 0, 0, sings, periodic, True,
                                 connections, label=f"suspension n={f.n}")


def torus_descriptor(periodic: Certificate | None = None, label: str = "torus"
                     ) -> FlowSurfaceDescriptor:
    """Linear flow on the torus without singular points."""
    if periodic is None:
        periodic = Certificate("No", reason="irrational linear flow")
    return FlowSurfaceDescriptor(True, 1, 0, 0, (), periodic, True,
                                 Certificate("No", reason="no singular points"), label=label)


def is_expansive_flow(d: FlowSurfaceDescriptor, budget: int = DEFAULT_BUDGET) -> Certificate:
    """Decide expansiveness from surface type and dynamical flags.

    On surfaces other than the torus a flow is expansive iff it has no
    wandering points, no periodic orbits and finitely many singular points.
    """
    if d.is_torus:
        return Certificate("No", {"surface": "torus"}, reason="the torus admits no expansive flow")
    if d.periodic.verdict == "Yes":
        return Certificate("No", d.periodic.witness, reason="periodic orbit")
    if not d.nonwandering_full:
        return Certificate("No", reason="wandering points")
    if not d.singularities:
        return Certificate("No", reason="no singular points")
    if all(s.index == 0 for s in d.singularities):
        return Certificate("Unknown", reason="only removable singularities on a non-torus surface")
    if d.periodic.verdict == "No":
        return Certificate("Yes", {"surface": [d.h, d.b, d.c]},
                           conditional=d.periodic.conditional, depth=d.periodic.depth,
                           reason="non-torus, no wandering points, no periodic orbits")
    return Certificate("Yes", {"surface": [d.h, d.b, d.c]}, conditional=True,
                       depth=d.periodic.depth if d.periodic.depth is not None else budget,
                       reason="no periodic orbit found within budget")
