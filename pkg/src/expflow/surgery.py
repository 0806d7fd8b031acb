"""Basic operations on flow assemblies and the surface admissibility test.

An assembly is a polygon complex.  Every piece contributes one face: the
standard ``4h``-gon of its closed surface, a slit per extra singular point, and
a few *orbit chains*.  An orbit chain is a flow-oriented path of edges hanging
off the base vertex by a tether; its vertices are the slots ``0..m-1`` that
sites refer to.  Sides are glued in pairs or left free (boundary).  Corners
carry an angle in units of pi and a singular mark.

Everything topological (vertex classes, components, orientability, boundary
components, Euler characteristic, indices) is recomputed by traversal after
every operation.  Saddle connections are maximal chains of glued orbit edges
between singular vertices; boundary arcs are chains of free orbit sides.

A site is ``(piece, orbit, pos)`` or ``(piece, orbit, pos, side)`` where
``side`` is ``'+'`` (left of the flow) or ``'-'``; the side is needed once a
cut has split a slot into two boundary points.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .iem import DEFAULT_BUDGET, Certificate
from .suspension import FlowSurfaceDescriptor, SingularityRecord, torus_descriptor

__all__ = [
    "SurgeryError", "InvalidSite", "NotRemovable", "NotInterior", "IncompatibleArcs",
    "UnresolvedBoundary", "CollapseUnsupported", "SurfaceSignature", "FlowAssembly",
    "admits_expansive", "add_fake_saddle", "remove_fake_saddle", "cut_saddle_connection",
    "glue_saddle_connections", "add_boundary", "collapse_boundary", "assemble_and_decide",
    "run_script",
]


class SurgeryError(ValueError):
    pass


class InvalidSite(SurgeryError):
    pass


class NotRemovable(SurgeryError):
    pass


class NotInterior(SurgeryError):
    pass


class IncompatibleArcs(SurgeryError):
    pass


class UnresolvedBoundary(SurgeryError):
    pass


class CollapseUnsupported(SurgeryError):
    pass


# -- signatures ---------------------------------------------------------


@dataclass(frozen=True, order=True)
class SurfaceSignature:
    """``S^{h,b,c}``: sphere with ``h`` handles, ``b`` boundaries, ``c`` cross-cups."""

    h: int
    b: int = 0
    c: int = 0

    def __post_init__(self):
        if min(self.h, self.b, self.c) < 0:
            raise ValueError("signature entries must be non-negative")

    def canonical(self) -> "SurfaceSignature":
        h, c = self.h, self.c
        while c >= 3:
            h, c = h + 1, c - 2
        return SurfaceSignature(h, self.b, c)

    @property
    def chi(self) -> int:
        return 2 - 2 * self.h - self.b - self.c

    @property
    def orientable(self) -> bool:
        return self.c == 0

    @classmethod
    def from_invariants(cls, chi: int, b: int, orientable: bool) -> "SurfaceSignature":
        if orientable:
            if (2 - chi - b) % 2:
                raise ValueError(f"no orientable surface with chi={chi}, b={b}")
            return cls((2 - chi - b) // 2, b, 0)
        g = 2 - chi - b
        if g < 1:
            raise ValueError(f"no non-orientable surface with chi={chi}, b={b}")
        c = 1 if g % 2 else 2
        return cls((g - c) // 2, b, c)

    def name(self) -> str:
        base = {(0, 0): "sphere", (1, 0): "torus", (0, 1): "projective plane",
                (0, 2): "Klein bottle"}.get((self.h, self.c))
        if base is None:
            base = f"genus-{self.h} surface" if self.c == 0 else \
                f"{self.h} handles and {self.c} cross-cups"
        return base if self.b == 0 else f"{base} with {self.b} boundaries"

    def to_list(self) -> list[int]:
        return [self.h, self.b, self.c]


def admits_expansive(s: SurfaceSignature) -> bool:
    s = s.canonical()
    return s.h > 0 and s.h + s.b + s.c > 1


# -- the complex ----------------------------------------------------------


@dataclass
class Piece:
    descriptor: FlowSurfaceDescriptor
    label: str
    orbits: int
    slots: int


@dataclass
class Vertex:
    vid: int
    corners: list[int]
    boundary: bool
    angle: int
    marked: bool

    @property
    def index(self) -> int:
        return 1 - self.angle if self.boundary else 1 - self.angle // 2

    @property
    def singular(self) -> bool:
        return self.marked


@dataclass
class Chain:
    cid: int
    tail: int
    head: int
    sides: list[int]     # flow order; for glued chains one side per edge


@dataclass
class _Analysis:
    vertex_of: dict
    vertices: dict
    component_of: dict   # face -> component id
    components: list
    orientable: dict
    boundaries: dict     # bid -> list of free sides
    boundary_of: dict    # free side -> bid
    chi: dict


@dataclass
class FlowAssembly:
    pieces: list[Piece] = field(default_factory=list)
    faces: dict = field(default_factory=dict)          # fid -> [sid, ...] ccw
    face_piece: dict = field(default_factory=dict)
    kind: dict = field(default_factory=dict)           # sid -> 'bg' | 'tether' | 'orbit'
    direction: dict = field(default_factory=dict)      # sid -> +1 along the edge, -1 against
    side_tag: dict = field(default_factory=dict)       # orbit sid -> (piece, orbit, pos, side)
    pairs: dict = field(default_factory=dict)          # glued sid -> partner sid
    angle: dict = field(default_factory=dict)          # corner (= sid starting there) -> int
    marks: set = field(default_factory=set)
    corner_tags: dict = field(default_factory=dict)    # corner -> [(piece, orbit, pos, side)]
    next_sid: int = 0
    transcript: list = field(default_factory=list)
    # pieces whose orbits were rerouted by a cut or a glue
    surgered: set = field(default_factory=set)

    # -- construction ---------------------------------------------------

    def copy(self) -> "FlowAssembly":
        return copy.deepcopy(self)

    def _new_side(self, face, kind, direction, angle=0, tag=None) -> int:
        s = self.next_sid
        self.next_sid += 1
        self.faces[face].append(s)
        self.kind[s] = kind
        self.direction[s] = direction
        self.angle[s] = angle
        if tag is not None:
            self.side_tag[s] = tag
        return s

    def _pieces_of(self, sides) -> set[int]:
        sides = set(sides)
        return {self.face_piece[f] for f, ss in self.faces.items() if sides & set(ss)}

    def _glue_sides(self, s, t):
        self.pairs[s] = t
        self.pairs[t] = s

    def add_piece(self, descriptor: FlowSurfaceDescriptor | None = None, label: str = "",
                  orbits: int = 2, slots: int = 8) -> int:
        """Add a closed orientable piece; returns its index."""
        d = descriptor if descriptor is not None else torus_descriptor()
        if not d.orientable or d.b or d.c:
            raise SurgeryError("pieces must be closed orientable surfaces")
        if slots < 2 or orbits < 0:
            raise SurgeryError("an orbit chain needs at least two slots")
        sings = list(d.singularities)
        if sum(1 - s.k for s in sings) != d.chi:
            raise SurgeryError(f"singularities do not satisfy Poincare-Hopf on genus {d.h}")
        p = len(self.pieces)
        self.pieces.append(Piece(d, label or f"P{p}", orbits, slots))
        f = max(self.faces, default=-1) + 1
        self.faces[f] = []
        self.face_piece[f] = p

        base_k = sings[0].k if sings else 1
        extra = sings[1:]
        if d.h == 0 and not extra:
            # a sphere still needs a second vertex to be a polygon
            extra = [SingularityRecord(1, label="regular")]
        first = True

        def base_angle():
            nonlocal first
            a = 2 * base_k if first else 0
            first = False
            return a

        base_corners = []
        for o in range(orbits):
            t = self._new_side(f, "tether", 1, base_angle())
            base_corners.append(t)
            fwd = []
            for pos in range(slots - 1):
                s = self._new_side(f, "orbit", 1, 1, (p, o, pos, "+"))
                self.corner_tags[s] = [(p, o, pos, "+")]
                fwd.append(s)
            back = []
            for pos in range(slots - 2, -1, -1):
                tip = pos == slots - 2
                s = self._new_side(f, "orbit", -1, 2 if tip else 1, (p, o, pos, "-"))
                tags = [(p, o, pos + 1, "-")]
                if tip:
                    tags.append((p, o, pos + 1, "+"))
                self.corner_tags[s] = tags
                back.append(s)
            for a, b in zip(fwd, reversed(back)):
                self._glue_sides(a, b)
            t2 = self._new_side(f, "tether", -1, 1)
            self.corner_tags[t2] = [(p, o, 0, "-")]
            self._glue_sides(t, t2)
        for i in range(d.h):
            a = self._new_side(f, "bg", 1, base_angle())
            b = self._new_side(f, "bg", 1, base_angle())
            a2 = self._new_side(f, "bg", -1, base_angle())
            b2 = self._new_side(f, "bg", -1, base_angle())
            base_corners += [a, b, a2, b2]
            self._glue_sides(a, a2)
            self._glue_sides(b, b2)
        for rec in extra:
            c = self._new_side(f, "bg", 1, base_angle())
            c2 = self._new_side(f, "bg", -1, 2 * rec.k)
            base_corners.append(c)
            self._glue_sides(c, c2)
            if rec.label != "regular":
                self.marks.add(c2)
        if sings:
            self.marks.update(base_corners)
        self._audit()
        return p

    # -- face navigation ------------------------------------------------

    def _position(self) -> dict:
        return {s: (f, i) for f, sides in self.faces.items() for i, s in enumerate(sides)}

    def _nxt(self, pos, s):
        f, i = pos[s]
        sides = self.faces[f]
        return sides[(i + 1) % len(sides)]

    def _prv(self, pos, s):
        f, i = pos[s]
        return self.faces[f][i - 1]

    def _tail_corner(self, pos, s):
        return s if self.direction[s] == 1 else self._nxt(pos, s)

    def _head_corner(self, pos, s):
        return self._nxt(pos, s) if self.direction[s] == 1 else s

    # -- traversal oracles ----------------------------------------------

    def analyze(self) -> _Analysis:
        pos = self._position()
        parent = {s: s for s in pos}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)

        for s, t in self.pairs.items():
            if s < t:
                union(self._tail_corner(pos, s), self._tail_corner(pos, t))
                union(self._head_corner(pos, s), self._head_corner(pos, t))
        groups: dict = {}
        for c in pos:
            groups.setdefault(find(c), []).append(c)
        vertex_of, vertices = {}, {}
        for corners in groups.values():
            corners.sort()
            vid = corners[0]
            bdry = any(c not in self.pairs or self._prv(pos, c) not in self.pairs
                       for c in corners)
            ang = sum(self.angle[c] for c in corners)
            vertices[vid] = Vertex(vid, corners, bdry, ang,
                                   any(c in self.marks for c in corners))
            for c in corners:
                vertex_of[c] = vid

        # components and orientation signs by traversal
        comp_of, sign, comps, orientable = {}, {}, [], {}
        for f0 in sorted(self.faces):
            if f0 in comp_of:
                continue
            cid = len(comps)
            comp_of[f0], sign[f0] = cid, 1
            stack, members, ok = [f0], [f0], True
            while stack:
                f = stack.pop()
                for s in self.faces[f]:
                    t = self.pairs.get(s)
                    if t is None:
                        continue
                    g = pos[t][0]
                    want = -sign[f] * self.direction[s] * self.direction[t]
                    if g not in comp_of:
                        comp_of[g], sign[g] = cid, want
                        members.append(g)
                        stack.append(g)
                    elif sign[g] != want:
                        ok = False
            comps.append(sorted(members))
            orientable[cid] = ok

        # boundary components: free sides linked through boundary vertices
        free = [s for s in pos if s not in self.pairs]
        bpar = {s: s for s in free}

        def bfind(x):
            while bpar[x] != x:
                bpar[x] = bpar[bpar[x]]
                x = bpar[x]
            return x

        for v in vertices.values():
            if not v.boundary:
                continue
            ends = []
            for c in v.corners:
                for s in (self._prv(pos, c), c):
                    if s not in self.pairs:
                        ends.append(s)
            for s in ends[1:]:
                a, b = bfind(ends[0]), bfind(s)
                if a != b:
                    bpar[max(a, b)] = min(a, b)
        boundaries: dict = {}
        for s in free:
            boundaries.setdefault(bfind(s), []).append(s)
        boundaries = {min(v): sorted(v) for v in boundaries.values()}
        boundary_of = {s: b for b, ss in boundaries.items() for s in ss}

        chi = {}
        for cid, members in enumerate(comps):
            fs = set(members)
            V = sum(1 for v in vertices.values() if pos[v.vid][0] in fs)
            sides = [s for f in members for s in self.faces[f]]
            E = sum(1 for s in sides if s not in self.pairs) + \
                sum(1 for s in sides if s in self.pairs) // 2
            chi[cid] = V - E + len(members)
        return _Analysis(vertex_of, vertices, comp_of, comps, orientable, boundaries,
                         boundary_of, chi)

    def _component_of_vertex(self, an: _Analysis, vid: int) -> int:
        return an.component_of[self._position()[vid][0]]

    def signatures(self, an: _Analysis | None = None) -> list[SurfaceSignature]:
        an = an or self.analyze()
        pos = self._position()
        out = []
        for cid in range(len(an.components)):
            b = sum(1 for bid in an.boundaries if an.component_of[pos[bid][0]] == cid)
            out.append(SurfaceSignature.from_invariants(an.chi[cid], b, an.orientable[cid]))
        return out

    def signature(self) -> SurfaceSignature:
        sigs = self.signatures()
        if len(sigs) != 1:
            raise SurgeryError(f"assembly has {len(sigs)} components")
        return sigs[0]

    def index_audit(self, an: _Analysis | None = None) -> dict:
        """Per component: chi by V-E+F and by the index sum, which must agree."""
        an = an or self.analyze()
        pos = self._position()
        twice = {cid: 0 for cid in range(len(an.components))}
        for v in an.vertices.values():
            cid = an.component_of[pos[v.vid][0]]
            twice[cid] += v.index if v.boundary else 2 * v.index
        return {cid: (an.chi[cid], twice[cid]) for cid in twice}

    def _audit(self, an: _Analysis | None = None):
        an = an or self.analyze()
        for v in an.vertices.values():
            if v.boundary and v.angle < 1:
                raise SurgeryError(f"boundary vertex {v.vid} with angle {v.angle}")
            if not v.boundary and v.angle % 2:
                raise SurgeryError(f"interior vertex {v.vid} with odd angle {v.angle}")
            if not v.marked and v.index != 0:
                raise SurgeryError(f"unmarked vertex {v.vid} of index {v.index}")
        for cid, (chi, twice) in self.index_audit(an).items():
            if 2 * chi != twice:
                raise SurgeryError(f"index sum {twice}/2 differs from chi={chi} on component {cid}")
        return an

    # -- chains -----------------------------------------------------------

    def _orbit_edges(self, an, glued: bool):
        pos = self._position()
        out = []
        for s in pos:
            if self.kind[s] != "orbit" or (s in self.pairs) != glued:
                continue
            if glued and self.pairs[s] < s:
                continue
            out.append((s, an.vertex_of[self._tail_corner(pos, s)],
                        an.vertex_of[self._head_corner(pos, s)]))
        return out

    def _chains(self, an, glued: bool) -> list[Chain]:
        edges = self._orbit_edges(an, glued)
        by_tail: dict = {}
        for e in edges:
            by_tail.setdefault(e[1], []).append(e)
        chains = []
        for s, tail, head in edges:
            if not an.vertices[tail].marked:
                continue
            sides, v, seen = [s], head, {s}
            while not an.vertices[v].marked:
                nxt = by_tail.get(v, [])
                if len(nxt) != 1 or nxt[0][0] in seen:
                    sides = None
                    break
                seen.add(nxt[0][0])
                sides.append(nxt[0][0])
                v = nxt[0][2]
            if sides:
                chains.append(Chain(s, tail, v, sides))
        return sorted(chains, key=lambda c: c.cid)

    def connections(self, an=None) -> list[Chain]:
        return self._chains(an or self.analyze(), True)

    def boundary_arcs(self, an=None) -> list[Chain]:
        return self._chains(an or self.analyze(), False)

    # -- site resolution --------------------------------------------------

    def vertex_at(self, site: Sequence, an=None) -> int:
        an = an or self.analyze()
        site = tuple(site)
        if len(site) == 3:
            wanted = [site + ("+",), site + ("-",)]
        elif len(site) == 4:
            wanted = [site]
        else:
            raise InvalidSite(f"malformed site {site}")
        vids = {an.vertex_of[c] for c, tags in self.corner_tags.items()
                for t in tags if t in wanted}
        if not vids:
            raise InvalidSite(f"no slot at {site}")
        if len(vids) > 1:
            raise InvalidSite(f"site {site} is split by a cut; give a side")
        return vids.pop()

    def side_at(self, tag: Sequence) -> int:
        tag = tuple(tag)
        for s, t in self.side_tag.items():
            if t == tag:
                return s
        raise InvalidSite(f"no orbit side {tag}")

    def resolve_connection(self, sel, an=None) -> Chain:
        an = an or self.analyze()
        conns = self.connections(an)
        if isinstance(sel, int):
            s = sel
        else:
            sel = tuple(sel)
            s = self.side_at(sel if len(sel) == 4 else sel + ("+",))
        s = min(s, self.pairs.get(s, s))
        for c in conns:
            if s in c.sides:
                return c
        if s not in self.pairs and self.kind.get(s) == "orbit":
            raise NotInterior(f"side {s} is on the boundary")
        raise InvalidSite(f"{sel} is not on a saddle connection")

    def resolve_arc(self, sel, an=None) -> Chain:
        an = an or self.analyze()
        s = sel if isinstance(sel, int) else self.side_at(sel)
        for c in self.boundary_arcs(an):
            if s in c.sides:
                return c
        raise IncompatibleArcs(f"{sel} is not on a boundary arc")

    # -- reporting --------------------------------------------------------

    def canonical(self) -> tuple:
        return (tuple(sorted((f, tuple(s)) for f, s in self.faces.items())),
                tuple(sorted((s, t) for s, t in self.pairs.items() if s < t)),
                tuple(sorted(self.angle.items())),
                tuple(sorted(self.marks)))

    def __eq__(self, other):
        return isinstance(other, FlowAssembly) and self.canonical() == other.canonical()

    def singularities(self, an=None) -> list[Vertex]:
        an = an or self.analyze()
        return [v for v in an.vertices.values() if v.marked]

    def fake_saddles(self, an=None) -> list[Vertex]:
        return [v for v in self.singularities(an) if v.index == 0]

    def glue_graph(self) -> list[tuple[int, int]]:
        return sorted((s, t) for s, t in self.pairs.items() if s < t and self.kind[s] == "orbit")

    def component_pieces(self, an=None) -> list[list[int]]:
        an = an or self.analyze()
        return [sorted({self.face_piece[f] for f in members}) for members in an.components]

    def summary(self) -> dict:
        an = self.analyze()
        pos = self._position()
        tags = {}
        for c, ts in self.corner_tags.items():
            tags.setdefault(an.vertex_of[c], []).extend(ts)
        comps = []
        for cid, sig in enumerate(self.signatures(an)):
            sings = [v for v in self.singularities(an)
                     if an.component_of[pos[v.vid][0]] == cid]
            comps.append({
                "component": cid, "signature": sig.to_list(), "name": sig.name(),
                "chi": an.chi[cid], "orientable": an.orientable[cid],
                "pieces": [self.pieces[p].label for p in self.component_pieces(an)[cid]],
                "singularities": [{"vertex": v.vid, "index": v.index, "boundary": v.boundary,
                                   "sites": sorted(tags.get(v.vid, []))} for v in sings],
            })
        return {
            "components": comps,
            "connections": [{"id": c.cid, "tail": c.tail, "head": c.head,
                             "length": len(c.sides)} for c in self.connections(an)],
            "boundary_arcs": [{"id": c.cid, "tail": c.tail, "head": c.head,
                               "length": len(c.sides), "boundary": an.boundary_of[c.cid]}
                              for c in self.boundary_arcs(an)],
            "boundaries": sorted(an.boundaries),
        }


# -- primitive operations -------------------------------------------------


def _log(a: FlowAssembly, entry: dict):
    a.transcript.append(entry)


def add_fake_saddle(a: FlowAssembly, site) -> FlowAssembly:
    a = a.copy()
    an = a.analyze()
    if isinstance(site, int):
        if site not in an.vertices:
            raise InvalidSite(f"no vertex {site}")
        vid = site
    else:
        vid = a.vertex_at(site, an)
    v = an.vertices[vid]
    if v.marked or v.index != 0:
        raise InvalidSite(f"site {site} is already singular")
    a.marks.update(v.corners)
    a._audit()
    _log(a, {"op": "add_fake_saddle", "site": site if isinstance(site, int) else list(site)})
    return a


def remove_fake_saddle(a: FlowAssembly, singularity) -> FlowAssembly:
    """Unmark an index-0 singularity given by vertex id or site."""
    a = a.copy()
    an = a.analyze()
    if isinstance(singularity, int):
        if singularity not in an.vertices:
            raise NotRemovable(f"no vertex {singularity}")
        vid = singularity
    else:
        vid = a.vertex_at(singularity, an)
    v = an.vertices[vid]
    if not v.marked:
        raise NotRemovable(f"vertex {vid} is not singular")
    if v.index != 0:
        raise NotRemovable(f"vertex {vid} has index {v.index}")
    a.marks.difference_update(v.corners)
    a._audit()
    _log(a, {"op": "remove_fake_saddle",
             "singularity": singularity if isinstance(singularity, int) else list(singularity)})
    return a


def cut_saddle_connection(a: FlowAssembly, connection) -> FlowAssembly:
    a = a.copy()
    an = a.analyze()
    conn = a.resolve_connection(connection, an)
    pos = a._position()
    comp = an.component_of[pos[conn.tail][0]]
    chi0 = an.chi[comp]
    ends_on_bdry = an.vertices[conn.tail].boundary + an.vertices[conn.head].boundary
    a.surgered |= a._pieces_of(conn.sides)
    for s in conn.sides:
        t = a.pairs.pop(s)
        del a.pairs[t]
    an2 = a._audit()
    # incremental bookkeeping: dV - dE = (m-1) + boundary ends - m
    if conn.tail != conn.head:
        new_chi = sum(an2.chi[c] for c in {an2.component_of[f]
                                            for f in an.components[comp]})
        expected = chi0 + ends_on_bdry - 1
        if new_chi != expected:
            raise SurgeryError(f"chi bookkeeping: {new_chi} != {expected}")
    _log(a, {"op": "cut", "connection": connection if isinstance(connection, int)
             else list(connection), "id": conn.cid})
    return a


def _subdivide(a: FlowAssembly, s: int) -> list[int]:
    """Split free side ``s``; returns the two new pieces in flow order."""
    f = next(f for f, sides in a.faces.items() if s in sides)
    sides = a.faces[f]
    i = sides.index(s)
    t = a.next_sid
    a.next_sid += 1
    sides.insert(i + 1, t)
    a.kind[t] = a.kind[s]
    a.direction[t] = a.direction[s]
    a.angle[t] = 1
    return [s, t] if a.direction[s] == 1 else [t, s]


def glue_saddle_connections(a: FlowAssembly, arc1, arc2) -> FlowAssembly:
    """Identify two boundary arcs, tail to tail and head to head along the flow."""
    a = a.copy()
    an = a.analyze()
    c1, c2 = a.resolve_arc(arc1, an), a.resolve_arc(arc2, an)
    if c1.cid == c2.cid:
        raise IncompatibleArcs("cannot glue an arc to itself")
    s1, s2 = list(c1.sides), list(c2.sides)
    while len(s1) < len(s2):
        s1[-1:] = _subdivide(a, s1[-1])
    while len(s2) < len(s1):
        s2[-1:] = _subdivide(a, s2[-1])
    for x, y in zip(s1, s2):
        a._glue_sides(x, y)
    a.surgered |= a._pieces_of(s1 + s2)
    try:
        a._audit()
    except SurgeryError as exc:
        raise IncompatibleArcs(f"gluing is not flow compatible: {exc}") from None
    _log(a, {"op": "glue", "arcs": [arc1 if isinstance(arc1, int) else list(arc1),
                                    arc2 if isinstance(arc2, int) else list(arc2)],
             "ids": [c1.cid, c2.cid]})
    return a


# -- composite recipes ------------------------------------------------------


def _arc_from(a: FlowAssembly, vid: int, through: int | None = None) -> list[Chain]:
    an = a.analyze()
    arcs = [c for c in a.boundary_arcs(an) if c.tail == vid]
    if through is not None:
        arcs = [c for c in arcs if through in c.sides]
    return arcs


def add_boundary(a: FlowAssembly, site) -> FlowAssembly:
    """Open a boundary along slots ``pos..pos+3`` of an interior orbit chain.

    Marks ``p = pos`` and ``q = pos+3``, cuts the connection ``pq``, marks
    ``r, s`` on its left copy and glues ``[p, r]`` to the right copy.  The new
    boundary is a loop ``q -> s -> q`` with the flow running around it.
    """
    piece, orbit, pos = tuple(site)[:3]
    if not 0 <= piece < len(a.pieces) or pos + 3 >= a.pieces[piece].slots:
        raise InvalidSite(f"need four slots from {pos} on orbit {orbit}")
    start = len(a.transcript)
    p, q = (piece, orbit, pos), (piece, orbit, pos + 3)
    r, s = (piece, orbit, pos + 1, "+"), (piece, orbit, pos + 2, "+")
    b = add_fake_saddle(a, p)
    b = add_fake_saddle(b, q)
    b = cut_saddle_connection(b, (piece, orbit, pos))
    b = add_fake_saddle(b, r)
    b = add_fake_saddle(b, s)
    b = glue_saddle_connections(b, (piece, orbit, pos, "+"), (piece, orbit, pos, "-"))
    steps = b.transcript[start:]
    b.transcript = b.transcript[:start] + [{"op": "add_boundary", "site": list(site),
                                            "steps": steps}]
    return b


def _boundary_marked(a: FlowAssembly, bid: int, an) -> list[Vertex]:
    pos = a._position()
    free = set(an.boundaries[bid])
    out = []
    for v in an.vertices.values():
        if v.boundary and v.marked and any(
                c in free or a._prv(pos, c) in free for c in v.corners):
            out.append(v)
    return out


def _arcs_of(a: FlowAssembly, bid: int, an) -> list[Chain]:
    return [c for c in a.boundary_arcs(an) if an.boundary_of[c.cid] == bid]


def _try_zip(a: FlowAssembly, bid: int) -> FlowAssembly | None:
    an = a.analyze()
    arcs = _arcs_of(a, bid, an)
    if len(arcs) == 2 and arcs[0].tail == arcs[1].tail and arcs[0].head == arcs[1].head:
        return glue_saddle_connections(a, arcs[0].cid, arcs[1].cid)
    return None


def collapse_boundary(a: FlowAssembly, boundary: int) -> FlowAssembly:
    """Close one boundary component by basic operations.

    Index-0 points on the boundary are removed first.  A boundary made of two
    arcs with common ends is zipped shut.  A boundary loop through a single
    singular point ``p`` is first turned into that shape: mark a point ``q``
    on an interior orbit edge at ``p``, cut ``pq`` (splitting ``p``), drop the
    index-0 half and zip.
    """
    an = a.analyze()
    if boundary not in an.boundaries:
        raise SurgeryError(f"no boundary {boundary}; have {sorted(an.boundaries)}")
    start = len(a.transcript)
    side = an.boundaries[boundary][0]

    def bid_of(x: FlowAssembly) -> int:
        return x.analyze().boundary_of[side]

    b = a
    for v in _boundary_marked(b, boundary, an):
        if v.index == 0:
            b = remove_fake_saddle(b, v.vid)
    done = _try_zip(b, bid_of(b))
    if done is None:
        an = b.analyze()
        bid = bid_of(b)
        sing = _boundary_marked(b, bid, an)
        if len(sing) != 1 or len(_arcs_of(b, bid, an)) != 1:
            raise CollapseUnsupported(
                f"boundary with {len(sing)} singular points and "
                f"{len(_arcs_of(b, bid, an))} arcs")
        p = sing[0].vid
        pos = b._position()
        candidates = []
        for s, tail, head in b._orbit_edges(an, glued=True):
            if tail == p and not an.vertices[head].marked:
                candidates.append((s, head))
            elif head == p and not an.vertices[tail].marked:
                candidates.append((s, tail))
        for s, w in candidates:
            try:
                c = add_fake_saddle(b, w)
                c = cut_saddle_connection(c, s)
                can = c.analyze()
                for v in _boundary_marked(c, bid_of(c), can):
                    if v.index == 0:
                        c = remove_fake_saddle(c, v.vid)
                        break
                z = _try_zip(c, bid_of(c))
                if z is None:
                    continue
                zan = z.analyze()
                for v in z.fake_saddles(zan):
                    if not v.boundary and w in v.corners:
                        z = remove_fake_saddle(z, v.vid)
                done = z
                break
            except SurgeryError:
                continue
        if done is None:
            raise CollapseUnsupported("no interior separatrix at the boundary point")
    steps = done.transcript[start:]
    done.transcript = done.transcript[:start] + [{"op": "collapse_boundary",
                                                  "boundary": boundary, "steps": steps}]
    return done


# -- decisions ----------------------------------------------------------------


def _weakest(certs: Iterable[Certificate]) -> tuple[bool, int | None]:
    conditional, depth = False, None
    for c in certs:
        if c.verdict != "No" or c.conditional:
            conditional = True
            if c.depth is not None:
                depth = c.depth if depth is None else min(depth, c.depth)
    return conditional, depth


def assemble_and_decide(a: FlowAssembly, budget: int = DEFAULT_BUDGET,
                        closed: bool = False) -> list[dict]:
    """Expansiveness verdict per connected component.

    Pieces are taken to be minimal suspensions; a component is expansive iff
    its surface is not the torus.  A piece with a periodic orbit makes its
    component non-expansive, and an undecided piece makes the verdict
    conditional.
    """
    an = a.analyze()
    pos = a._position()
    sigs = a.signatures(an)
    out = []
    for cid, pieces in enumerate(a.component_pieces(an)):
        sig = sigs[cid]
        if closed and sig.b:
            raise UnresolvedBoundary(f"component {cid} still has {sig.b} boundary components")
        periodic = [a.pieces[p].descriptor.periodic for p in pieces]
        sings = [v for v in a.singularities(an) if an.component_of[pos[v.vid][0]] == cid]
        if any(c.verdict == "Yes" for c in periodic):
            w = next(c for c in periodic if c.verdict == "Yes").witness
            cert = Certificate("No", w, reason="a piece has a periodic orbit")
        elif sig == SurfaceSignature(1, 0, 0):
            cert = Certificate("No", {"surface": sig.to_list()},
                               reason="the torus admits no expansive flow")
        elif not sings:
            cert = Certificate("No", {"surface": sig.to_list()}, reason="no singular points")
        else:
            conditional, depth = _weakest(periodic)
            reason = "minimal pieces on a surface other than the torus"
            if a.surgered & set(pieces):
                # orbits now cross between pieces: no closed-orbit certificate survives
                conditional = True
                reason += "; closed orbits of the surgered flow are not certified"
            if conditional and depth is None:
                depth = budget
            cert = Certificate("Yes", {"surface": sig.to_list()}, conditional, depth,
                               reason=reason)
            if not admits_expansive(sig):
                cert = Certificate("Unknown", {"surface": sig.to_list()},
                                   reason="surface admits no expansive flow; "
                                          "pieces are not minimal")
        out.append({"component": cid, "signature": sig.to_list(), "name": sig.name(),
                    "pieces": [a.pieces[p].label for p in pieces],
                    "singular_indices": sorted(v.index for v in sings),
                    "certificate": cert})
    return out


# -- scripts ------------------------------------------------------------------


def _descriptor_from(data) -> FlowSurfaceDescriptor:
    if data in (None, "torus"):
        return torus_descriptor()
    if isinstance(data, dict) and "iem" in data:
        from .iem import IntervalExchange
        from .suspension import descriptor
        return descriptor(IntervalExchange.from_dict(data["iem"]),
                          budget=int(data.get("budget", 2000)))
    if isinstance(data, dict):
        return FlowSurfaceDescriptor.from_dict(data)
    raise SurgeryError(f"cannot build a piece from {data!r}")


def _sel(x):
    return x if isinstance(x, int) else tuple(x)


def run_script(ops: list[dict], budget: int = DEFAULT_BUDGET) -> tuple[FlowAssembly, list]:
    """Execute a JSON surgery script.

    Returns the final assembly and its transcript; the transcript's top-level
    entries are themselves a valid script.
    """
    a = FlowAssembly()
    results = []
    for n, op in enumerate(ops):
        kind = op.get("op")
        try:
            if kind == "piece":
                a.add_piece(_descriptor_from(op.get("descriptor")), op.get("label", ""),
                            int(op.get("orbits", 2)), int(op.get("slots", 8)))
                _log(a, dict(op))
            elif kind == "add_fake_saddle":
                a = add_fake_saddle(a, _sel(op["site"]))
            elif kind == "remove_fake_saddle":
                a = remove_fake_saddle(a, _sel(op.get("singularity", op.get("site"))))
            elif kind == "cut":
                a = cut_saddle_connection(a, _sel(op["connection"]))
            elif kind == "glue":
                a = glue_saddle_connections(a, _sel(op["arcs"][0]), _sel(op["arcs"][1]))
            elif kind == "add_boundary":
                a = add_boundary(a, _sel(op["site"]))
            elif kind == "collapse_boundary":
                a = collapse_boundary(a, int(op["boundary"]))
            elif kind == "decide":
                results.append({"step": n, "decision": assemble_and_decide(
                    a, int(op.get("budget", budget)), bool(op.get("closed", False)))})
                continue
            else:
                raise SurgeryError(f"unknown operation {kind!r}")
        except SurgeryError as exc:
            raise type(exc)(f"step {n} ({kind}): {exc}") from None
        results.append({"step": n, "op": kind,
                        "signatures": [s.to_list() for s in a.signatures()]})
    return a, results
