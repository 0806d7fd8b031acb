"""Request and response models plus the handlers behind the service and CLI.

Scalars travel as strings in the exact textual form (``"1/3"``,
``"1/2-1/2*sqrt(5)"``).  Every response carries a versioned ``schema`` tag.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, Field, field_validator

from . import billiard as bl
from .exactnum import Quad, parse_scalar
from .iem import (DEFAULT_BUDGET, IntervalExchange, is_expansive_iem, orbit, separation_test,
                  singular_set)
from .metricflow import (SuspensionFlow, SuspensionPoint, dist_phi, expansive_pair_test,
                         kstar_pair_test)
from .suspension import descriptor, is_expansive_flow, suspend, vertex_classes
from .surgery import SurfaceSignature, admits_expansive, run_script

SCHEMA = "expflow/{}/v1"

Scalar = str | int


def _q(x: Scalar) -> Quad:
    return parse_scalar(str(x))


class InputError(ValueError):
    """Raised for requests that are well-formed JSON but not valid input."""


class IEMSpec(BaseModel):
    lengths: list[Scalar] = Field(min_length=1)
    permutation: list[int] = Field(min_length=1)
    normalize: bool = False

    def build(self) -> IntervalExchange:
        lengths = [_q(x) for x in self.lengths]
        if self.normalize:
            return IntervalExchange.normalized(lengths, self.permutation)
        return IntervalExchange(lengths, self.permutation)


class IEMCheck(BaseModel):
    iem: IEMSpec
    budget: int = Field(DEFAULT_BUDGET, gt=0)


class IEMOrbit(BaseModel):
    iem: IEMSpec
    x: Scalar
    steps: int = Field(20, ge=0)


class IEMSeparate(BaseModel):
    iem: IEMSpec
    x: Scalar
    y: Scalar
    delta: Scalar
    horizon: int = Field(DEFAULT_BUDGET, gt=0)


class SuspendRequest(BaseModel):
    iem: IEMSpec
    budget: int = Field(2000, gt=0)


class AdmitRequest(BaseModel):
    h: int = Field(ge=0)
    b: int = Field(0, ge=0)
    c: int = Field(0, ge=0)


class SurgeryRequest(BaseModel):
    ops: list[dict[str, Any]]
    budget: int = Field(2000, gt=0)


class PolygonSpec(BaseModel):
    angles: list[Scalar] = Field(min_length=3)
    vertices: list[list[Scalar]] | None = None

    @field_validator("angles")
    @classmethod
    def _no_floats(cls, v):
        for a in v:
            if "." in str(a):
                raise ValueError(f"angle {a} must be a fraction of pi such as 1/8")
        return v

    def build(self) -> bl.RationalPolygon:
        angles = [Fraction(str(a)) for a in self.angles]
        if self.vertices is not None:
            return bl.RationalPolygon(angles, [tuple(_q(c) for c in v) for v in self.vertices])
        if len(angles) == 3:
            return bl.RationalPolygon.triangle(*angles)
        if all(a == Fraction(1, 2) for a in angles) and len(angles) == 4:
            return bl.RationalPolygon.rectangle()
        return bl.RationalPolygon(angles)


class BilliardUnfold(BaseModel):
    polygon: PolygonSpec


class BilliardTrace(BaseModel):
    polygon: PolygonSpec
    direction: list[Scalar] = Field(min_length=2, max_length=2)
    start: list[Scalar] = Field(min_length=2, max_length=2)
    budget: int = Field(1000, gt=0)


class BilliardVerdict(BaseModel):
    polygon: PolygonSpec
    direction: list[Scalar] = Field(min_length=2, max_length=2)
    budget: int = Field(2000, gt=0)


class PointSpec(BaseModel):
    base: Scalar
    height: Scalar = "0"

    def build(self) -> SuspensionPoint:
        return SuspensionPoint(_q(self.base), _q(self.height))


class PairTest(BaseModel):
    iem: IEMSpec
    x: PointSpec | None = None
    y: PointSpec | None = None
    delta: Scalar
    eps: Scalar = "1/20"
    horizon: int = Field(10_000, gt=0)
    # batch mode: random near pairs instead of x, y
    pairs: int = Field(0, ge=0)
    spread: Scalar = "1/1000"
    seed: int = 0


def _out(kind: str, body: dict, decided: bool = True) -> dict:
    return {"schema": SCHEMA.format(kind), "decided": decided, **body}


# -- handlers ----------------------------------------------------------------


def iem_check(req: IEMCheck) -> dict:
    f = req.iem.build()
    cert = is_expansive_iem(f, req.budget)
    sd = singular_set(f)
    return _out("iem-check", {"expansive": cert.verdict, "certificate": cert.to_dict(),
                              "singular": sd.to_dict(), "iem": f.to_dict()},
                cert.verdict != "Unknown")


def iem_orbit(req: IEMOrbit) -> dict:
    return _out("iem-orbit", orbit(req.iem.build(), _q(req.x), req.steps).to_dict())


def iem_separate(req: IEMSeparate) -> dict:
    r = separation_test(req.iem.build(), _q(req.x), _q(req.y), _q(req.delta), req.horizon)
    return _out("iem-separate", r.to_dict())


def suspend_handler(req: SuspendRequest) -> dict:
    f = req.iem.build()
    c = suspend(f)
    d = descriptor(f, budget=req.budget)
    cert = is_expansive_flow(d, req.budget)
    return _out("suspend", {
        "polygon": {"corners": [f"{s}{k}" for s, k in c.corners],
                    "classes": [list(g) for g in c.classes],
                    "multiplicities": list(c.multiplicities),
                    "singularities": [r.to_dict() for r in vertex_classes(c)],
                    "chi": c.chi},
        "descriptor": d.to_dict(), "expansive": cert.verdict, "certificate": cert.to_dict(),
    }, cert.verdict != "Unknown")


def surface_admit(req: AdmitRequest) -> dict:
    s = SurfaceSignature(req.h, req.b, req.c)
    return _out("surface-admit", {"admits": admits_expansive(s),
                                  "signature": s.canonical().to_list(),
                                  "name": s.canonical().name(), "chi": s.chi})


def surgery_exec(req: SurgeryRequest) -> dict:
    a, results = run_script(req.ops, req.budget)
    decided = True
    for r in results:
        for comp in r.get("decision", ()):
            comp["certificate"] = comp["certificate"].to_dict()
            decided &= comp["certificate"]["verdict"] != "Unknown"
    return _out("surgery", {"results": results, "summary": a.summary(),
                            "signatures": [s.to_list() for s in a.signatures()],
                            "transcript": a.transcript}, decided)


def billiard_unfold(req: BilliardUnfold) -> dict:
    p = req.polygon.build()
    u = bl.unfold(p)
    return _out("billiard-unfold", {"polygon": p.to_dict(), "unfolding": u.to_dict(),
                                    "torus": bl.is_torus_polygon(p)})


def billiard_trace(req: BilliardTrace) -> dict:
    p = req.polygon.build()
    flow = bl.DirectionalFlow(p, tuple(_q(c) for c in req.direction))
    tr = bl.trace(flow, tuple(_q(c) for c in req.start), budget=req.budget)
    return _out("billiard-trace", tr.to_dict())


def billiard_verdict(req: BilliardVerdict) -> dict:
    p = req.polygon.build()
    v = tuple(_q(c) for c in req.direction)
    cert = bl.is_expansive_billiard(p, v, req.budget)
    body = {"expansive": cert.verdict, "certificate": cert.to_dict()}
    if cert.witness and "torus_polygon" in cert.witness:
        body["reason"] = "torus"
    return _out("billiard-verdict", body, cert.verdict != "Unknown")


def _pair_row(flow, f, x, y, delta, eps, horizon) -> dict:
    pair = expansive_pair_test(flow, x, y, delta, horizon)
    base = separation_test(f, x.base, y.base, delta, horizon)
    row = {"x": x.to_dict(), "y": y.to_dict(), "pair": pair.to_dict(),
           "iem_separated": base.separated, "iem_n": base.n,
           "dphi": str(dist_phi(flow, x, y))}
    if not pair.separated and pair.hit is None:
        row["kstar"] = kstar_pair_test(flow, x, y, delta, eps, horizon).to_dict()
    return row


def flow_pairtest(req: PairTest) -> dict:
    f = req.iem.build()
    flow = SuspensionFlow(f)
    delta, eps = _q(req.delta), _q(req.eps)
    if req.pairs:
        rng = random.Random(req.seed)
        spread = Fraction(str(req.spread))
        scale = 10**6
        rows = []
        for _ in range(req.pairs):
            x = Quad(Fraction(rng.randint(1, scale - 1), scale))
            gap = Fraction(rng.randint(1, int(spread * scale) - 1 or 1), scale)
            rows.append(_pair_row(flow, f, SuspensionPoint(x), SuspensionPoint(x + gap),
                                  delta, eps, req.horizon))
        return _out("flow-pairtest", {"rows": rows})
    if req.x is None or req.y is None:
        raise InputError("give x and y, or a positive pairs count")
    return _out("flow-pairtest", _pair_row(flow, f, req.x.build(), req.y.build(), delta, eps,
                                           req.horizon))


ROUTES: dict[str, tuple[type[BaseModel], Any]] = {
    "iem/check": (IEMCheck, iem_check),
    "iem/orbit": (IEMOrbit, iem_orbit),
    "iem/separate": (IEMSeparate, iem_separate),
    "suspend": (SuspendRequest, suspend_handler),
    "surface/admit": (AdmitRequest, surface_admit),
    "surgery/exec": (SurgeryRequest, surgery_exec),
    "billiard/unfold": (BilliardUnfold, billiard_unfold),
    "billiard/trace": (BilliardTrace, billiard_trace),
    "billiard/verdict": (BilliardVerdict, billiard_verdict),
    "flow/pairtest": (PairTest, flow_pairtest),
}

# errors the core raises for bad input rather than bugs
INPUT_ERRORS: tuple[type[Exception], ...] = (ValueError, TypeError, ZeroDivisionError,
                                             ArithmeticError, RuntimeError)


def dispatch(route: str, payload: dict) -> dict:
    model, handler = ROUTES[route]
    return handler(model.model_validate(payload))
