"""HTTP front end: one POST route per library operation."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .api import (INPUT_ERRORS, AdmitRequest, BilliardTrace, BilliardUnfold, BilliardVerdict,
                  IEMCheck, IEMOrbit, IEMSeparate, PairTest, SurgeryRequest, SuspendRequest,
                  billiard_trace, billiard_unfold, billiard_verdict, flow_pairtest, iem_check,
                  iem_orbit, iem_separate, surface_admit, surgery_exec, suspend_handler)

app = FastAPI(title="expflow", version=__version__)


def _run(handler, req):
    try:
        return handler(req)
    except INPUT_ERRORS as exc:
        raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}") from None


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/iem/check")
def post_iem_check(req: IEMCheck):
    return _run(iem_check, req)


@app.post("/iem/orbit")
def post_iem_orbit(req: IEMOrbit):
    return _run(iem_orbit, req)


@app.post("/iem/separate")
def post_iem_separate(req: IEMSeparate):
    return _run(iem_separate, req)


@app.post("/suspend")
def post_suspend(req: SuspendRequest):
    return _run(suspend_handler, req)


@app.post("/surface/admit")
def post_surface_admit(req: AdmitRequest):
    return _run(surface_admit, req)


@app.post("/surgery/exec")
def post_surgery(req: SurgeryRequest):
    return _run(surgery_exec, req)


@app.post("/billiard/unfold")
def post_billiard_unfold(req: BilliardUnfold):
    return _run(billiard_unfold, req)


@app.post("/billiard/trace")
def post_billiard_trace(req: BilliardTrace):
    return _run(billiard_trace, req)


@app.post("/billiard/verdict")
def post_billiard_verdict(req: BilliardVerdict):
    return _run(billiard_verdict, req)


@app.post("/flow/pairtest")
def post_pairtest(req: PairTest):
    return _run(flow_pairtest, req)
