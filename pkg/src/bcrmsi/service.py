"""HTTP front end: one POST route per command, same models as the CLI."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import ops
from .schemas import (
    CapacityRequest, FmeRequest, FmeResponse, FrontierRequest, FrontierResponse, InclusionRequest,
    InclusionResponse, RegionRequest, RegionResponse, SimulateRequest, SimulateResponse,
    ValidateRequest, ValidateResponse,
)
from .sim import BudgetExceeded

app = FastAPI(title="bcrmsi")


def _call(fn, req):
    try:
        return fn(req)
    except (ValueError, BudgetExceeded) as e:
        raise HTTPException(status_code=422, detail={"kind": type(e).__name__, "detail": str(e)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest):
    return _call(ops.validate, req)


@app.post("/region", response_model=RegionResponse)
def region(req: RegionRequest):
    return _call(ops.region, req)


@app.post("/frontier", response_model=FrontierResponse)
def frontier(req: FrontierRequest):
    return _call(ops.frontier, req)


@app.post("/capacity", response_model=FrontierResponse)
def capacity(req: CapacityRequest):
    return _call(ops.capacity, req)


@app.post("/inclusion", response_model=InclusionResponse)
def inclusion(req: InclusionRequest):
    return _call(ops.inclusion, req)


@app.post("/fme", response_model=FmeResponse)
def fme(req: FmeRequest):
    return _call(ops.fme_verify, req)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest):
    return _call(ops.simulate, req)
