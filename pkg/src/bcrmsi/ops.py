"""One function per command: request model in, response model out.

The HTTP service and the CLI both call these, so a request produces the same
bytes whichever front end serves it.
"""

from __future__ import annotations

import re

from . import fme
from .channel import CSIT, ChannelError, SideInfoConfig, build_joint, validate_channel, validate_scheme
from .degraded import check_degraded
from .region import BoundFamily, eval_bound
from .schemas import (
    BudgetModel, CapacityRequest, FmeRequest, FmeResponse, FrontierRequest, FrontierResponse,
    InclusionRequest, InclusionResponse, Problem, RegionRequest, RegionResponse, SimReportModel,
    SimulateRequest, SimulateResponse, ValidateRequest, ValidateResponse,
)
from .search import SearchBudget, causal_vs_noncausal, optimize
from .sim import SimConfig, sweep


class NotAsserted(ValueError):
    """The capacity formulas only apply to degraded channels; the caller must say so."""


CAPACITY_VARIANTS = {
    "th3": (BoundFamily.CAP_TH3, CSIT.CAUSAL, False),
    "th4": (BoundFamily.CAP_TH4, CSIT.CAUSAL, True),
    "th5": (BoundFamily.CAP_TH5, CSIT.NONCAUSAL, True),
}


def _budget(b: BudgetModel) -> SearchBudget:
    weights = None if b.weights is None else tuple(tuple(w) for w in b.weights)
    return SearchBudget(b.n_random, b.n_refine, b.seed, tuple(b.cards), weights, b.grid)


def validate(req: ValidateRequest) -> ValidateResponse:
    problems: list[Problem] = []
    spec = None
    try:
        spec = req.channel.to_spec()
        validate_channel(spec)
    except ChannelError as e:
        problems.append(Problem(kind=type(e).__name__, detail=str(e)))
    if req.scheme is not None and spec is not None:
        try:
            validate_scheme(spec, req.side_info.to_config(), req.scheme.to_scheme())
        except ChannelError as e:
            problems.append(Problem(kind=type(e).__name__, detail=str(e)))
    out = ValidateResponse(valid=not problems, problems=problems)
    if req.check_degraded and not problems:
        res = check_degraded(spec).to_dict()
        out.degraded, out.kernel = res["degraded"], res["kernel"]
    return out


def region(req: RegionRequest) -> RegionResponse:
    spec, cfg, scheme = req.channel.to_spec(), req.side_info.to_config(), req.scheme.to_scheme()
    validate_channel(spec)
    validate_scheme(spec, cfg, scheme)
    reg = eval_bound(build_joint(spec, cfg, scheme), req.family)
    return RegionResponse(family=req.family, empty=reg.empty, rows=reg.to_list())


def frontier(req: FrontierRequest) -> FrontierResponse:
    report = optimize(req.channel.to_spec(), req.side_info.to_config(), req.family, _budget(req.budget))
    return FrontierResponse.model_validate(report.to_dict())


def capacity(req: CapacityRequest) -> FrontierResponse:
    if not req.assert_degraded:
        raise NotAsserted("the capacity formulas hold for degraded channels only; assert degradedness to proceed")
    family, csit, rx1 = CAPACITY_VARIANTS[req.variant]
    cfg = SideInfoConfig(csit, rx1, req.state_at_rx2)
    report = optimize(req.channel.to_spec(), cfg, family, _budget(req.budget))
    return FrontierResponse.model_validate(report.to_dict())


def inclusion(req: InclusionRequest) -> InclusionResponse:
    rep = causal_vs_noncausal(
        req.channel.to_spec(), req.state_at_rx1, req.state_at_rx2, _budget(req.budget), req.family
    )
    return InclusionResponse.model_validate(rep.to_dict())


def _zero_names(text: str) -> list[str]:
    return [t for t in re.split(r"[\s,]+", text) if t]


def fme_verify(req: FmeRequest) -> FmeResponse:
    if (req.builtin is None) == (req.text is None):
        raise ValueError("give exactly one of a builtin name or a system text")
    if req.builtin is not None:
        return FmeResponse.model_validate(fme.verify_reduction(req.builtin, req.identities).to_dict())
    parts = fme.parse_sections(req.text)
    if not parts.get("system", "").strip():
        raise fme.GrammarError("no inequalities in the [system] section")
    raw = fme.parse_system(parts["system"])
    zero = _zero_names(parts.get("zero", ""))
    ids = fme.parse_system(parts["identities"]) if parts.get("identities", "").strip() else None
    if parts.get("target", "").strip():
        target = fme.parse_system(parts["target"])
        return FmeResponse.model_validate(fme.verify_system(raw, target, zero, ids).to_dict())
    report = fme.ProofReport(
        name="user",
        verdict=fme.Verdict.PROJECTED,
        derived=[str(q) for q in fme.derive(raw, zero).inequalities()],
        target=[],
        eliminated=fme.auxiliary_vars(fme.prepare(raw)),
        zeroed=zero,
        identities=[] if ids is None else ids.to_text().splitlines(),
    )
    return FmeResponse.model_validate(report.to_dict())


def proof_report(resp: FmeResponse) -> fme.ProofReport:
    d = resp.model_dump()
    d["verdict"] = fme.Verdict(d["verdict"])
    return fme.ProofReport(**d)


def simulate(req: SimulateRequest) -> SimulateResponse:
    spec, cfg, scheme = req.channel.to_spec(), req.side_info.to_config(), req.scheme.to_scheme()
    validate_scheme(spec, cfg, scheme)
    sim = SimConfig(
        n=req.ns[0], rates=req.rates, r11=req.r11, r12=req.r12, r21=req.r21, r22=req.r22,
        rp0=req.rp0, rp1=req.rp1, rp2=req.rp2, eps_prime=req.eps_prime, eps1=req.eps1,
        eps2=req.eps2, trials=req.trials, seed=req.seed, mode=req.mode,
    )
    reports = sweep(spec, cfg, scheme, sim, req.ns, req.rmsi)
    return SimulateResponse(reports=[SimReportModel.model_validate(r.to_dict()) for r in reports])

