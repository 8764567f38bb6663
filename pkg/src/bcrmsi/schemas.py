"""Request and response models shared by the HTTP service and the CLI."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .channel import AuxScheme, ChannelSpec, CSIT, SideInfoConfig
from .region import BoundFamily

Nested4 = list[list[list[list[float]]]]
Nested4Int = list[list[list[list[int]]]]


class ChannelModel(BaseModel):
    x_size: int
    s_size: int
    y1_size: int
    y2_size: int
    p_s: list[float]
    p_trans: Nested4

    def to_spec(self) -> ChannelSpec:
        return ChannelSpec.from_dict(self.model_dump())


class SchemeModel(BaseModel):
    u0_size: int
    u1_size: int
    u2_size: int
    p_aux: Nested4
    gamma: Nested4Int

    def to_scheme(self) -> AuxScheme:
        return AuxScheme.from_dict(self.model_dump())


class SideInfoModel(BaseModel):
    csit: CSIT = CSIT.CAUSAL
    state_at_rx1: bool = False
    state_at_rx2: bool = False

    def to_config(self) -> SideInfoConfig:
        return SideInfoConfig(self.csit, self.state_at_rx1, self.state_at_rx2)


class BudgetModel(BaseModel):
    n_random: int = Field(64, ge=0)
    n_refine: int = Field(100, ge=0)
    seed: int = 0
    cards: tuple[int, int, int] = (2, 2, 2)
    weights: Optional[list[list[float]]] = None
    grid: Optional[int] = Field(None, ge=1)


class RowModel(BaseModel):
    coeffs: list[int]
    rhs: float


class Problem(BaseModel):
    kind: str
    detail: str


# ------------------------------------------------------------------ validate

class ValidateRequest(BaseModel):
    channel: ChannelModel
    scheme: Optional[SchemeModel] = None
    side_info: SideInfoModel = SideInfoModel()
    check_degraded: bool = False


class ValidateResponse(BaseModel):
    valid: bool
    problems: list[Problem] = []
    degraded: Optional[bool] = None
    kernel: Optional[list[list[str]]] = None


# -------------------------------------------------------------------- region

class RegionRequest(BaseModel):
    channel: ChannelModel
    scheme: SchemeModel
    side_info: SideInfoModel = SideInfoModel()
    family: BoundFamily


class RegionResponse(BaseModel):
    family: BoundFamily
    empty: bool
    rows: list[RowModel]


# ------------------------------------------------------------------ frontier

class FrontierRequest(BaseModel):
    channel: ChannelModel
    side_info: SideInfoModel = SideInfoModel()
    family: BoundFamily
    budget: BudgetModel = BudgetModel()


class FrontierEntryModel(BaseModel):
    weight: list[float]
    value: float
    scheme: SchemeModel
    region: list[RowModel]
    trace: list[float]


class FrontierBudgetEcho(BaseModel):
    n_random: int
    n_refine: int
    seed: int
    cards: list[int]
    grid: Optional[int]


class FrontierResponse(BaseModel):
    family: BoundFamily
    side_info: SideInfoModel
    budget: FrontierBudgetEcho
    entries: list[FrontierEntryModel]


# ------------------------------------------------------------------ capacity

class CapacityRequest(BaseModel):
    channel: ChannelModel
    variant: Literal["th3", "th4", "th5"]
    assert_degraded: bool = False
    state_at_rx2: bool = False
    budget: BudgetModel = BudgetModel(cards=(2, 2, 1))


# ----------------------------------------------------------------- inclusion

class InclusionRequest(BaseModel):
    channel: ChannelModel
    state_at_rx1: bool = False
    state_at_rx2: bool = False
    family: BoundFamily = BoundFamily.UNIFIED_NO_RMSI
    budget: BudgetModel = BudgetModel()


class InclusionRow(BaseModel):
    weight: list[float]
    causal: float
    noncausal: float
    holds: bool


class InclusionResponse(BaseModel):
    verdict: Literal["HOLDS", "FAILS"]
    per_weight: list[InclusionRow]
    causal: FrontierResponse
    noncausal: FrontierResponse


# ----------------------------------------------------------------------- fme

class FmeRequest(BaseModel):
    builtin: Optional[str] = None
    text: Optional[str] = None
    identities: bool = True


class FmeResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    verdict: str
    eliminated: list[str]
    zeroed: list[str]
    identities: list[str]
    derived: list[str]
    target: list[str]
    derived_only: list[str]
    target_only: list[str]
    side_conditions: list[str]


# ------------------------------------------------------------------ simulate

class SimulateRequest(BaseModel):
    channel: ChannelModel
    scheme: SchemeModel
    side_info: SideInfoModel = SideInfoModel()
    rates: tuple[float, float, float, float, float]
    ns: list[int] = Field(min_length=1)
    r11: Optional[float] = None
    r12: Optional[float] = None
    r21: Optional[float] = None
    r22: Optional[float] = None
    rp0: float = 0.0
    rp1: float = 0.0
    rp2: float = 0.0
    eps_prime: float = 0.1
    eps1: float = 0.2
    eps2: float = 0.2
    trials: int = Field(100, ge=0)
    seed: int = 0
    mode: Literal["auto", "exhaustive", "ensemble"] = "auto"
    rmsi: bool = False


class Causes(BaseModel):
    covering: int
    rx1_packing: int
    rx2_packing: int


class SimReportModel(BaseModel):
    n: int
    rates: dict[str, float]
    trials: int
    p_e: float
    ci_low: float
    ci_high: float
    causes: Causes


class SimulateResponse(BaseModel):
    reports: list[SimReportModel]
