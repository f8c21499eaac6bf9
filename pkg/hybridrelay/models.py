"""Pydantic models for the hybrid HD/FD relay outage toolkit."""

from __future__ import annotations

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class ChannelParams(_Frozen):
    """Mean squared gains of the S->Ant-1, S->Ant-2, Ant-1->D and Ant-2->D links."""

    omega_11: float = Field(default=1.0, gt=0)
    omega_12: float = Field(default=1.0, gt=0)
    omega_21: float = Field(default=1.0, gt=0)
    omega_22: float = Field(default=1.0, gt=0)

    @property
    def lambda_11(self) -> float:
        return 1.0 / self.omega_11

    @property
    def lambda_12(self) -> float:
        return 1.0 / self.omega_12

    @property
    def lambda_21(self) -> float:
        return 1.0 / self.omega_21

    @property
    def lambda_22(self) -> float:
        return 1.0 / self.omega_22

    def omegas(self) -> tuple[float, float, float, float]:
        return (self.omega_11, self.omega_12, self.omega_21, self.omega_22)


class GainSample(_Frozen):
    """One block-fading realization of the four squared channel gains."""

    g11: float = Field(ge=0)
    g12: float = Field(ge=0)
    g21: float = Field(ge=0)
    g22: float = Field(ge=0)


class SystemConfig(_Frozen):
    """Scalar system parameters; powers and noise in linear units."""

    p_s: float = Field(gt=0)
    p_r: float = Field(gt=0)
    sigma2: float = Field(default=1.0, gt=0)
    # Residual self-interference coefficient; sigma2_RSI = k_r * p_r
    k_r: float = Field(default=0.0, ge=0)
    r0: float = Field(gt=0)
    channel: ChannelParams = Field(default_factory=ChannelParams)

    @property
    def rsi_var(self) -> float:
        return self.k_r * self.p_r

    def with_rsi_var(self, rsi_var: float) -> "SystemConfig":
        """Copy with k_r back-derived so that k_r * p_r equals ``rsi_var``."""
        return self.evolve(k_r=rsi_var / self.p_r)

    def evolve(self, **changes) -> "SystemConfig":
        # model_copy(update=...) skips validation
        return SystemConfig.model_validate({**self.model_dump(), **changes})


class Thresholds(_Frozen):
    t1: float = Field(ge=0)
    t2: float = Field(ge=0)
    m1: float = Field(ge=0)
    m2: float = Field(ge=0)
    # relay->destination HD threshold, t2 * sigma2 / p_r
    m2p: float = Field(ge=0)
    m3: float = Field(ge=0)


class Mode(str, Enum):
    FD = "fd"
    HD = "hd"


class ModeDecision(BaseModel):
    c_fd: float
    c_hd: float
    selected: Mode
    outage: bool


class EventTag(str, Enum):
    """FD failure events: A = sr hop only, B = rd hop only, C = both hops."""

    A = "A"
    B = "B"
    C = "C"


class Hop(str, Enum):
    SR = "sr"
    RD = "rd"


class HopTerms(BaseModel):
    p_sr: float = Field(ge=0, le=1)
    p_rd: float = Field(ge=0, le=1)
    # both hops in outage; the hops are conditionally independent given the event
    p_joint: float = Field(ge=0, le=1)
    p_total: float = Field(ge=0, le=1)
    # conditioning set had no numerical mass; unconditional hop outage used
    degenerate: bool = False


class OutageBreakdown(BaseModel):
    p_fd: float = Field(ge=0, le=1)
    p_hd: float = Field(ge=0, le=1)
    p_sys: float = Field(ge=0, le=1)
    pr_event: Dict[EventTag, float]
    cond_hd: Dict[EventTag, HopTerms]
    thresholds: Thresholds
    degenerate_events: List[EventTag] = Field(default_factory=list)


# Monte Carlo


class Estimate(BaseModel):
    p_hat: Optional[float] = None
    stderr: Optional[float] = None
    # denominator of the estimator (n for unconditional, event count otherwise)
    n: int
    status: str = "ok"


class McCounts(BaseModel):
    n: int = 0
    fd_out: int = 0
    hd_out: int = 0
    sys_out: int = 0
    trad_out: int = 0
    selected_fd: int = 0
    selected_hd: int = 0
    no_event: int = 0
    event: Dict[EventTag, int] = Field(default_factory=lambda: _zero_counts())
    event_sr_out: Dict[EventTag, int] = Field(default_factory=lambda: _zero_counts())
    event_rd_out: Dict[EventTag, int] = Field(default_factory=lambda: _zero_counts())
    event_joint_out: Dict[EventTag, int] = Field(default_factory=lambda: _zero_counts())
    event_hd_out: Dict[EventTag, int] = Field(default_factory=lambda: _zero_counts())
    event_trad_hd_out: Dict[EventTag, int] = Field(
        default_factory=lambda: _zero_counts()
    )

    def merged(self, other: "McCounts") -> "McCounts":
        data = self.model_dump()
        for key, value in other.model_dump().items():
            if isinstance(value, dict):
                data[key] = {tag: data[key][tag] + value[tag] for tag in EventTag}
            else:
                data[key] += value
        return McCounts.model_validate(data)


def _zero_counts() -> Dict[EventTag, int]:
    return {tag: 0 for tag in EventTag}


class McEstimate(BaseModel):
    seed: int
    n: int
    generator: str
    chunk_size: int
    p_fd: Estimate
    p_hd: Estimate
    p_sys: Estimate
    p_traditional: Estimate
    pr_event: Dict[EventTag, Estimate]
    cond_hd: Dict[EventTag, Estimate]
    cond_sr: Dict[EventTag, Estimate]
    cond_rd: Dict[EventTag, Estimate]
    cond_joint: Dict[EventTag, Estimate]
    counts: McCounts


# Sweeps


class SweepVariable(str, Enum):
    P_R_DB = "pr-db"
    P_S_DB = "ps-db"
    R0 = "r0"
    # swept in dB relative to sigma2; k_r = sigma2_RSI / p_r
    RSI_VAR = "rsi-var"


class Scheme(str, Enum):
    PROPOSED = "proposed"
    TRADITIONAL = "traditional"
    FD_ONLY = "fd_only"
    HD_ONLY = "hd_only"


class SweepSpec(BaseModel):
    variable: SweepVariable
    start: float
    stop: float
    step: float = Field(gt=0)
    base: SystemConfig
    # hold sigma2_RSI fixed while p_r moves (k_r re-derived per grid point)
    rsi_var: Optional[float] = Field(default=None, ge=0)
    mc_samples: int = Field(default=0, ge=0)
    seed: int = Field(default=2017, ge=0)
    schemes: List[Scheme] = Field(
        default_factory=lambda: [Scheme.PROPOSED, Scheme.TRADITIONAL]
    )

    @model_validator(mode="after")
    def _check_range(self) -> "SweepSpec":
        if self.start > self.stop:
            raise ValueError("start must not exceed stop")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        return self


class SchemeResult(BaseModel):
    scheme: Scheme
    p_analytic: Optional[float] = None
    p_mc: Optional[float] = None
    stderr: Optional[float] = None


class SweepRow(BaseModel):
    index: int
    variable: SweepVariable
    value: float
    results: List[SchemeResult]
    n_samples: int
    seed: int
    status: str = "ok"
    breakdown: Optional[OutageBreakdown] = None


class TableRow(BaseModel):
    """Flat output record: one (grid point, scheme) pair."""

    sweep_variable: str
    value: float
    scheme: str
    p_analytic: Optional[float] = None
    p_mc: Optional[float] = None
    stderr: Optional[float] = None
    n_samples: int
    seed: int
    status: str


# Self-check suite


class GateResult(BaseModel):
    name: str
    passed: bool
    checked: int
    failures: int
    worst: Optional[float] = None
    detail: str = ""


class ValidationReport(BaseModel):
    passed: bool
    seed: int
    grid_size: int
    mc_samples: int
    gates: List[GateResult]


# HTTP bodies


class PointResponse(BaseModel):
    breakdown: OutageBreakdown
    p_traditional: float


class McRequest(BaseModel):
    config: SystemConfig
    n: int = Field(default=100_000, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)


class McResponse(BaseModel):
    analytic: OutageBreakdown
    p_traditional: float
    estimate: McEstimate


class ValidateRequest(BaseModel):
    grid_size: Optional[int] = Field(default=None, ge=1)
    mc_samples: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = Field(default=None, ge=0)


class SweepResponse(BaseModel):
    rows: List[TableRow]


class ConditionalTerm(BaseModel):
    tag: EventTag
    hop: Hop
    closed_form: float
    quadrature: float


class ConditionalResponse(BaseModel):
    terms: List[ConditionalTerm]
