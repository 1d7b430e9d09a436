"""HTTP service wrapping the solver library.

Endpoints cover single-instance solves for every scheme, reproducible
channel generation, and full Monte-Carlo experiment sweeps. The CLI talks to
this app (in process by default), and any number of remote clients can share
one uvicorn deployment; the underlying library is pure, so concurrent
requests do not interact.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .baselines import Scheme, solve_scheme
from .dual import ellipsoid_solve
from .experiments import (
    ConfigError,
    ExperimentConfig,
    ResultRow,
    aggregate,
    build_channels,
    run_experiment,
)
from .model import DEFAULT_REF_GAIN_DB, ChannelState

app = FastAPI(
    title="swiptjam",
    description=(
        "Joint Tx/jammer power allocation maximizing OFDM secrecy rate "
        "under wireless-powered cooperative jamming."
    ),
    version="0.1.0",
)


class ScenarioIn(BaseModel):
    """Single operating point; defaults mirror the reference setup."""

    n_sc: int = Field(64, ge=1)
    sigma2_dbm: float = -60.0
    ploss_exp: float = 3.0
    d_tx_ir_m: float = 20.0
    d_tx_er_m: float = 10.0
    er_angle_deg: float = 30.0
    d1_m: float = 10.0
    p_dbm: float = 30.0
    qbar_uw: float = Field(100.0, ge=0.0)
    peak_factor: float = Field(2.0, gt=0.0)
    zeta: float = Field(1.0, gt=0.0, le=1.0)
    fading: Literal["rayleigh", "none"] = "rayleigh"
    ref_gain_db: float = DEFAULT_REF_GAIN_DB
    seed: int = 1
    trial: int = 0


class ChannelsModel(BaseModel):
    h_i: list[float]
    h_e: list[float]
    h_j: list[float]
    g_i: list[float]
    g_e: list[float]


class SolveRequest(BaseModel):
    scenario: ScenarioIn = ScenarioIn()
    scheme: Literal["proposed", "epa", "nojammer", "nocancel"] = "proposed"
    channels: Optional[ChannelsModel] = None  # explicit gains skip generation


class AllocationModel(BaseModel):
    p: list[float]
    q: list[float]
    secrecy_rate_bits: float
    feasible: bool


class SolveResponse(BaseModel):
    scheme: str
    allocation: AllocationModel
    iterations: int
    runtime_ms: float
    dual_bound: Optional[float] = None
    gap: Optional[float] = None
    duals: Optional[dict[str, float]] = None
    case_histogram: Optional[dict[str, int]] = None
    status: Optional[str] = None


class ExperimentRequest(BaseModel):
    """Mirror of the experiment config document."""

    n_sc: int = 64
    sigma2_dbm: float = -60.0
    ploss_exp: float = 3.0
    d_tx_ir_m: float = 20.0
    d_tx_er_m: float = 10.0
    er_angle_deg: float = 30.0
    d1_m: float = 10.0
    p_dbm: float = 30.0
    qbar_uw: float = 100.0
    peak_factor: float = 2.0
    zeta: float = 1.0
    fading: Literal["rayleigh", "none"] = "rayleigh"
    ref_gain_db: float = DEFAULT_REF_GAIN_DB
    seed: int = 1
    trials: int = 1
    sweep: Literal["qbar", "p", "d1", "p_x_d1"] = "qbar"
    sweep_values: list[float] = Field(default_factory=list)
    sweep_values_2: list[float] = Field(default_factory=list)
    schemes: list[str] = Field(
        default_factory=lambda: ["proposed", "epa", "nojammer", "nocancel"]
    )


class RowModel(BaseModel):
    sweep_name: str
    sweep_value: float
    trial: int
    scheme: str
    secrecy_rate_bits: float
    feasible: bool
    iterations: int
    runtime_ms: float
    seed: int
    fading: str


class AggregateModel(BaseModel):
    sweep_name: str
    sweep_value: float
    scheme: str
    mean_rate_bits: float
    ci_half_width: float
    feasible_fraction: float
    n_trials: int


class ExperimentResponse(BaseModel):
    rows: list[RowModel]
    aggregates: list[AggregateModel]


def _to_config(req: ExperimentRequest) -> ExperimentConfig:
    data = req.model_dump()
    data["sweep_values"] = tuple(data["sweep_values"])
    data["sweep_values_2"] = tuple(data["sweep_values_2"])
    data["schemes"] = tuple(data["schemes"])
    try:
        return ExperimentConfig(**data)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _scenario_setup(scenario: ScenarioIn, channels: Optional[ChannelsModel]):
    cfg = ExperimentConfig(
        n_sc=scenario.n_sc,
        sigma2_dbm=scenario.sigma2_dbm,
        ploss_exp=scenario.ploss_exp,
        d_tx_ir_m=scenario.d_tx_ir_m,
        d_tx_er_m=scenario.d_tx_er_m,
        er_angle_deg=scenario.er_angle_deg,
        d1_m=scenario.d1_m,
        p_dbm=scenario.p_dbm,
        qbar_uw=scenario.qbar_uw,
        peak_factor=scenario.peak_factor,
        zeta=scenario.zeta,
        fading=scenario.fading,
        ref_gain_db=scenario.ref_gain_db,
        seed=scenario.seed,
        trials=1,
    )
    params, ch = build_channels(cfg, cfg.d1_m, cfg.p_dbm, cfg.qbar_uw, scenario.trial)
    if channels is not None:
        try:
            ch = ChannelState(
                h_i=np.array(channels.h_i),
                h_e=np.array(channels.h_e),
                h_j=np.array(channels.h_j),
                g_i=np.array(channels.g_i),
                g_e=np.array(channels.g_e),
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if ch.n_sc != params.n_sc:
            raise HTTPException(status_code=400, detail="channel length must equal n_sc")
    return params, ch


def _clean(x: float) -> Optional[float]:
    return None if not math.isfinite(x) else x


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/channels", response_model=ChannelsModel)
def channels(scenario: ScenarioIn) -> ChannelsModel:
    """Deterministic channel draw for a scenario (seed, trial)."""
    try:
        _, ch = _scenario_setup(scenario, None)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return ChannelsModel(
        h_i=ch.h_i.tolist(),
        h_e=ch.h_e.tolist(),
        h_j=ch.h_j.tolist(),
        g_i=ch.g_i.tolist(),
        g_e=ch.g_e.tolist(),
    )


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    """Solve one instance with the requested scheme."""
    try:
        params, ch = _scenario_setup(req.scenario, req.channels)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    t0 = time.perf_counter()
    if req.scheme == Scheme.PROPOSED.value:
        report = ellipsoid_solve(ch, params)
        alloc = report.allocation
        extra = dict(
            dual_bound=_clean(report.dual_bound),
            gap=_clean(report.gap),
            duals={
                "lam": report.duals.lam,
                "beta": report.duals.beta,
                "mu": report.duals.mu,
            },
            case_histogram=report.subproblem_case_histogram,
            status=report.status,
        )
        iterations = report.iterations
    else:
        alloc, iterations = solve_scheme(Scheme(req.scheme), ch, params)
        extra = {}
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return SolveResponse(
        scheme=req.scheme,
        allocation=AllocationModel(
            p=alloc.p.tolist(),
            q=alloc.q.tolist(),
            secrecy_rate_bits=alloc.secrecy_rate,
            feasible=alloc.feasible,
        ),
        iterations=iterations,
        runtime_ms=runtime_ms,
        **extra,
    )


@app.post("/experiment", response_model=ExperimentResponse)
def experiment(req: ExperimentRequest) -> ExperimentResponse:
    """Run a full sweep; rows come back sorted and ready for CSV emission."""
    cfg = _to_config(req)
    rows = run_experiment(cfg)
    return ExperimentResponse(
        rows=[RowModel(**asdict(r)) for r in rows],
        aggregates=[AggregateModel(**asdict(a)) for a in aggregate(rows)],
    )
