"""
BusyQ - FastAPI Application
=============================
REST surface over the busy-period engines.

Endpoints:
  GET  /api/health              — Health check
  GET  /api/tables              — Registered reference tables
  GET  /api/tables/{table_id}   — Recompute a table and compare with reference values
  POST /api/moments             — E[B^1..B^n]
  POST /api/shape               — (δ1, δ2, δ3)
  POST /api/cdf                 — B(t) on a grid
  POST /api/lst                 — E[exp(-sB)]
  POST /api/simulate            — Monte Carlo estimates

Parameter errors answer 422, unknown tables 404, computation failures 500.
"""

import json
import math
import traceback
from typing import List, Literal, Optional, Union

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, PositiveFloat, PositiveInt

from busyq import __version__
from busyq.config import HOST, PORT, SIM_DEFAULT_SEED
from busyq.data_loader import parse_dist_spec
from busyq.distributions import BetaFamily, QueueConfig
from busyq.errors import BusyQError, ParameterDomainError, UnknownTableError
from busyq.moments import busy_period_moments, mean_busy_period, shape_stats
from busyq.quadrature import QuadratureSettings, TailPolicy
from busyq.simulate import SimulationPlan, sample_busy_periods
from busyq.tables import TABLES, compute_table, list_tables, normalize_table_id, table_exit_code
from busyq.transforms import (
    SeriesSettings,
    busy_cdf_beta,
    busy_cdf_heavy_traffic,
    busy_cdf_series,
    lst_busy_beta,
    lst_busy_period,
    resolve_grid,
)

# ===================== App Setup =====================

app = FastAPI(
    title="BusyQ API",
    description="Busy-period moments, shape coefficients, distribution function and "
                "transform of the M|G|∞ queue.",
    version=__version__,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# ===================== Request Models =====================


class QueueRequest(BaseModel):
    """Distribution spec plus λ (or ρ), shared by every computation."""
    dist: str = Field(..., min_length=3, description="Distribution spec, e.g. exp:alpha=1")
    lam: Optional[PositiveFloat] = Field(default=None, alias="lambda", description="Arrival rate λ")
    rho: Optional[PositiveFloat] = Field(default=None, description="Traffic intensity; λ = ρ/α")
    rel_tol: Optional[PositiveFloat] = Field(default=None, description="Quadrature relative tolerance")
    abs_tol: Optional[PositiveFloat] = Field(default=None, description="Quadrature absolute tolerance")
    horizon: Union[Literal["auto"], PositiveFloat] = Field(default="auto")
    tail_policy: TailPolicy = Field(default=TailPolicy.ERROR_IF_DIVERGENT)

    model_config = {"populate_by_name": True}

    def queue_config(self) -> QueueConfig:
        service = parse_dist_spec(self.dist)
        if isinstance(service, BetaFamily):
            return QueueConfig(self.lam or service.lam, service)
        if self.lam is not None:
            return QueueConfig(self.lam, service)
        if self.rho is not None:
            return QueueConfig.from_rho(service, self.rho)
        raise ParameterDomainError("lambda (or rho) is required for this distribution")

    def quadrature(self) -> QuadratureSettings:
        overrides = {"truncation_horizon": self.horizon, "tail_policy": self.tail_policy}
        if self.rel_tol is not None:
            overrides["rel_tol"] = self.rel_tol
        if self.abs_tol is not None:
            overrides["abs_tol"] = self.abs_tol
        return QuadratureSettings(**overrides)


class MomentsRequest(QueueRequest):
    n: int = Field(default=4, ge=1, le=64, description="Highest moment order")


class CdfRequest(QueueRequest):
    method: Literal["series", "beta-closed", "heavy-traffic"] = Field(default="series")
    dt: Optional[PositiveFloat] = None
    t_max: Optional[PositiveFloat] = None
    n_terms: Union[Literal["auto"], PositiveInt] = Field(default="auto")


class LstRequest(QueueRequest):
    s: List[PositiveFloat] = Field(..., min_length=1, description="Transform arguments")


class SimulateRequest(QueueRequest):
    periods: int = Field(default=10_000, ge=1, le=1_000_000)
    replications: int = Field(default=1, ge=1, le=64)
    seed: int = Field(default=SIM_DEFAULT_SEED, ge=0, lt=2**64)


class HealthResponse(BaseModel):
    """Health check response."""
    status: str
    version: str
    tables: int


# ===================== Helpers =====================


def _finite(value):
    """JSON has no infinities: map them (and NaN) to None."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _clean(records):
    return [{k: _finite(v) for k, v in record.items()} for record in records]


def _fail(stage: str, e: Exception):
    if isinstance(e, UnknownTableError):
        raise HTTPException(status_code=404, detail=str(e))
    if isinstance(e, ParameterDomainError):
        raise HTTPException(status_code=422, detail=str(e))
    traceback.print_exc()
    raise HTTPException(status_code=500, detail=f"{stage} error: {str(e)}")


# ===================== Startup Event =====================

@app.on_event("startup")
async def startup_event():
    print("=" * 60)
    print("  BusyQ — M|G|∞ busy-period analysis")
    print(f"  {len(TABLES)} reference tables registered")
    print(f"  Listening on {HOST}:{PORT}")
    print("=" * 60)


# ===================== API Endpoints =====================

@app.get("/api/health", response_model=HealthResponse)
def health_check():
    """Health check endpoint."""
    return HealthResponse(status="healthy", version=__version__, tables=len(TABLES))


@app.get("/api/tables")
def get_tables():
    return {"tables": list_tables()}


@app.get("/api/tables/{table_id}")
def get_table_report(table_id: str):
    """Recompute every cell of a reference table."""
    try:
        key = normalize_table_id(table_id)
        report = compute_table(key)
    except BusyQError as e:
        _fail("Table", e)
    return {
        "table": key,
        "exit_code": table_exit_code(report),
        "outcomes": report["outcome"].value_counts().to_dict(),
        "cells": json.loads(report.to_json(orient="records")),
    }


@app.post("/api/moments")
def moments(request: MomentsRequest):
    try:
        config = request.queue_config()
        result = busy_period_moments(config, request.n, request.quadrature())
    except BusyQError as e:
        _fail("Moments", e)
    return {
        "distribution": config.service.label,
        "lambda": config.lam,
        "rho": config.rho,
        "provenance": result.provenance.value,
        "divergent_from": result.divergent_from,
        "degenerate": result.degenerate,
        "moments": _clean(result.to_records()),
        "warnings": list(result.warnings),
    }


@app.post("/api/shape")
def shape(request: QueueRequest):
    try:
        config = request.queue_config()
        settings = request.quadrature()
        result = busy_period_moments(config, 4, settings)
        stats = shape_stats(
            result, allow_divergent=settings.tail_policy is TailPolicy.TRUNCATE_AND_WARN
        )
    except BusyQError as e:
        _fail("Shape", e)
    return {
        "distribution": config.service.label,
        "rho": config.rho,
        **stats.as_dict(),
        "distance_from_exponential": stats.distance_from_exponential(),
        "warnings": list(result.warnings),
    }


@app.post("/api/cdf")
def cdf(request: CdfRequest):
    try:
        config = request.queue_config()
        settings = SeriesSettings(dt=request.dt, t_max=request.t_max, n_terms=request.n_terms)
        service = config.service
        if request.method == "series":
            grid = busy_cdf_series(config, settings)
            times, values, warnings = grid.times(), grid.values, grid.warnings
        else:
            if request.method == "beta-closed" and not isinstance(service, BetaFamily):
                raise ParameterDomainError("method beta-closed needs a beta: distribution")
            warnings = []
            dt, points = resolve_grid(config, settings, warnings)
            times = [dt * j for j in range(points)]
            if request.method == "beta-closed":
                values = busy_cdf_beta(service.lam, service.rho, service.beta, times)
            else:
                values = busy_cdf_heavy_traffic(config.lam, config.rho, times)
    except BusyQError as e:
        _fail("CDF", e)
    return {
        "distribution": config.service.label,
        "method": request.method,
        "t": [float(t) for t in times],
        "B": [float(b) for b in values],
        "warnings": list(warnings),
    }


@app.post("/api/lst")
def lst(request: LstRequest):
    try:
        config = request.queue_config()
        settings = request.quadrature()
        service = config.service
        rows = []
        for s in request.s:
            row = {"s": s, "lst": lst_busy_period(config, s, settings)}
            if isinstance(service, BetaFamily):
                row["closed_form"] = lst_busy_beta(service.lam, service.rho, service.beta, s)
            rows.append(row)
    except BusyQError as e:
        _fail("Transform", e)
    return {"distribution": config.service.label, "rho": config.rho, "values": rows}


@app.post("/api/simulate")
def simulate(request: SimulateRequest):
    try:
        config = request.queue_config()
        plan = SimulationPlan(config, request.periods, seed=request.seed,
                              replications=request.replications)
        report = sample_busy_periods(plan)
    except BusyQError as e:
        _fail("Simulation", e)
    return {
        "distribution": config.service.label,
        "rho": config.rho,
        "count": report.count,
        "truncated_periods": report.truncated_periods,
        "analytic_mean": mean_busy_period(config.lam, config.rho),
        "moments": _clean(report.summary_records()),
        "warnings": list(report.warnings),
    }


# ===================== Run Server =====================

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "busyq.app:app",
        host=HOST,
        port=PORT,
        reload=False,
        log_level="info"
    )
