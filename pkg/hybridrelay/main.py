"""FastAPI app for the hybrid relay outage toolkit.

Endpoints:
- GET /health
- POST /point: closed-form outage breakdown for one configuration
- POST /mc: analytic values next to a seeded Monte Carlo estimate
- POST /sweep: outage table over a parameter grid
- POST /conditional: conditional HD hop outages, closed form and quadrature
- POST /validate: run the invariant gates
"""

from __future__ import annotations

import asyncio
import logging

from fastapi import FastAPI, HTTPException

from . import analytic, experiments
from .graph import run_validation
from .models import (
    ConditionalResponse,
    ConditionalTerm,
    EventTag,
    Hop,
    McRequest,
    McResponse,
    PointResponse,
    SweepResponse,
    SweepSpec,
    SystemConfig,
    ValidateRequest,
    ValidationReport,
)
from .oracle import QuadratureError, mc_estimate_async, quad_conditional

app = FastAPI(title="Hybrid Relay Outage", version="0.1.0")
logger = logging.getLogger(__name__)


@app.get("/health")
def health() -> dict:
    """Simple health check endpoint."""
    return {"status": "ok"}


def _point(config: SystemConfig) -> PointResponse:
    return PointResponse(
        breakdown=analytic.system_outage(config),
        p_traditional=experiments.traditional_outage(config),
    )


@app.post("/point", response_model=PointResponse)
async def point(config: SystemConfig) -> PointResponse:
    return await asyncio.to_thread(_point, config)


@app.post("/mc", response_model=McResponse)
async def monte_carlo(req: McRequest) -> McResponse:
    closed, estimate = await asyncio.gather(
        asyncio.to_thread(_point, req.config),
        mc_estimate_async(req.config, req.n, req.seed),
    )
    return McResponse(
        analytic=closed.breakdown,
        p_traditional=closed.p_traditional,
        estimate=estimate,
    )


@app.post("/sweep", response_model=SweepResponse)
async def sweep(spec: SweepSpec) -> SweepResponse:
    rows = await experiments.run_sweep_async(spec)
    logger.info("[sweep] %s rows, %s failed", len(rows), sum(r.status != "ok" for r in rows))
    return SweepResponse(rows=experiments.table_rows(rows))


def _conditionals(config: SystemConfig) -> ConditionalResponse:
    terms = []
    for tag in EventTag:
        for hop in Hop:
            closed, _ = analytic.conditional_hop_outage(tag, hop, config)
            terms.append(
                ConditionalTerm(
                    tag=tag,
                    hop=hop,
                    closed_form=closed,
                    quadrature=quad_conditional(tag, hop, config),
                )
            )
    return ConditionalResponse(terms=terms)


@app.post("/conditional", response_model=ConditionalResponse)
async def conditional(config: SystemConfig) -> ConditionalResponse:
    """Six conditional HD hop outages, closed form next to quadrature."""
    try:
        return await asyncio.to_thread(_conditionals, config)
    except QuadratureError as exc:
        logger.warning("[conditional] quadrature failed: %s", exc)
        raise HTTPException(status_code=502, detail=str(exc))


@app.post("/validate", response_model=ValidationReport)
async def validate(req: ValidateRequest) -> ValidationReport:
    report = await asyncio.to_thread(run_validation, req.grid_size, req.mc_samples, req.seed)
    if not report.passed:
        logger.warning(
            "[validate] failed gates: %s", [g.name for g in report.gates if not g.passed]
        )
    return report
