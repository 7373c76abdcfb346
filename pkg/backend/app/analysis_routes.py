import logging
from typing import Any, Dict, Optional

from fastapi import APIRouter, Body, Query
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import ValidationError
from starlette.concurrency import run_in_threadpool

from .analysis import analytic_thresholds, evaluate_point, purification_summary, sweep
from .commands import execute, render, to_jsonable
from .exceptions import DecoherenceError
from .schemas import ModelKind, OutputFormat, RunConfig, ScenarioParams, SweepGrid
from .serialization import records_to_csv

logger = logging.getLogger(__name__)


router = APIRouter(prefix="/analysis", tags=["analysis"])


def _error(exc: Exception) -> JSONResponse:
    logger.error(f"Request failed: {exc}")
    return JSONResponse(status_code=400, content={"error": str(exc)})


@router.get("/thresholds")
async def thresholds(n_bar: float = Query(..., ge=0.0, description="Mean thermal photon number")):
    sys_t_sq, env_t_sq = analytic_thresholds(n_bar)
    return {"sys": sys_t_sq, "env": env_t_sq}


@router.post("/classify")
async def classify(
    payload: Dict[str, Any] = Body(..., example={"s": 1.0, "n_bar": 2.0, "t_sq": 0.5}),
    model: ModelKind = Query(ModelKind.COLLECTIVE),
    n_splitters: int = Query(100, ge=1),
):
    try:
        p = ScenarioParams.model_validate(payload)
        record = await run_in_threadpool(evaluate_point, p.n_bar, p.t_sq, p.s, model, n_splitters)
    except (ValidationError, DecoherenceError) as exc:
        return _error(exc)
    return record.as_row()


@router.post("/sweep")
async def sweep_grid(
    grid: SweepGrid,
    fmt: OutputFormat = Query(OutputFormat.JSON, description="json | csv"),
):
    try:
        records = await run_in_threadpool(sweep, grid)
    except DecoherenceError as exc:
        return _error(exc)
    if fmt == OutputFormat.CSV:
        return PlainTextResponse(records_to_csv(records))
    return [r.as_row() for r in records]


@router.post("/purify")
async def purify(
    payload: Dict[str, Any] = Body(..., example={"s": 1.0, "n_bar": 2.0, "t_sq": 0.5}),
    n_splitters: Optional[int] = Query(None, ge=1),
):
    try:
        p = ScenarioParams.model_validate(payload)
        return await run_in_threadpool(purification_summary, p, n_splitters)
    except (ValidationError, DecoherenceError) as exc:
        return _error(exc)


@router.post("/run")
async def run(config: RunConfig):
    """Executes a full CLI request; used by the command-line client in remote mode."""
    logger.info(f"Received command '{config.command.value}'")
    try:
        payload, ok = await run_in_threadpool(execute, config)
    except (ValueError, DecoherenceError) as exc:
        return _error(exc)
    return {"ok": ok, "result": to_jsonable(payload), "rendered": render(payload, config.fmt)}
