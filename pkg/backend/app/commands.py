from __future__ import annotations

import csv
import io
import logging
from typing import Any, Dict, List, Tuple

import numpy as np

from .analysis import (
    analytic_thresholds,
    evaluate_point,
    model_deviations,
    purification_summary,
    sweep,
    trajectory,
)
from .schemas import Command, ModelKind, OutputFormat, RunConfig, ScenarioParams, SweepRecord
from .serialization import dumps, record_to_json, records_to_csv, records_to_json

logger = logging.getLogger(__name__)

CROSSCHECK_TOL = 1e-8


def _crosscheck(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    points = [config.scenario()]
    rng = np.random.default_rng(config.seed)
    for _ in range(config.samples):
        points.append(ScenarioParams(
            s=float(rng.uniform(0.1, 2.0)),
            n_bar=float(rng.uniform(0.0, 5.0)),
            t_sq=float(rng.uniform(0.01, 1.0)),
        ))
    worst: Dict[str, float] = {}
    for p in points:
        for name, value in model_deviations(p, config.n_splitters, config.steps).items():
            worst[name] = max(worst.get(name, 0.0), value)
    max_deviation = max(worst.values())
    ok = max_deviation <= CROSSCHECK_TOL
    return {"points": len(points), "deviations": worst, "max_deviation": max_deviation, "ok": ok}, ok


def execute(config: RunConfig) -> Tuple[Any, bool]:
    """Runs one command; returns (payload, ok). ``ok`` is False only for a failed cross-check."""
    logger.info(f"Running '{config.command.value}'")

    if config.command == Command.CLASSIFY:
        record = evaluate_point(config.n_bar, config.t_sq, config.s, config.model, config.n_splitters)
        return record, True

    if config.command == Command.SWEEP:
        return sweep(config.grid()), True

    if config.command == Command.THRESHOLDS:
        sys_t_sq, env_t_sq = analytic_thresholds(config.n_bar)
        return {"sys": sys_t_sq, "env": env_t_sq}, True

    if config.command == Command.CROSSCHECK:
        return _crosscheck(config)

    if config.command == Command.PURIFY:
        chain = config.n_splitters if config.model == ModelKind.CHAIN else None
        return purification_summary(config.scenario(), chain), True

    if config.command == Command.TRAJECTORY:
        return trajectory(config.scenario(), config.steps, config.samples), True

    raise ValueError(f"Unsupported command: {config.command}")


def _rows_to_csv(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def _flatten(payload: Dict[str, Any]) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in payload.items():
        if isinstance(value, dict):
            flat.update({f"{key}.{k}": v for k, v in value.items()})
        else:
            flat[key] = value
    return flat


def render(payload: Any, fmt: OutputFormat) -> str:
    if isinstance(payload, SweepRecord):
        return records_to_csv([payload]) if fmt == OutputFormat.CSV else record_to_json(payload)
    if isinstance(payload, list) and payload and isinstance(payload[0], SweepRecord):
        return records_to_csv(payload) if fmt == OutputFormat.CSV else records_to_json(payload)
    if fmt == OutputFormat.JSON:
        return dumps(payload)
    rows = payload if isinstance(payload, list) else [_flatten(payload)]
    return _rows_to_csv(rows) if rows else ""


def to_jsonable(payload: Any) -> Any:
    if isinstance(payload, SweepRecord):
        return payload.as_row()
    if isinstance(payload, list):
        return [to_jsonable(item) for item in payload]
    return payload
