from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, List

from .schemas import CSV_HEADER, SweepRecord


def records_to_json(records: Iterable[SweepRecord]) -> str:
    return json.dumps([r.as_row() for r in records], indent=2)


def record_to_json(record: SweepRecord) -> str:
    return json.dumps(record.as_row(), indent=2)


def records_from_json(text: str) -> List[SweepRecord]:
    payload: Any = json.loads(text)
    rows = payload if isinstance(payload, list) else [payload]
    return [SweepRecord.model_validate(row) for row in rows]


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(CSV_HEADER), lineterminator="\n")
    writer.writeheader()
    for record in records:
        # str(float) is the shortest repr that round-trips exactly
        writer.writerow({k: str(v) for k, v in record.as_row().items()})
    return buffer.getvalue()


def records_from_csv(text: str) -> List[SweepRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"Unexpected CSV header: {reader.fieldnames}")
    return [SweepRecord.model_validate(row) for row in reader]


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2)
