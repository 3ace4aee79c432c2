"""Machine-readable run reports and their published JSON schema."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from statistics import mean
from typing import Any

from .config import config_to_dict
from .simnet.world import SAT, ScenarioResult

SCHEMA_VERSION = "1.0"


@lru_cache(maxsize=1)
def report_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text(encoding="utf-8"))


def _stats(values: list[int]) -> dict[str, Any]:
    if not values:
        return {"count": 0, "min": None, "max": None, "mean": None}
    return {"count": len(values), "min": min(values), "max": max(values), "mean": round(mean(values), 3)}


def build_report(result: ScenarioResult) -> dict[str, Any]:
    cfg, m = result.config, result.metrics
    completed = [x for x in m.exchanges if x.end_ms is not None]
    by_target: dict[str, list[int]] = {}
    for x in completed:
        by_target.setdefault(x.target, []).append(x.bytes)
    satellite = m.completed(SAT)
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.name,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "outcome": result.outcome.kind,
        "outcome_time_ms": result.outcome.time_ms,
        "expected_outcome": result.expected,
        "as_expected": result.as_expected,
        "threshold": cfg.threshold,
        "time_to_cert_ms": m.time_to_cert_ms,
        "hours_to_cert": None if m.hours_to_cert is None else round(m.hours_to_cert, 4),
        "orbits_to_cert": m.orbits_to_cert,
        "earth_cert_ms": m.earth_cert_ms,
        "endorsement_timeline": [p.to_dict() for p in sorted(m.endorsements, key=lambda p: (p.ts, p.gs_id, p.target))],
        "cert_signers": [p.gs_id for p in m.cert_signers],
        "bytes_per_exchange": {
            "all": _stats([x.bytes for x in completed]),
            "by_target": {k: _stats(v) for k, v in sorted(by_target.items())},
        },
        "exchange_latency_ms": _stats([x.duration_ms for x in satellite]),
        "drop_reasons": dict(sorted(m.drops.items())),
        "max_corrupted_channel_yield": m.max_corrupted_channel_yield,
        "trace_events": len(result.trace),
        "trace_digest": result.trace.digest(),
        "extra": result.extra,
        "config": config_to_dict(cfg),
    }


def validate_report(report: dict) -> None:
    """Raise jsonschema.ValidationError if the report does not match the schema."""
    import jsonschema

    jsonschema.validate(report, report_schema())
