"""Scenario dispatch and seed batches."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

from ..config import ScenarioConfig
from .attacks import genesis_clone, posterior_corruption
from .world import ScenarioResult, run_protocol


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Run one scenario to completion; returns trace, metrics and outcome."""
    config.validate()
    if config.kind == "posterior-corruption":
        return posterior_corruption(config)
    if config.kind == "genesis-clone":
        return genesis_clone(config)
    return run_protocol(config)


def run_batch(configs: Iterable[ScenarioConfig], workers: int = 1) -> list[ScenarioResult]:
    """Run independent scenarios, optionally on worker threads; order is preserved."""
    configs = list(configs)
    if workers <= 1:
        return [run_scenario(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_scenario, configs))
