"""Regression matrix over the named attack scenarios."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .simnet.runner import run_batch
from .simnet.scenarios import GALLERY_NAMES, gallery_config


@dataclass(frozen=True)
class GalleryRow:
    scenario: str
    seed: int
    expected: str
    outcome: str
    passed: bool
    trace_digest: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def run_gallery(
    names: Optional[Sequence[str]] = None, seeds: Iterable[int] = (None,), workers: int = 1
) -> list[GalleryRow]:
    """Run every (scenario, seed) pair; ``None`` keeps a scenario's own seed."""
    names = list(names or GALLERY_NAMES)
    cfgs = [gallery_config(name, seed) for seed in seeds for name in names]
    results = run_batch(cfgs, workers)
    return [
        GalleryRow(c.name, c.seed, r.expected, r.outcome.kind, r.as_expected, r.trace.digest())
        for c, r in zip(cfgs, results)
    ]


def format_matrix(rows: Sequence[GalleryRow]) -> str:
    width = max([len(r.scenario) for r in rows] + [8])
    lines = [f"{'scenario':<{width}}  {'seed':>6}  {'expected':<16}  {'outcome':<16}  result"]
    for r in rows:
        lines.append(f"{r.scenario:<{width}}  {r.seed:>6}  {r.expected:<16}  {r.outcome:<16}  {'PASS' if r.passed else 'FAIL'}")
    passed = sum(r.passed for r in rows)
    lines.append(f"{passed}/{len(rows)} scenarios as expected")
    return "\n".join(lines)
