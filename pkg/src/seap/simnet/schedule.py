"""Contact schedules: which ground station can talk to the satellite, and when."""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConfigError
from ..perf import GEO_ONE_WAY_MS, LEO_ONE_WAY_MS, ORBIT_PERIOD_MS


@dataclass(frozen=True)
class Pass:
    gs_id: str
    start_ms: int
    duration_ms: int

    @property
    def end_ms(self) -> int:
        return self.start_ms + self.duration_ms

    def covers(self, t: int) -> bool:
        return self.start_ms <= t < self.end_ms


@dataclass(frozen=True)
class ScheduleConfig:
    template: str = "leo"
    orbit_period_ms: int = ORBIT_PERIOD_MS
    contacts_per_orbit: tuple[int, int] = (1, 2)
    pass_duration_ms: int = 8 * 60_000
    pass_gap_ms: int = 2 * 60_000
    propagation_ms: Optional[tuple[int, int]] = None
    passes: tuple[tuple[str, int, int], ...] = ()

    def one_way_ms(self) -> tuple[int, int]:
        if self.propagation_ms is not None:
            return tuple(self.propagation_ms)
        return GEO_ONE_WAY_MS if self.template == "geo" else LEO_ONE_WAY_MS

    def validate(self) -> None:
        if self.template not in ("leo", "geo", "explicit"):
            raise ConfigError(f"unknown schedule template {self.template!r}")
        lo, hi = self.contacts_per_orbit
        if not 0 < lo <= hi:
            raise ConfigError("contacts_per_orbit must be a positive range")
        if self.orbit_period_ms <= 0 or self.pass_duration_ms <= 0 or self.pass_gap_ms < 0:
            raise ConfigError("schedule durations must be positive")
        if hi * (self.pass_duration_ms + self.pass_gap_ms) > self.orbit_period_ms:
            raise ConfigError("contact slots do not fit in one orbit")
        p_lo, p_hi = self.one_way_ms()
        if not 0 <= p_lo <= p_hi:
            raise ConfigError("propagation_ms must be a non-negative range")
        for gs_id, start, duration in self.passes:
            if start < 0 or duration <= 0:
                raise ConfigError(f"bad explicit pass for {gs_id}")


@dataclass
class ContactSchedule:
    orbit_period_ms: int
    passes: list[Pass] = field(default_factory=list)

    def __post_init__(self):
        self.passes.sort(key=lambda p: (p.start_ms, p.gs_id))
        self._by_gs: dict[str, list[Pass]] = {}
        for p in self.passes:
            self._by_gs.setdefault(p.gs_id, []).append(p)

    def passes_for(self, gs_id: str) -> list[Pass]:
        return self._by_gs.get(gs_id, [])

    def pass_at(self, gs_id: str, t: int) -> Optional[Pass]:
        ps = self._by_gs.get(gs_id, [])
        i = bisect.bisect_right([p.start_ms for p in ps], t) - 1
        if i >= 0 and ps[i].covers(t):
            return ps[i]
        return None

    def in_contact(self, gs_id: str, t: int) -> bool:
        return self.pass_at(gs_id, t) is not None


def slot_offsets(cfg: ScheduleConfig) -> list[int]:
    """Contact slots sit at the end of each orbit, one pass plus gap apart."""
    hi = cfg.contacts_per_orbit[1]
    step = cfg.pass_duration_ms + cfg.pass_gap_ms
    return [cfg.orbit_period_ms - (hi - i) * step for i in range(hi)]


def leo_schedule(cfg: ScheduleConfig, gs_ids: list[str], horizon_ms: int, rng: random.Random) -> ContactSchedule:
    """1..k contacts per orbit, visiting stations round-robin over a seeded permutation."""
    order = list(gs_ids)
    rng.shuffle(order)
    offsets = slot_offsets(cfg)
    lo, hi = cfg.contacts_per_orbit
    passes, visit, orbit = [], 0, 0
    while orbit * cfg.orbit_period_ms < horizon_ms:
        for offset in offsets[: rng.randint(lo, hi)]:
            start = orbit * cfg.orbit_period_ms + offset
            passes.append(Pass(order[visit % len(order)], start, cfg.pass_duration_ms))
            visit += 1
        orbit += 1
    return ContactSchedule(cfg.orbit_period_ms, passes)


def geo_schedule(cfg: ScheduleConfig, gs_ids: list[str], horizon_ms: int) -> ContactSchedule:
    """Every station permanently visible."""
    return ContactSchedule(cfg.orbit_period_ms, [Pass(g, 0, horizon_ms + 1) for g in gs_ids])


def explicit_schedule(cfg: ScheduleConfig, gs_ids: list[str]) -> ContactSchedule:
    unknown = {p[0] for p in cfg.passes} - set(gs_ids)
    if unknown:
        raise ConfigError(f"passes name unknown stations {sorted(unknown)}")
    return ContactSchedule(cfg.orbit_period_ms, [Pass(g, int(s), int(d)) for g, s, d in cfg.passes])


def build_schedule(cfg: ScheduleConfig, gs_ids: list[str], horizon_ms: int, rng: random.Random) -> ContactSchedule:
    if cfg.template == "leo":
        return leo_schedule(cfg, gs_ids, horizon_ms, rng)
    if cfg.template == "geo":
        return geo_schedule(cfg, gs_ids, horizon_ms)
    return explicit_schedule(cfg, gs_ids)
