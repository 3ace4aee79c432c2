"""Channel corruption windows with the minimum-duration and concurrency bounds."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConcurrencyBoundExceeded, WindowTooShortError


@dataclass(frozen=True)
class Interval:
    gs_id: str
    start_ms: int
    end_ms: int

    def covers(self, t: int) -> bool:
        return self.start_ms <= t < self.end_ms

    def overlaps(self, start: int, end: int) -> bool:
        return self.start_ms < end and start < self.end_ms


@dataclass
class ChannelState:
    """Per-station corruption intervals [start, end).

    Every interval lasts at least ``window_ms`` and at most ``t_ch`` channels
    are corrupted at any instant.
    """

    window_ms: int
    t_ch: int
    owner: str = "adversary"
    intervals: list[Interval] = field(default_factory=list)

    def max_concurrency(self, start: int, end: int, exclude_gs: Optional[str] = None) -> int:
        others = [iv for iv in self.intervals if iv.gs_id != exclude_gs and iv.overlaps(start, end)]
        points = {start} | {iv.start_ms for iv in others if start <= iv.start_ms < end}
        return max((len({iv.gs_id for iv in others if iv.covers(p)}) for p in points), default=0)

    def add(self, gs_id: str, start_ms: int, end_ms: int) -> Interval:
        if end_ms - start_ms < self.window_ms:
            raise WindowTooShortError(f"interval of {end_ms - start_ms} ms on {gs_id} is shorter than W={self.window_ms} ms")
        if any(iv.gs_id == gs_id and iv.overlaps(start_ms, end_ms) for iv in self.intervals):
            raise ValueError(f"{gs_id} is already corrupted during [{start_ms}, {end_ms})")
        if self.max_concurrency(start_ms, end_ms, exclude_gs=gs_id) + 1 > self.t_ch:
            raise ConcurrencyBoundExceeded(f"corrupting {gs_id} at {start_ms} would exceed t_ch={self.t_ch}")
        iv = Interval(gs_id, int(start_ms), int(end_ms))
        self.intervals.append(iv)
        self.intervals.sort(key=lambda i: (i.start_ms, i.gs_id))
        return iv

    def is_corrupted(self, gs_id: str, t: int) -> bool:
        return any(iv.gs_id == gs_id and iv.covers(t) for iv in self.intervals)

    def corrupted_at(self, t: int) -> list[str]:
        return sorted({iv.gs_id for iv in self.intervals if iv.covers(t)})


def corrupt_channel(state: ChannelState, gs_id: str, start_ms: int, duration_ms: Optional[int] = None) -> ChannelState:
    """Grant the adversary the channel to ``gs_id`` from ``start_ms`` (default length W)."""
    state.add(gs_id, start_ms, start_ms + (state.window_ms if duration_ms is None else duration_ms))
    return state


def validate_intervals(intervals, window_ms: int, t_ch: int) -> None:
    """Post-validator: raises if any interval is short or concurrency ever exceeds t_ch."""
    probe = ChannelState(window_ms, t_ch)
    for iv in sorted(intervals, key=lambda i: (i.start_ms, i.gs_id)):
        probe.add(iv.gs_id, iv.start_ms, iv.end_ms)


def random_hop_schedule(
    gs_ids: list[str], window_ms: int, t_ch: int, horizon_ms: int, rng: random.Random
) -> ChannelState:
    """t_ch adversarial slots, each hopping between channels with intervals of W..3W."""
    state = ChannelState(window_ms, t_ch)
    cursors = [rng.randrange(0, window_ms) for _ in range(t_ch)]
    while cursors and min(cursors) < horizon_ms:
        slot = min(range(t_ch), key=lambda i: (cursors[i], i))
        start = cursors[slot]
        end = start + rng.randint(window_ms, 3 * window_ms)
        free = [g for g in gs_ids if not any(iv.gs_id == g and iv.overlaps(start, end) for iv in state.intervals)]
        if free and state.max_concurrency(start, end) < t_ch:
            state.add(rng.choice(free), start, end)
            # Back-to-back hops half the time: the most aggressive legal schedule.
            cursors[slot] = end if rng.random() < 0.5 else end + rng.randint(1, window_ms // 2)
        else:
            cursors[slot] = start + rng.randint(1, window_ms)
    return state
