"""Adversary configuration and runtime bookkeeping."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from ..errors import AssumptionGuardError, ConfigError
from .channel import ChannelState

STRATEGIES = ("passive", "channel-hop", "mitm-clone", "relay", "block-all")
# Strategies that divert traffic on corrupted channels to an Earth-based clone.
INTERCEPTING = ("channel-hop", "mitm-clone")
USES_EARTH_TEE = ("channel-hop", "mitm-clone", "relay")


@dataclass(frozen=True)
class AdversaryConfig:
    strategy: str = "passive"
    # (gs_id, at_ms) pairs; corruption is permanent from at_ms on.
    corrupted_gs: tuple[tuple[str, int], ...] = ()
    # Pick this many stations at random times instead of listing them.
    random_corruptions: int = 0
    # (gs_id, start_ms, end_ms) corruption intervals on satellite links.
    channel_intervals: tuple[tuple[str, int, int], ...] = ()
    random_channels: bool = False
    # Corrupt every channel for the whole run; violates the t_ch bound.
    all_channels: bool = False
    allow_tch_violation: bool = False
    identity_checks: bool = True
    # What happens to genuine satellite traffic on a corrupted channel.
    forward_policy: str = "drop"
    # Corrupted stations either stop talking to the satellite or keep behaving honestly.
    corrupted_behavior: str = "silent"
    relay_latency_ms: int = 0

    def validate(self, n_gs: int, t_gs: int, t_ch: int) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown adversary strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.forward_policy not in ("drop", "forward", "random"):
            raise ConfigError(f"unknown forward_policy {self.forward_policy!r}")
        if self.corrupted_behavior not in ("silent", "honest"):
            raise ConfigError(f"unknown corrupted_behavior {self.corrupted_behavior!r}")
        if self.relay_latency_ms < 0:
            raise ConfigError("relay_latency_ms must be non-negative")
        count = len({g for g, _ in self.corrupted_gs}) + self.random_corruptions
        if count > t_gs:
            raise ConfigError(f"{count} corrupted stations exceed t_GS={t_gs}")
        if self.all_channels and n_gs > t_ch and not self.allow_tch_violation:
            raise AssumptionGuardError(
                f"corrupting all {n_gs} channels exceeds t_ch={t_ch}; set allow_tch_violation to run it"
            )
        if self.strategy in INTERCEPTING and not (self.channel_intervals or self.random_channels or self.all_channels):
            raise ConfigError(f"{self.strategy} needs channel_intervals, random_channels or all_channels")


@dataclass
class Adversary:
    config: AdversaryConfig
    channels: ChannelState
    rng: random.Random
    corrupted: dict[str, int] = field(default_factory=dict)
    earth_tee: Optional[object] = None

    @property
    def strategy(self) -> str:
        return self.config.strategy

    @property
    def intercepts(self) -> bool:
        return self.strategy in INTERCEPTING

    def is_corrupted(self, gs_id: str) -> bool:
        return gs_id in self.corrupted

    def owns_channel(self, gs_id: str, t: int) -> bool:
        return self.intercepts and self.channels.is_corrupted(gs_id, t)

    def forwards(self) -> bool:
        policy = self.config.forward_policy
        if policy == "random":
            return self.rng.random() < 0.5
        return policy == "forward"
