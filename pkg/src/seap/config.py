"""Scenario configuration: dataclasses plus YAML loading and validation."""

from __future__ import annotations

import dataclasses
import typing
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .crypto import SUITES
from .errors import ConfigError
from .perf import compute_threshold, t_gs_for
from .simnet.adversary import AdversaryConfig
from .simnet.schedule import ScheduleConfig

KINDS = ("protocol", "posterior-corruption", "genesis-clone")
OUTCOMES = ("certified", "timeout", "attack-succeeded", "attack-failed")
HOUR_MS = 3_600_000


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    kind: str = "protocol"
    n_gs: int = 10
    t_percent: int = 20
    t_ch: int = 2
    window_ms: int = 12 * HOUR_MS
    suite: str = "ecc-p256-class"
    parallel_se: bool = False
    seed: int = 0
    deadline_ms: int = 24 * HOUR_MS
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    threshold_override: Optional[int] = None
    degraded_mode_allowed: bool = False
    failed_elements: tuple[str, ...] = ()
    clock_skew_ms: int = 0
    nonce_bits: int = 128
    # Member counts of the committees that follow the genesis committee.
    epochs: tuple[int, ...] = ()
    key_rotation: bool = True
    expected_outcome: Optional[str] = None
    expected_hours: Optional[tuple[float, float]] = None

    @property
    def t_gs(self) -> int:
        return t_gs_for(self.t_percent, self.n_gs)

    @property
    def threshold(self) -> int:
        if self.threshold_override is not None:
            return self.threshold_override
        return compute_threshold(self.t_gs, self.t_ch)

    def expected(self) -> str:
        if self.expected_outcome is not None:
            return self.expected_outcome
        if self.kind != "protocol":
            return "attack-failed"
        return {"passive": "certified", "block-all": "timeout"}.get(self.adversary.strategy, "attack-failed")

    def validate(self) -> "ScenarioConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.n_gs < 1:
            raise ConfigError("n_gs must be at least 1")
        if not 0 <= self.t_percent <= 100:
            raise ConfigError("t_percent must lie in [0, 100]")
        if self.t_ch < 0:
            raise ConfigError("t_ch must be non-negative")
        if self.window_ms <= 0 or self.deadline_ms <= 0:
            raise ConfigError("window_ms and deadline_ms must be positive")
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; expected one of {sorted(SUITES)}")
        if self.threshold_override is not None and self.threshold_override < 1:
            raise ConfigError("threshold_override must be positive")
        if self.nonce_bits <= 0 or self.nonce_bits % 8:
            raise ConfigError("nonce_bits must be a positive multiple of 8")
        if self.clock_skew_ms < 0:
            raise ConfigError("clock_skew_ms must be non-negative")
        for e in self.failed_elements:
            if e not in ("closed-anchor", "open-anchor"):
                raise ConfigError(f"unknown secure element {e!r}")
        if len(set(self.failed_elements)) == 2:
            raise ConfigError("at least one secure element must work")
        if any(n < 1 for n in self.epochs):
            raise ConfigError("epoch member counts must be positive")
        if self.expected_outcome is not None and self.expected_outcome not in OUTCOMES:
            raise ConfigError(f"unknown expected_outcome {self.expected_outcome!r}")
        self.schedule.validate()
        self.adversary.validate(self.n_gs, self.t_gs, self.t_ch)
        if self.threshold > self.n_gs:
            warnings.warn(
                f"{self.name}: threshold {self.threshold} exceeds n={self.n_gs}; an honest run cannot certify",
                stacklevel=2,
            )
        return self


def _coerce(value: Any, hint: Any, where: str) -> Any:
    origin = typing.get_origin(hint)
    if value is None:
        return None
    if dataclasses.is_dataclass(hint):
        return _build(hint, value, where)
    if origin is typing.Union:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        return _coerce(value, args[0], where)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        args = typing.get_args(hint)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(v, args[0], f"{where}[{i}]") for i, v in enumerate(value))
        if len(args) != len(value):
            raise ConfigError(f"{where}: expected {len(args)} items")
        return tuple(_coerce(v, a, f"{where}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string")
        return value
    return value


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return cls(**{k: _coerce(v, hints[k], f"{where}.{k}") for k, v in data.items()})


def config_from_dict(data: dict, **overrides: Any) -> ScenarioConfig:
    cfg = _build(ScenarioConfig, data, "config")
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


def load_config(path, **overrides: Any) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return config_from_dict(data or {}, **overrides)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    def plain(v):
        if isinstance(v, tuple):
            return [plain(x) for x in v]
        if isinstance(v, dict):
            return {k: plain(x) for k, x in v.items()}
        return v

    return plain(dataclasses.asdict(cfg))
