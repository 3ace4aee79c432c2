"""Closed-form latency, certification-time and bandwidth models.

Every quantity is a closed integer interval; see :class:`IntRange`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Union

from .crypto import ML_KEM_768, CryptoSuite, get_suite
from .messages import EXCHANGE_KINDS, MessageKind, wire_size

ORBIT_PERIOD_MS = 95 * 60_000
LEO_ONE_WAY_MS = (20, 40)
GEO_ONE_WAY_MS = (115, 135)
GS_VERIFY_MS = (50, 100)
# Signatures produced on board per exchange: one nonce signature and one
# quote per secure element.
ONBOARD_SIGNATURES = 4


def compute_threshold(t_gs: int, t_ch: int) -> int:
    """Endorsements needed for a certificate: t_GS + 2*t_ch + 1."""
    if t_gs < 0 or t_ch < 0:
        raise ValueError(f"thresholds must be non-negative, got t_gs={t_gs}, t_ch={t_ch}")
    return t_gs + 2 * t_ch + 1


def t_gs_for(t_percent: int, n: int) -> int:
    """Maximum corrupted ground stations, floor(t/100 * n), in exact integer arithmetic."""
    if t_percent < 0 or n < 0:
        raise ValueError("t_percent and n must be non-negative")
    return (t_percent * n) // 100


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty range [{self.lo}, {self.hi}]")

    def __add__(self, other: "IntRange") -> "IntRange":
        return IntRange(self.lo + other.lo, self.hi + other.hi)

    def scale(self, k: int) -> "IntRange":
        return IntRange(self.lo * k, self.hi * k)

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2

    def as_list(self) -> list[int]:
        return [self.lo, self.hi]

    @classmethod
    def of(cls, value) -> "IntRange":
        if isinstance(value, IntRange):
            return value
        if isinstance(value, int):
            return cls(value, value)
        lo, hi = value
        return cls(int(lo), int(hi))


@dataclass(frozen=True)
class LatencyBreakdown:
    propagation_ms: IntRange
    onboard_crypto_ms: IntRange
    gs_verification_ms: IntRange
    total_sequential_ms: IntRange
    total_parallel_ms: IntRange

    def total(self, parallel: bool) -> IntRange:
        return self.total_parallel_ms if parallel else self.total_sequential_ms

    def to_dict(self) -> dict:
        return {
            "propagation_ms": self.propagation_ms.as_list(),
            "onboard_crypto_ms": self.onboard_crypto_ms.as_list(),
            "gs_verification_ms": self.gs_verification_ms.as_list(),
            "total_sequential_ms": self.total_sequential_ms.as_list(),
            "total_parallel_ms": self.total_parallel_ms.as_list(),
        }


def onboard_crypto_range(suite: Union[str, CryptoSuite], parallel: bool) -> IntRange:
    """On-board signing time per exchange.

    With parallel buses each secure element signs its two messages
    independently, so the exchange waits for two signatures instead of four.
    Suites whose signing runs in software on the TEE core do not parallelize.
    """
    suite = get_suite(suite)
    per_op = IntRange.of(suite.sign_latency_ms)
    if parallel and suite.parallel_capable:
        return per_op.scale(ONBOARD_SIGNATURES // 2)
    return per_op.scale(ONBOARD_SIGNATURES)


def latency_model(
    suite: Union[str, CryptoSuite],
    parallel: bool = False,
    one_way_ms=LEO_ONE_WAY_MS,
) -> LatencyBreakdown:
    """Per-exchange latency: three link traversals, on-board signing, GS verification."""
    propagation = IntRange.of(one_way_ms).scale(3)
    gs = IntRange.of(GS_VERIFY_MS)
    seq = onboard_crypto_range(suite, False)
    par = onboard_crypto_range(suite, True)
    return LatencyBreakdown(
        propagation_ms=propagation,
        onboard_crypto_ms=par if parallel else seq,
        gs_verification_ms=gs,
        total_sequential_ms=propagation + seq + gs,
        total_parallel_ms=propagation + par + gs,
    )


@dataclass(frozen=True)
class CertTimeEstimate:
    required_endorsements: int
    contacts_per_orbit: IntRange
    orbits_to_completion: IntRange
    wall_clock_hours: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "required_endorsements": self.required_endorsements,
            "contacts_per_orbit": self.contacts_per_orbit.as_list(),
            "orbits_to_completion": self.orbits_to_completion.as_list(),
            "wall_clock_hours": list(self.wall_clock_hours),
        }


def cert_time_model(t_gs: int, t_ch: int, contacts_per_orbit, orbit_period_ms: int = ORBIT_PERIOD_MS) -> CertTimeEstimate:
    """Orbits (and hours) until the required number of distinct contacts is reached."""
    contacts = IntRange.of(contacts_per_orbit)
    if contacts.lo <= 0:
        raise ValueError("contacts_per_orbit must be positive")
    required = compute_threshold(t_gs, t_ch)
    orbits = IntRange(math.ceil(required / contacts.hi), math.ceil(required / contacts.lo))
    hours = tuple(round(o * orbit_period_ms / 3_600_000, 2) for o in (orbits.lo, orbits.hi))
    return CertTimeEstimate(required, contacts, orbits, hours)


@dataclass(frozen=True)
class BandwidthReport:
    suite: str
    per_message: dict
    exchange_total: int
    certificate: int
    kem_handshake: int

    def to_dict(self) -> dict:
        return asdict(self)


def bandwidth_model(suite: Union[str, CryptoSuite], endorsements: int = 7) -> BandwidthReport:
    suite = get_suite(suite)
    per_message = {k.value: wire_size(k, suite) for k in EXCHANGE_KINDS}
    return BandwidthReport(
        suite=suite.name,
        per_message=per_message,
        exchange_total=sum(per_message.values()),
        certificate=wire_size(MessageKind.CERT, suite, endorsements),
        kem_handshake=ML_KEM_768.public_key_bytes + ML_KEM_768.ciphertext_bytes,
    )
