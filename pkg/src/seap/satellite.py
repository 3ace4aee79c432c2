"""Satellite TEE state machine: genesis, hello handling, quorum detection, EAT issuance."""

from __future__ import annotations

import bisect
import hashlib
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .crypto import (
    ATTESTATION_SLOT,
    IDENTITY_SLOT,
    CryptoSuite,
    KeyRegistry,
    SecureElement,
    SlotKey,
    attested_slot_report,
    fingerprint,
    safe_verify,
    se_genesis,
)
from .errors import BothElementsFailedError, NotCertifiedError, SeapError
from .messages import (
    CertificateOfAuthorization,
    EatToken,
    EndorsementRecord,
    GenesisEvidence,
    HelloAckMsg,
    HelloMsg,
    KeyVerifyMsg,
    TeeQuote,
    cert_body,
    eat_body,
    hello_payload,
    identity_bundle,
    key_verify_payload,
    measurement_claims,
    nonce_payload,
    quote_body,
)
from .perf import compute_threshold, t_gs_for

DEFAULT_TA_BINARY = b"seap-trusted-application/v1"


@dataclass(frozen=True)
class ProtocolParams:
    t_gs: int
    t_ch: int
    window_ms: int
    # Fraction used to recompute t_gs when the committee changes size.
    t_percent: Optional[int] = None
    # Replaces t_GS + 2*t_ch + 1; only for demonstrating weaker thresholds.
    threshold_override: Optional[int] = None

    def __post_init__(self):
        if self.window_ms <= 0:
            raise ValueError("window_ms must be positive")
        compute_threshold(self.t_gs, self.t_ch)

    @property
    def threshold(self) -> int:
        if self.threshold_override is not None:
            return self.threshold_override
        return compute_threshold(self.t_gs, self.t_ch)

    def for_committee(self, n: int) -> "ProtocolParams":
        if self.t_percent is None:
            return self
        return ProtocolParams(t_gs_for(self.t_percent, n), self.t_ch, self.window_ms, self.t_percent, self.threshold_override)


class Phase(str, Enum):
    PRE_GENESIS = "pre-genesis"
    COLLECTING = "collecting"
    CERTIFIED = "certified"


def compute_measurement(ta_binary: bytes, trust_store: KeyRegistry) -> bytes:
    return hashlib.sha256(ta_binary + trust_store.canonical_bytes()).digest()


def _record_key(r: EndorsementRecord):
    return (r.ts, r.gs_id, r.signature)


def find_quorum(records: Sequence[EndorsementRecord], k: int, window_ms: int) -> Optional[tuple[EndorsementRecord, ...]]:
    """Earliest set of ``k`` records from distinct ground stations spanning less than ``window_ms``.

    Records must be sorted by (ts, gs_id, signature). For each start index
    in order, the records within the window are scanned and the first record
    of each new ground station is kept; the first start that reaches ``k``
    distinct stations wins. This yields the qualifying subset with the
    smallest first timestamp and, for it, the smallest last timestamp.
    """
    if k <= 0:
        return ()
    n = len(records)
    for i in range(n):
        limit = records[i].ts + window_ms
        chosen: list[EndorsementRecord] = []
        seen: set[str] = set()
        for j in range(i, n):
            r = records[j]
            if r.ts >= limit:
                break
            if r.gs_id not in seen:
                seen.add(r.gs_id)
                chosen.append(r)
                if len(chosen) == k:
                    return tuple(chosen)
        if n - i < k:
            break
    return None


@dataclass
class SatelliteState:
    sat_id: str
    se_nxp: SecureElement
    se_trop: SecureElement
    suite: CryptoSuite
    trust_store: KeyRegistry
    params: ProtocolParams
    ta_binary: bytes = DEFAULT_TA_BINARY
    log: list[EndorsementRecord] = field(default_factory=list)
    cert: Optional[CertificateOfAuthorization] = None
    phase: Phase = Phase.PRE_GENESIS
    heartbeat_counter: int = 0
    identity_keys: tuple[Optional[SlotKey], Optional[SlotKey]] = (None, None)
    attestation_keys: tuple[Optional[SlotKey], Optional[SlotKey]] = (None, None)
    degraded: bool = False
    drops: list[tuple[str, str]] = field(default_factory=list)
    measurement_hash: bytes = b""
    _log_keys: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        self.measurement_hash = compute_measurement(self.ta_binary, self.trust_store)

    @property
    def elements(self) -> tuple[SecureElement, SecureElement]:
        return (self.se_nxp, self.se_trop)

    @property
    def live_elements(self) -> list[tuple[int, SecureElement]]:
        return [(i, se) for i, se in enumerate(self.elements) if not se.failed and not se.is_empty()]

    @property
    def vk_s(self) -> bytes:
        vk = [k.public_key if k is not None else None for k in self.identity_keys]
        return identity_bundle(vk[0], vk[1])

    @property
    def serials(self) -> tuple[str, str]:
        return (self.se_nxp.serial, self.se_trop.serial)

    def set_trust_store(self, registry: KeyRegistry) -> None:
        self.trust_store = registry
        self.measurement_hash = compute_measurement(self.ta_binary, registry)

    def _drop(self, reason: str, detail: str = "") -> None:
        self.drops.append((reason, detail))


def on_boot(state: SatelliteState, rng: random.Random) -> SatelliteState:
    """On-orbit key genesis on every working secure element."""
    if state.phase is not Phase.PRE_GENESIS:
        raise SeapError(f"{state.sat_id} already booted")
    identity: list[Optional[SlotKey]] = [None, None]
    attestation: list[Optional[SlotKey]] = [None, None]
    for i, se in enumerate(state.elements):
        if se.failed:
            continue
        identity[i], attestation[i] = se_genesis(se, state.suite, rng)
    if identity == [None, None]:
        raise BothElementsFailedError(state.sat_id)
    state.identity_keys = tuple(identity)
    state.attestation_keys = tuple(attestation)
    state.degraded = None in identity
    state.phase = Phase.COLLECTING
    return state


def make_quote(state: SatelliteState, index: int, nonce: bytes) -> TeeQuote:
    se = state.elements[index]
    digest = fingerprint(state.identity_keys[index].public_key)
    claims = measurement_claims(state.measurement_hash)
    body = quote_body(digest, se.serial, nonce, state.measurement_hash, claims)
    return TeeQuote(digest, se.serial, nonce, state.measurement_hash, claims, se.sign(ATTESTATION_SLOT, body))


def handle_hello(state: SatelliteState, msg: HelloMsg, now: int) -> Optional[HelloAckMsg]:
    if state.phase is Phase.PRE_GENESIS:
        state._drop("pre-genesis", msg.gs_id)
        return None
    key = state.trust_store.get(msg.gs_id)
    if key is None:
        state._drop("unknown-sender", msg.gs_id)
        return None
    if not safe_verify(key, hello_payload(msg.nonce), msg.signature):
        state._drop("bad-signature", msg.gs_id)
        return None
    vks: list[Optional[bytes]] = [None, None]
    quotes: list[Optional[TeeQuote]] = [None, None]
    sigs: list[Optional[bytes]] = [None, None]
    for i, se in state.live_elements:
        vks[i] = state.identity_keys[i].public_key
        quotes[i] = make_quote(state, i, msg.nonce)
        sigs[i] = se.sign(IDENTITY_SLOT, nonce_payload(msg.nonce))
    if vks == [None, None]:
        state._drop("no-anchor", msg.gs_id)
        return None
    return HelloAckMsg(msg.nonce, vks[0], vks[1], quotes[0], quotes[1], sigs[0], sigs[1])


def _sign_identity(state: SatelliteState, body: bytes) -> bytes:
    # The outer signature uses the closed-anchor identity key, falling back to
    # the open anchor when the first element is unavailable.
    for i, se in enumerate(state.elements):
        if state.identity_keys[i] is not None and not se.failed:
            return se.sign(IDENTITY_SLOT, body)
    raise BothElementsFailedError(state.sat_id)


def handle_key_verify(
    state: SatelliteState, msg: KeyVerifyMsg, sender: str
) -> Optional[CertificateOfAuthorization]:
    """Store a valid endorsement and assemble the certificate once a quorum exists."""
    if state.phase is Phase.CERTIFIED:
        state._drop("already-certified", sender)
        return None
    if state.phase is Phase.PRE_GENESIS:
        state._drop("pre-genesis", sender)
        return None
    if sender != msg.gs_id:
        state._drop("sender-mismatch", sender)
        return None
    key = state.trust_store.get(sender)
    if key is None:
        state._drop("unknown-sender", sender)
        return None
    if not safe_verify(key, key_verify_payload(state.vk_s, msg.timestamp), msg.signature):
        state._drop("bad-signature", sender)
        return None
    if (sender, msg.timestamp) in state._log_keys:
        state._drop("duplicate", sender)
        return None
    record = EndorsementRecord(msg.timestamp, sender, msg.signature)
    state._log_keys.add((sender, msg.timestamp))
    bisect.insort(state.log, record, key=_record_key)
    chosen = find_quorum(state.log, state.params.threshold, state.params.window_ms)
    if chosen is None:
        return None
    return assemble_certificate(state, chosen)


def assemble_certificate(state: SatelliteState, chosen: Sequence[EndorsementRecord]) -> CertificateOfAuthorization:
    quotes = [None, None]
    # Quotes inside the certificate are bound to the satellite key itself
    # rather than to a ground-station nonce.
    for i, _ in state.live_elements:
        quotes[i] = make_quote(state, i, fingerprint(state.vk_s))
    body = cert_body(state.vk_s, tuple(chosen), quotes[0], quotes[1])
    cert = CertificateOfAuthorization(state.vk_s, tuple(chosen), quotes[0], quotes[1], _sign_identity(state, body))
    state.cert = cert
    state.phase = Phase.CERTIFIED
    return cert


def broadcast_cert(state: SatelliteState) -> list[tuple[str, CertificateOfAuthorization]]:
    if state.cert is None:
        raise NotCertifiedError(state.sat_id)
    return [(gs_id, state.cert) for gs_id in state.trust_store.parties()]


def issue_eat(state: SatelliteState, nonce: bytes, now: int) -> EatToken:
    """Attestation token over the current measurement, co-signed by every live element."""
    if state.phase is Phase.PRE_GENESIS:
        raise SeapError(f"{state.sat_id} has not completed genesis")
    live = dict(state.live_elements)
    if not live:
        raise BothElementsFailedError(state.sat_id)
    state.heartbeat_counter += 1
    body = eat_body(nonce, state.measurement_hash, state.serials, state.heartbeat_counter, now)
    sigs = [se.sign(ATTESTATION_SLOT, body) if i in live else None for i, se in enumerate(state.elements)]
    for se in live.values():
        se.increment_counter()
    return EatToken(nonce, state.measurement_hash, state.serials, state.heartbeat_counter, now, sigs[0], sigs[1])


def genesis_evidence(state: SatelliteState, nonce: bytes, now: int) -> GenesisEvidence:
    """Genesis EAT plus slot attribute reports, sent on the first pass."""
    token = issue_eat(state, nonce, now)
    reports = tuple(
        attested_slot_report(se, slot) for _, se in state.live_elements for slot in (IDENTITY_SLOT, ATTESTATION_SLOT)
    )
    return GenesisEvidence(token, reports)


def new_satellite(
    sat_id: str,
    suite: CryptoSuite,
    trust_store: KeyRegistry,
    params: ProtocolParams,
    serials: tuple[str, str],
    ta_binary: bytes = DEFAULT_TA_BINARY,
) -> SatelliteState:
    return SatelliteState(
        sat_id=sat_id,
        se_nxp=SecureElement("closed-anchor", serials[0]),
        se_trop=SecureElement("open-anchor", serials[1]),
        suite=suite,
        trust_store=trust_store,
        params=params,
        ta_binary=ta_binary,
    )
