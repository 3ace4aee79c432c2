"""Ground-station state machine and the attestation verifier role."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from .crypto import (
    ATTESTATION_SLOT,
    IDENTITY_SLOT,
    NON_EXPORTABLE,
    ORIGIN_INTERNAL,
    KeyPair,
    KeyRegistry,
    SlotReport,
    fingerprint,
    safe_verify,
    sign,
    verify_slot_report,
)
from .errors import GenesisConflictError, MalformedMessageError, PolicyFlagMissingError, SerialMismatchError
from .messages import (
    DEFAULT_NONCE_BITS,
    CertificateOfAuthorization,
    EatToken,
    HelloAckMsg,
    HelloMsg,
    KeyVerifyMsg,
    TeeQuote,
    bundle_keys,
    hello_payload,
    key_verify_payload,
    measurement_claims,
    new_nonce,
    nonce_payload,
    verify_tee_signature,
)

Pair = tuple[Optional[bytes], Optional[bytes]]


@dataclass(frozen=True)
class VerifierPolicy:
    reference_measurement: bytes
    registered_serials: tuple[str, str]
    registered_attestation_keys: Optional[Pair] = None
    nonce_ttl_ms: int = 6000
    degraded_mode_allowed: bool = False
    # Hardware identity pinning: quotes must name the registered serials and
    # verify under the pinned attestation keys. Off reproduces plain SEAP,
    # where a software clone is indistinguishable.
    identity_checks: bool = True


class Verdict(str, Enum):
    ACCEPT = "accept"
    ACCEPT_DEGRADED = "accept-degraded"
    REJECT = "reject"


# Stable reason codes for rejected EAT appraisals.
REJECT_REASONS = (
    "stale-nonce",
    "nonce-expired",
    "measurement-mismatch",
    "serial-mismatch",
    "keys-unpinned",
    "bad-signature",
    "missing-anchor",
    "no-signature",
)


@dataclass(frozen=True)
class Appraisal:
    verdict: Verdict
    reason: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.verdict is not Verdict.REJECT


@dataclass
class GsState:
    gs_id: str
    keypair: KeyPair
    committee_view: KeyRegistry
    policy: VerifierPolicy
    window_ms: int
    nonce_bits: int = DEFAULT_NONCE_BITS
    sessions: dict[bytes, int] = field(default_factory=dict)
    received_cert: Optional[CertificateOfAuthorization] = None
    epoch: int = 0
    pending_keypair: Optional[KeyPair] = field(default=None, repr=False)
    retired_keys: list[KeyPair] = field(default_factory=list, repr=False)
    drops: list[tuple[str, str]] = field(default_factory=list)
    endorsed: list[tuple[int, bytes]] = field(default_factory=list)

    @property
    def public_key(self) -> bytes:
        return self.keypair.public_key

    def _drop(self, reason: str, detail: str = "") -> None:
        self.drops.append((reason, detail))

    def expire_sessions(self, now: int) -> None:
        for nonce in [n for n, start in self.sessions.items() if now - start >= self.window_ms]:
            del self.sessions[nonce]


def initiate_hello(state: GsState, satellite_id: str, now: int, rng: random.Random) -> HelloMsg:
    """Open a session: fresh nonce, recorded start time, signed hello."""
    nonce = new_nonce(rng, state.nonce_bits)
    while nonce in state.sessions:
        nonce = new_nonce(rng, state.nonce_bits)
    state.sessions[nonce] = now
    return HelloMsg(nonce, state.gs_id, sign(state.keypair, hello_payload(nonce)))


def check_quote(policy: VerifierPolicy, index: int, quote: Optional[TeeQuote], vk: bytes, nonce: bytes) -> Optional[str]:
    """First failing reason for one anchor's quote, or None when it appraises."""
    if quote is None:
        return "missing-quote"
    if quote.nonce != nonce:
        return "quote-nonce"
    if quote.claimed_key_digest != fingerprint(vk):
        return "quote-key"
    if quote.measurement_hash != policy.reference_measurement:
        return "measurement-mismatch"
    if quote.claims != measurement_claims(quote.measurement_hash):
        return "quote-claims"
    if policy.identity_checks:
        if quote.se_serial != policy.registered_serials[index]:
            return "serial-mismatch"
        pinned = policy.registered_attestation_keys
        if pinned is None or pinned[index] is None:
            return "keys-unpinned"
        if not safe_verify(pinned[index], quote.body(), quote.signature):
            return "quote-signature"
    return None


def hello_ack_failure(policy: VerifierPolicy, msg: HelloAckMsg, nonce: bytes) -> Optional[str]:
    """Nonce signatures and quote appraisal for each anchor; returns the first failing reason."""
    anchors = [(0, msg.vk_nxp, msg.sig_nonce_nxp, msg.quote_nxp), (1, msg.vk_trop, msg.sig_nonce_trop, msg.quote_trop)]
    present = [a for a in anchors if a[1] is not None]
    if not present:
        return "no-anchor"
    if len(present) < 2 and not policy.degraded_mode_allowed:
        return "degraded-not-allowed"
    for index, vk, sig, quote in present:
        if not safe_verify(vk, nonce_payload(nonce), sig):
            return "nonce-signature"
        reason = check_quote(policy, index, quote, vk, nonce)
        if reason:
            return reason
    return None


def handle_hello_ack(state: GsState, msg: HelloAckMsg, now: int) -> Optional[KeyVerifyMsg]:
    """Endorse the satellite key iff the session is fresh and all evidence checks pass."""
    start = state.sessions.get(msg.nonce)
    if start is None:
        state._drop("unknown-session")
        return None
    if now - start >= state.window_ms:
        del state.sessions[msg.nonce]
        state._drop("session-expired")
        return None
    reason = hello_ack_failure(state.policy, msg, msg.nonce)
    if reason:
        state._drop(reason)
        return None
    del state.sessions[msg.nonce]
    vk_s = msg.vk_s
    signature = sign(state.keypair, key_verify_payload(vk_s, now))
    state.endorsed.append((now, vk_s))
    return KeyVerifyMsg(now, signature, state.gs_id)


def certificate_signatures_valid(cert: CertificateOfAuthorization, registry: KeyRegistry) -> bool:
    for e in cert.endorsements:
        key = registry.get(e.gs_id)
        if not safe_verify(key, key_verify_payload(cert.vk_s, e.ts), e.signature):
            return False
    return verify_tee_signature(cert.vk_s, cert.body(), cert.tee_signature)


def handle_cert(state: GsState, cert: CertificateOfAuthorization) -> bool:
    """Accept a certificate iff every endorsement and the outer signature verify."""
    if not certificate_signatures_valid(cert, state.committee_view):
        state._drop("cert-invalid")
        return False
    state.received_cert = cert
    return True


def verify_certificate(
    cert: CertificateOfAuthorization,
    registry: KeyRegistry,
    threshold: int,
    window_ms: int,
    policy: Optional[VerifierPolicy] = None,
) -> bool:
    """Relying-party check: signatures, quorum size, distinct signers, window span and,
    given a policy, that the certificate's quotes bind vk_S to the registered hardware."""
    ids = cert.signers
    if len(ids) != threshold or len(set(ids)) != len(ids):
        return False
    if cert.endorsements and cert.span_ms >= window_ms:
        return False
    if not certificate_signatures_valid(cert, registry):
        return False
    if policy is not None:
        try:
            keys = bundle_keys(cert.vk_s)
        except MalformedMessageError:
            return False
        expected_nonce = fingerprint(cert.vk_s)
        for index, (vk, quote) in enumerate(zip(keys, (cert.quote_nxp, cert.quote_trop))):
            if vk is None:
                if not policy.degraded_mode_allowed:
                    return False
                continue
            if check_quote(policy, index, quote, vk, expected_nonce):
                return False
    return True


def appraise_eat(
    policy: VerifierPolicy,
    token: EatToken,
    expected_nonce: bytes,
    now: int,
    nonce_issued_at: Optional[int] = None,
) -> Appraisal:
    """Appraise attestation evidence; the first failing check names the reason."""
    if token.nonce != expected_nonce:
        return Appraisal(Verdict.REJECT, "stale-nonce")
    issued = token.issued_at if nonce_issued_at is None else nonce_issued_at
    if now - issued >= policy.nonce_ttl_ms or now < issued:
        return Appraisal(Verdict.REJECT, "nonce-expired")
    if token.measurement_hash != policy.reference_measurement:
        return Appraisal(Verdict.REJECT, "measurement-mismatch")
    if tuple(token.se_serials) != tuple(policy.registered_serials):
        return Appraisal(Verdict.REJECT, "serial-mismatch")
    pinned = policy.registered_attestation_keys
    if pinned is None:
        return Appraisal(Verdict.REJECT, "keys-unpinned")
    body = token.body()
    valid = 0
    for key, sig in zip(pinned, (token.sig_nxp, token.sig_trop)):
        if sig is None:
            continue
        if not safe_verify(key, body, sig):
            return Appraisal(Verdict.REJECT, "bad-signature")
        valid += 1
    if valid == 2:
        return Appraisal(Verdict.ACCEPT)
    if valid == 1:
        if policy.degraded_mode_allowed:
            return Appraisal(Verdict.ACCEPT_DEGRADED)
        return Appraisal(Verdict.REJECT, "missing-anchor")
    return Appraisal(Verdict.REJECT, "no-signature")


def genesis_bootstrap(policy: VerifierPolicy, token: EatToken, slot_reports: Sequence[SlotReport]) -> VerifierPolicy:
    """Pin the attestation keys carried by the first genesis token from the registered chips."""
    if policy.registered_attestation_keys is not None:
        raise GenesisConflictError("attestation keys are already pinned")
    if tuple(token.se_serials) != tuple(policy.registered_serials):
        raise SerialMismatchError(f"token serials {token.se_serials} != registered {policy.registered_serials}")
    body = token.body()
    pinned: list[Optional[bytes]] = [None, None]
    for index, serial in enumerate(policy.registered_serials):
        reports = {r.slot_index: r for r in slot_reports if r.serial == serial}
        sig = (token.sig_nxp, token.sig_trop)[index]
        if not reports and sig is None:
            continue
        att = reports.get(ATTESTATION_SLOT)
        if att is None or IDENTITY_SLOT not in reports:
            raise SerialMismatchError(f"no slot reports from registered element {serial}")
        for report in reports.values():
            flags = set(report.policy_flags)
            if ORIGIN_INTERNAL not in flags or NON_EXPORTABLE not in flags:
                raise PolicyFlagMissingError(f"{serial} slot {report.slot_index} flags {sorted(flags)}")
            if not verify_slot_report(report, att.public_key):
                raise SerialMismatchError(f"slot report from {serial} is not signed by its attestation key")
        if not safe_verify(att.public_key, body, sig):
            raise SerialMismatchError(f"genesis token not signed by element {serial}")
        pinned[index] = att.public_key
    stray = {r.serial for r in slot_reports} - set(policy.registered_serials)
    if stray:
        raise SerialMismatchError(f"unregistered serials {sorted(stray)}")
    if pinned == [None, None]:
        raise SerialMismatchError("no registered element produced genesis evidence")
    if None in pinned and not policy.degraded_mode_allowed:
        raise SerialMismatchError("genesis evidence from a single element under strict policy")
    return replace(policy, registered_attestation_keys=tuple(pinned))
