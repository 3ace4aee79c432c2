"""Protocol messages, their canonical encoding and the wire-size model.

Messages are frozen dataclasses encoded with :mod:`seap.codec`. On the link
each message is wrapped in a fixed-size frame (link header, session metadata,
EAT/CBOR envelope) whose size per message kind is listed in
``FRAME_OVERHEAD``; these constants are what bring the encoded ECC exchange
to the published ~200 B / ~1.5 kB / ~150 B figures.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .codec import decode_value, encode_value, pack, wire_type
from .crypto import CryptoSuite, SlotReport, get_suite, safe_verify
from .errors import MalformedMessageError

DEFAULT_NONCE_BITS = 128
# Placeholder EAT claim set carried by every quote (TA measurements, SoC UID,
# slot configuration hash); only its size matters to the simulator.
CLAIMS_BYTES = 360


def new_nonce(rng: random.Random, bits: int = DEFAULT_NONCE_BITS) -> bytes:
    if bits % 8:
        raise ValueError("nonce length must be a whole number of bytes")
    return rng.getrandbits(bits).to_bytes(bits // 8, "big")


def measurement_claims(measurement_hash: bytes) -> bytes:
    return hashlib.shake_256(b"seap/eat-claims/" + measurement_hash).digest(CLAIMS_BYTES)


@wire_type(1)
@dataclass(frozen=True)
class HelloMsg:
    nonce: bytes
    gs_id: str
    signature: bytes


@wire_type(2)
@dataclass(frozen=True)
class TeeQuote:
    """Attestation-key signature binding an identity key to a device and software state.

    The identity key is bound by its SHA-256 digest; the full key travels
    next to the quote in the hello-ack.
    """

    claimed_key_digest: bytes
    se_serial: str
    nonce: bytes
    measurement_hash: bytes
    claims: bytes
    signature: bytes

    def body(self) -> bytes:
        return quote_body(self.claimed_key_digest, self.se_serial, self.nonce, self.measurement_hash, self.claims)


@wire_type(3)
@dataclass(frozen=True)
class HelloAckMsg:
    nonce: bytes
    vk_nxp: Optional[bytes]
    vk_trop: Optional[bytes]
    quote_nxp: Optional[TeeQuote]
    quote_trop: Optional[TeeQuote]
    sig_nonce_nxp: Optional[bytes]
    sig_nonce_trop: Optional[bytes]

    @property
    def vk_s(self) -> bytes:
        return identity_bundle(self.vk_nxp, self.vk_trop)

    @property
    def degraded(self) -> bool:
        return self.vk_nxp is None or self.vk_trop is None


@wire_type(4)
@dataclass(frozen=True)
class KeyVerifyMsg:
    timestamp: int
    signature: bytes
    gs_id: str


@wire_type(5)
@dataclass(frozen=True)
class EndorsementRecord:
    ts: int
    gs_id: str
    signature: bytes


@wire_type(6)
@dataclass(frozen=True)
class CertificateOfAuthorization:
    """Quorum of endorsements over ``vk_s`` counter-signed inside the TEE.

    Each entry keeps its timestamp so relying parties can check both the
    signature (made over the key and timestamp) and the window span.
    """

    vk_s: bytes
    endorsements: tuple[EndorsementRecord, ...]
    quote_nxp: Optional[TeeQuote]
    quote_trop: Optional[TeeQuote]
    tee_signature: bytes

    def body(self) -> bytes:
        return cert_body(self.vk_s, self.endorsements, self.quote_nxp, self.quote_trop)

    @property
    def signers(self) -> list[str]:
        return [e.gs_id for e in self.endorsements]

    @property
    def span_ms(self) -> int:
        ts = [e.ts for e in self.endorsements]
        return max(ts) - min(ts) if ts else 0


@wire_type(7)
@dataclass(frozen=True)
class EatToken:
    nonce: bytes
    measurement_hash: bytes
    se_serials: tuple[str, str]
    heartbeat: int
    issued_at: int
    sig_nxp: Optional[bytes]
    sig_trop: Optional[bytes]

    def body(self) -> bytes:
        return eat_body(self.nonce, self.measurement_hash, self.se_serials, self.heartbeat, self.issued_at)

    @property
    def degraded(self) -> bool:
        return (self.sig_nxp is None) != (self.sig_trop is None)


@wire_type(8)
@dataclass(frozen=True)
class Member:
    gs_id: str
    public_key: bytes


@wire_type(9)
@dataclass(frozen=True)
class SignerEntry:
    gs_id: str
    signature: bytes


@wire_type(10)
@dataclass(frozen=True)
class HandoverCertificate:
    old_epoch: int
    new_committee: tuple[Member, ...]
    signatures: tuple[SignerEntry, ...]

    def body(self) -> bytes:
        return handover_body(self.old_epoch, self.new_committee)

    @property
    def signer_ids(self) -> list[str]:
        return [s.gs_id for s in self.signatures]


@wire_type(11)
@dataclass(frozen=True)
class GenesisEvidence:
    """Genesis EAT plus the attribute reports of all occupied slots."""

    token: EatToken
    slot_reports: tuple[SlotReport, ...]


Message = Union[
    HelloMsg, HelloAckMsg, KeyVerifyMsg, CertificateOfAuthorization, EatToken, HandoverCertificate, GenesisEvidence
]


# --- signature payloads ------------------------------------------------------------


def identity_bundle(vk_nxp: Optional[bytes], vk_trop: Optional[bytes]) -> bytes:
    """The satellite key ``vk_S``: both identity keys in canonical form."""
    return pack("vk-s", vk_nxp, vk_trop)


def bundle_keys(vk_s: bytes) -> tuple[Optional[bytes], Optional[bytes]]:
    value = decode_value(vk_s)
    if not (isinstance(value, tuple) and len(value) == 3 and value[0] == "vk-s"):
        raise MalformedMessageError("not an identity bundle")
    return value[1], value[2]


def primary_identity_key(vk_s: bytes) -> Optional[bytes]:
    vk_nxp, vk_trop = bundle_keys(vk_s)
    return vk_nxp if vk_nxp is not None else vk_trop


def hello_payload(nonce: bytes) -> bytes:
    return pack("hello", nonce)


def nonce_payload(nonce: bytes) -> bytes:
    return pack("nonce", nonce)


def key_verify_payload(vk_s: bytes, ts: int) -> bytes:
    return pack("key-verify", vk_s, ts)


def quote_body(key_digest: bytes, serial: str, nonce: bytes, measurement: bytes, claims: bytes) -> bytes:
    return pack("tee-quote", key_digest, serial, nonce, measurement, claims)


def cert_body(vk_s, endorsements, quote_nxp, quote_trop) -> bytes:
    return pack("cert", vk_s, tuple(endorsements), quote_nxp, quote_trop)


def eat_body(nonce, measurement, serials, heartbeat, issued_at) -> bytes:
    return pack("eat", nonce, measurement, tuple(serials), heartbeat, issued_at)


def handover_body(old_epoch: int, new_committee) -> bytes:
    return pack("handover", old_epoch, tuple(new_committee))


def verify_tee_signature(vk_s: bytes, body: bytes, signature: bytes) -> bool:
    try:
        key = primary_identity_key(vk_s)
    except MalformedMessageError:
        return False
    return safe_verify(key, body, signature)


# --- codec -----------------------------------------------------------------------------


def encode(message: Message) -> bytes:
    return encode_value(message)


def decode(data: bytes) -> Message:
    value = decode_value(data)
    if not hasattr(value, "__dataclass_fields__"):
        raise MalformedMessageError("not a message")
    return value


class MessageKind(str, Enum):
    HELLO = "hello"
    HELLO_ACK = "hello-ack"
    KEY_VERIFY = "key-verify"
    CERT = "cert"
    EAT = "eat"
    HANDOVER = "handover"
    GENESIS = "genesis"


_KIND_OF = {
    HelloMsg: MessageKind.HELLO,
    HelloAckMsg: MessageKind.HELLO_ACK,
    KeyVerifyMsg: MessageKind.KEY_VERIFY,
    CertificateOfAuthorization: MessageKind.CERT,
    EatToken: MessageKind.EAT,
    HandoverCertificate: MessageKind.HANDOVER,
    GenesisEvidence: MessageKind.GENESIS,
}


def kind_of(message: Message) -> MessageKind:
    return _KIND_OF[type(message)]


# Fixed per-frame bytes outside the encoded message body.
FRAME_OVERHEAD = {
    MessageKind.HELLO: 93,
    MessageKind.HELLO_ACK: 82,
    MessageKind.KEY_VERIFY: 51,
    MessageKind.CERT: 40,
    MessageKind.EAT: 40,
    MessageKind.HANDOVER: 40,
    MessageKind.GENESIS: 40,
}


def frame_size(message: Message) -> int:
    """Bytes the message occupies on the link."""
    return len(encode(message)) + FRAME_OVERHEAD[kind_of(message)]


# Analytic wire model: fixed bytes + public keys + signatures, per message kind.
# Fixed parts are calibrated on the ECC instantiation (hello ~200 B,
# hello-ack ~1.5 kB, key-verify ~150 B).
_WIRE_MODEL = {
    MessageKind.HELLO: (136, 0, 1),
    MessageKind.HELLO_ACK: (1116, 2, 4),
    MessageKind.KEY_VERIFY: (86, 0, 1),
}
EXCHANGE_KINDS = (MessageKind.HELLO, MessageKind.HELLO_ACK, MessageKind.KEY_VERIFY)


def wire_size(kind: Union[MessageKind, str], suite: Union[CryptoSuite, str], endorsements: int = 7) -> int:
    """Modeled link size in bytes of one message of ``kind`` under ``suite``.

    ``kind`` may also be ``"exchange"`` for the hello + hello-ack + key-verify
    total. Certificates depend on the number of endorsements they carry.
    """
    suite = get_suite(suite)
    if kind == "exchange":
        return sum(wire_size(k, suite) for k in EXCHANGE_KINDS)
    kind = MessageKind(kind)
    if kind == MessageKind.CERT:
        fixed, per_entry, n_pk, n_sig = _CERT_MODEL
        return fixed + per_entry * endorsements + n_pk * suite.public_key_bytes + (endorsements + n_sig) * suite.signature_bytes
    if kind not in _WIRE_MODEL:
        raise ValueError(f"no wire model for {kind.value}")
    fixed, n_pk, n_sig = _WIRE_MODEL[kind]
    return fixed + n_pk * suite.public_key_bytes + n_sig * suite.signature_bytes


# Certificate: fixed envelope + per-endorsement metadata + vk_S (two keys) +
# endorsement signatures + two quote signatures and the outer TEE signature.
_CERT_MODEL = (1072, 35, 2, 3)
