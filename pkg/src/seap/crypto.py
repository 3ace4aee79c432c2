"""Signing keys, the ground-station key registry and an abstract secure element.

All suites are backed by Ed25519. Post-quantum suites reuse the same scheme
and pad public keys and signatures to their published sizes; the padding is
a deterministic function of the core bytes and is checked on verification,
so any byte flip is still detected.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Union

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from .codec import pack, wire_type
from .errors import (
    DeletedKeyError,
    EmptySlotError,
    FailedElementError,
    MalformedSignatureError,
    SlotsOccupiedError,
    UnknownPartyError,
)

_CORE_PK = 32
_CORE_SIG = 64


@dataclass(frozen=True)
class CryptoSuite:
    name: str
    public_key_bytes: int
    signature_bytes: int
    sign_latency_ms: tuple[int, int]
    # False when signing runs in software on the TEE core rather than on the
    # secure elements, so the two elements cannot sign concurrently.
    parallel_capable: bool = True


@dataclass(frozen=True)
class KemSizes:
    public_key_bytes: int
    ciphertext_bytes: int


# Primitive sizes (bytes): ECC-P256 pk/sig, Falcon-512 pk/sig, ML-KEM-768 pk/ct.
ECC_P256_SIZES = (64, 64)
FALCON_512_SIZES = (897, 666)
ML_KEM_768 = KemSizes(1184, 1088)

ECC_P256 = CryptoSuite("ecc-p256-class", 64, 64, (50, 100))
# Hybrid carries the hardware ECC signature next to a software Falcon co-signature.
# Per-op latency is set so four sequential signatures plus propagation and
# GS verification span 400-1200 ms per exchange.
HYBRID_ECC_FALCON = CryptoSuite(
    "hybrid-ecc-falcon",
    ECC_P256_SIZES[0] + FALCON_512_SIZES[0],
    ECC_P256_SIZES[1] + FALCON_512_SIZES[1],
    (73, 245),
    parallel_capable=False,
)
FALCON_ONLY = CryptoSuite("falcon-only", FALCON_512_SIZES[0], FALCON_512_SIZES[1], (200, 500), parallel_capable=False)

SUITES: dict[str, CryptoSuite] = {s.name: s for s in (ECC_P256, HYBRID_ECC_FALCON, FALCON_ONLY)}
_BY_PK_LEN = {s.public_key_bytes: s for s in SUITES.values()}


def get_suite(name: Union[str, CryptoSuite]) -> CryptoSuite:
    if isinstance(name, CryptoSuite):
        return name
    try:
        return SUITES[name]
    except KeyError:
        raise ValueError(f"unknown crypto suite {name!r}; expected one of {sorted(SUITES)}") from None


def suite_for_public_key(public_key: bytes) -> Optional[CryptoSuite]:
    return _BY_PK_LEN.get(len(public_key))


def _filler(label: bytes, suite: CryptoSuite, core: bytes, length: int) -> bytes:
    if length <= 0:
        return b""
    return hashlib.shake_256(b"seap/" + label + b"/" + suite.name.encode() + core).digest(length)


class PrivateHandle:
    """Opaque signing capability. Cannot be serialized, copied or inspected."""

    __slots__ = ("_key",)

    def __init__(self, key: Ed25519PrivateKey):
        self._key = key

    @property
    def destroyed(self) -> bool:
        return self._key is None

    def destroy(self) -> None:
        self._key = None

    def _sign_core(self, message: bytes) -> bytes:
        if self._key is None:
            raise DeletedKeyError("private handle was destroyed")
        return self._key.sign(message)

    def __reduce_ex__(self, protocol):
        raise TypeError("private handles are not serializable")

    def __getstate__(self):
        raise TypeError("private handles are not serializable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __repr__(self) -> str:
        return "<PrivateHandle destroyed>" if self._key is None else "<PrivateHandle>"


@dataclass(frozen=True)
class KeyPair:
    suite: CryptoSuite
    public_key: bytes
    private_handle: PrivateHandle = field(repr=False, compare=False)


Seed = Union[int, bytes, str, random.Random]


def _seed_bytes(suite: CryptoSuite, rng_seed: Seed) -> bytes:
    if isinstance(rng_seed, random.Random):
        return rng_seed.getrandbits(256).to_bytes(32, "big")
    if isinstance(rng_seed, int):
        raw = rng_seed.to_bytes((rng_seed.bit_length() + 8) // 8, "big", signed=True)
    elif isinstance(rng_seed, str):
        raw = rng_seed.encode()
    else:
        raw = bytes(rng_seed)
    return hashlib.sha256(b"seap/keygen/" + suite.name.encode() + b"/" + raw).digest()


def generate_keypair(suite: Union[str, CryptoSuite], rng_seed: Seed) -> KeyPair:
    """Deterministic key generation: equal (suite, seed) gives equal keys.

    Passing a ``random.Random`` draws fresh key material from it.
    """
    suite = get_suite(suite)
    sk = Ed25519PrivateKey.from_private_bytes(_seed_bytes(suite, rng_seed))
    core = sk.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    public = core + _filler(b"pk", suite, core, suite.public_key_bytes - _CORE_PK)
    return KeyPair(suite, public, PrivateHandle(sk))


def sign(key: KeyPair, message: bytes) -> bytes:
    core = key.private_handle._sign_core(message)
    return core + _filler(b"sig", key.suite, core, key.suite.signature_bytes - _CORE_SIG)


@lru_cache(maxsize=4096)
def _load_public(core: bytes) -> Ed25519PublicKey:
    return Ed25519PublicKey.from_public_bytes(core)


def verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    """True iff ``signature`` was made over ``message`` by the matching handle.

    Raises MalformedSignatureError when the signature length does not match
    the suite implied by the public key.
    """
    suite = suite_for_public_key(public_key)
    if suite is None:
        return False
    if len(signature) != suite.signature_bytes:
        raise MalformedSignatureError(
            f"{suite.name} signatures are {suite.signature_bytes} bytes, got {len(signature)}"
        )
    core_pk, pk_pad = public_key[:_CORE_PK], public_key[_CORE_PK:]
    if pk_pad != _filler(b"pk", suite, core_pk, suite.public_key_bytes - _CORE_PK):
        return False
    core_sig, sig_pad = signature[:_CORE_SIG], signature[_CORE_SIG:]
    if sig_pad != _filler(b"sig", suite, core_sig, suite.signature_bytes - _CORE_SIG):
        return False
    try:
        _load_public(bytes(core_pk)).verify(bytes(core_sig), bytes(message))
    except (InvalidSignature, ValueError):
        return False
    return True


def safe_verify(public_key: Optional[bytes], message: bytes, signature: Optional[bytes]) -> bool:
    """verify() that treats absent or malformed inputs as a failed check."""
    if public_key is None or signature is None:
        return False
    try:
        return verify(public_key, message, signature)
    except MalformedSignatureError:
        return False


def fingerprint(public_key: bytes) -> bytes:
    return hashlib.sha256(public_key).digest()


# --- key registry --------------------------------------------------------------


class KeyRegistry:
    """Map from party identifier to public key for one committee epoch."""

    def __init__(self, entries: Mapping[str, bytes] = (), committee_epoch: int = 0):
        self._entries = dict(entries)
        self.committee_epoch = committee_epoch

    def lookup(self, party: str) -> bytes:
        try:
            return self._entries[party]
        except KeyError:
            raise UnknownPartyError(party) from None

    def get(self, party: str) -> Optional[bytes]:
        return self._entries.get(party)

    def __contains__(self, party: object) -> bool:
        return party in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def parties(self) -> list[str]:
        return sorted(self._entries)

    def items(self) -> list[tuple[str, bytes]]:
        return sorted(self._entries.items())

    def canonical_bytes(self) -> bytes:
        return pack(self.committee_epoch, tuple(self.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KeyRegistry):
            return NotImplemented
        return self.committee_epoch == other.committee_epoch and self._entries == other._entries

    def __repr__(self) -> str:
        return f"KeyRegistry(epoch={self.committee_epoch}, parties={self.parties()})"


# --- secure element --------------------------------------------------------------


class Vendor(str, Enum):
    CLOSED_ANCHOR = "closed-anchor"
    OPEN_ANCHOR = "open-anchor"


class SlotState(str, Enum):
    EMPTY = "empty"
    OCCUPIED = "occupied"


ORIGIN_INTERNAL = "origin-internal"
NON_EXPORTABLE = "non-exportable"
REQUIRED_POLICY = frozenset({ORIGIN_INTERNAL, NON_EXPORTABLE})

IDENTITY_SLOT = 0
ATTESTATION_SLOT = 1


@dataclass
class SecureElementSlot:
    slot_index: int
    state: SlotState = SlotState.EMPTY
    key: Optional[KeyPair] = field(default=None, repr=False)
    policy_flags: frozenset = frozenset()


@dataclass(frozen=True)
class SlotKey:
    """Public reference to a key that lives inside a secure element slot."""

    serial: str
    slot_index: int
    public_key: bytes


@wire_type(40)
@dataclass(frozen=True)
class SlotReport:
    serial: str
    slot_index: int
    policy_flags: tuple[str, ...]
    origin: str
    public_key: bytes
    signature: bytes

    def body(self) -> bytes:
        return pack("slot-report", self.serial, self.slot_index, self.policy_flags, self.origin, self.public_key)


class SecureElement:
    """Two-slot secure element with a monotonic counter.

    Slot keys never leave the element; callers get :class:`SlotKey`
    references and sign through :meth:`sign`.
    """

    def __init__(self, vendor_id: Union[Vendor, str], serial: str):
        self.vendor_id = Vendor(vendor_id)
        self.serial = serial
        self.slots = (SecureElementSlot(0), SecureElementSlot(1))
        self.failed = False
        self._counter = 0

    @property
    def monotonic_counter(self) -> int:
        return self._counter

    def increment_counter(self) -> int:
        self._counter += 1
        return self._counter

    def is_empty(self) -> bool:
        return all(s.state is SlotState.EMPTY for s in self.slots)

    def _occupied(self, slot: int) -> SecureElementSlot:
        if self.failed:
            raise FailedElementError(self.serial)
        s = self.slots[slot]
        if s.state is not SlotState.OCCUPIED or s.key is None:
            raise EmptySlotError(f"{self.serial} slot {slot}")
        return s

    def public_key(self, slot: int) -> bytes:
        return self._occupied(slot).key.public_key

    def slot_key(self, slot: int) -> SlotKey:
        return SlotKey(self.serial, slot, self.public_key(slot))

    def sign(self, slot: int, message: bytes) -> bytes:
        return sign(self._occupied(slot).key, message)

    def fail(self) -> None:
        """Mark the element as failed (e.g. latch-up); it stops signing."""
        self.failed = True

    def destroy(self) -> None:
        """Simulated physical destruction: the only path from occupied to empty."""
        for s in self.slots:
            if s.key is not None:
                s.key.private_handle.destroy()
            s.key = None
            s.state = SlotState.EMPTY
            s.policy_flags = frozenset()
        self.failed = True

    def __reduce_ex__(self, protocol):
        raise TypeError("secure elements are not serializable")

    def __repr__(self) -> str:
        states = ",".join(s.state.value for s in self.slots)
        return f"SecureElement({self.vendor_id.value}, {self.serial}, slots=[{states}], counter={self._counter}, failed={self.failed})"


def se_genesis(element: SecureElement, suite: Union[str, CryptoSuite], rng: Seed) -> tuple[SlotKey, SlotKey]:
    """On-orbit key genesis: fill both slots with internally generated keys.

    Refuses to run unless every slot is empty, so keys generated before
    launch are detected rather than silently reused.
    """
    suite = get_suite(suite)
    if element.failed:
        raise FailedElementError(element.serial)
    if not element.is_empty():
        raise SlotsOccupiedError(f"{element.serial}: key slots are not empty")
    if not isinstance(rng, random.Random):
        rng = random.Random(_seed_bytes(suite, rng) + element.serial.encode())
    for slot in element.slots:
        slot.key = generate_keypair(suite, rng)
        slot.state = SlotState.OCCUPIED
        slot.policy_flags = REQUIRED_POLICY
    element.increment_counter()
    return element.slot_key(IDENTITY_SLOT), element.slot_key(ATTESTATION_SLOT)


def attested_slot_report(element: SecureElement, slot: int) -> SlotReport:
    """Signed attribute report for one slot, signed by the attestation slot."""
    s = element._occupied(slot)
    unsigned = SlotReport(
        serial=element.serial,
        slot_index=slot,
        policy_flags=tuple(sorted(s.policy_flags)),
        origin="internal" if ORIGIN_INTERNAL in s.policy_flags else "external",
        public_key=s.key.public_key,
        signature=b"",
    )
    return replace(unsigned, signature=element.sign(ATTESTATION_SLOT, unsigned.body()))


def verify_slot_report(report: SlotReport, attestation_key: bytes) -> bool:
    return safe_verify(attestation_key, report.body(), report.signature)


def make_serial(rng: random.Random) -> str:
    """16 hex characters, as assigned by scenario configuration."""
    return f"{rng.getrandbits(64):016x}"


def registry_from_keys(keys: Iterable[tuple[str, KeyPair]], epoch: int = 0) -> KeyRegistry:
    return KeyRegistry({gid: kp.public_key for gid, kp in keys}, epoch)
