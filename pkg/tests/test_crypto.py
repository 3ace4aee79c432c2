import copy
import pickle
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seap.codec import encode_value
from seap.crypto import (
    ATTESTATION_SLOT,
    IDENTITY_SLOT,
    NON_EXPORTABLE,
    ORIGIN_INTERNAL,
    SUITES,
    KeyRegistry,
    SecureElement,
    attested_slot_report,
    generate_keypair,
    get_suite,
    registry_from_keys,
    safe_verify,
    se_genesis,
    sign,
    suite_for_public_key,
    verify,
    verify_slot_report,
)
from seap.errors import (
    DeletedKeyError,
    EmptySlotError,
    FailedElementError,
    MalformedSignatureError,
    SlotsOccupiedError,
    UnknownPartyError,
)


@pytest.mark.parametrize("name", sorted(SUITES))
def test_sign_verify_roundtrip(name):
    kp = generate_keypair(name, "seed")
    sig = sign(kp, b"hello")
    suite = get_suite(name)
    assert len(kp.public_key) == suite.public_key_bytes
    assert len(sig) == suite.signature_bytes
    assert verify(kp.public_key, b"hello", sig)
    assert not verify(kp.public_key, b"hellp", sig)
    assert suite_for_public_key(kp.public_key) is suite


def test_suite_sizes_match_published_parameters():
    assert (get_suite("ecc-p256-class").public_key_bytes, get_suite("ecc-p256-class").signature_bytes) == (64, 64)
    assert (get_suite("falcon-only").public_key_bytes, get_suite("falcon-only").signature_bytes) == (897, 666)
    hybrid = get_suite("hybrid-ecc-falcon")
    assert (hybrid.public_key_bytes, hybrid.signature_bytes) == (961, 730)


def test_unknown_suite():
    with pytest.raises(ValueError):
        get_suite("rsa")


def test_keygen_deterministic_per_seed():
    assert generate_keypair("ecc-p256-class", 7).public_key == generate_keypair("ecc-p256-class", 7).public_key
    assert generate_keypair("ecc-p256-class", 7).public_key != generate_keypair("ecc-p256-class", 8).public_key


def test_malformed_signature_length():
    kp = generate_keypair("ecc-p256-class", 1)
    with pytest.raises(MalformedSignatureError):
        verify(kp.public_key, b"m", b"\0" * 10)
    assert not safe_verify(kp.public_key, b"m", b"\0" * 10)
    assert not safe_verify(None, b"m", sign(kp, b"m"))


def test_destroyed_handle_cannot_sign():
    kp = generate_keypair("ecc-p256-class", 1)
    kp.private_handle.destroy()
    with pytest.raises(DeletedKeyError):
        sign(kp, b"m")


def test_private_handle_not_serializable():
    kp = generate_keypair("ecc-p256-class", 1)
    with pytest.raises(TypeError):
        pickle.dumps(kp.private_handle)
    assert copy.deepcopy(kp.private_handle) is kp.private_handle
    assert "PrivateHandle" in repr(kp) or "private_handle" not in repr(kp)


@given(st.binary(max_size=64), st.integers(min_value=0, max_value=63), st.integers(min_value=1, max_value=255))
@settings(max_examples=60, deadline=None)
def test_bit_flip_breaks_signature(msg, pos, delta):
    kp = generate_keypair("ecc-p256-class", "flip")
    sig = bytearray(sign(kp, msg))
    sig[pos] ^= delta
    assert not verify(kp.public_key, msg, bytes(sig))


def test_registry_lookup():
    reg = KeyRegistry({"a": b"1" * 64}, committee_epoch=3)
    assert reg.lookup("a") == b"1" * 64
    assert reg.get("b") is None
    with pytest.raises(UnknownPartyError):
        reg.lookup("b")
    assert reg.committee_epoch == 3
    assert reg.canonical_bytes() == KeyRegistry({"a": b"1" * 64}, 3).canonical_bytes()


def test_registry_canonical_bytes_order_independent():
    a, b = generate_keypair("ecc-p256-class", 1), generate_keypair("ecc-p256-class", 2)
    r1 = registry_from_keys([("x", a), ("y", b)])
    r2 = registry_from_keys([("y", b), ("x", a)])
    assert r1.canonical_bytes() == r2.canonical_bytes()


# --- secure elements ---


def test_se_genesis_fills_slots_once():
    se = SecureElement("closed-anchor", "0011")
    assert se.is_empty()
    ident, att = se_genesis(se, "ecc-p256-class", random.Random(1))
    assert ident.slot_index == IDENTITY_SLOT and att.slot_index == ATTESTATION_SLOT
    assert ident.public_key != att.public_key
    assert not se.is_empty()
    with pytest.raises(SlotsOccupiedError):
        se_genesis(se, "ecc-p256-class", random.Random(2))
    assert se.public_key(IDENTITY_SLOT) == ident.public_key


def test_se_genesis_on_failed_element():
    se = SecureElement("open-anchor", "0022")
    se.fail()
    with pytest.raises(FailedElementError):
        se_genesis(se, "ecc-p256-class", 1)


def test_empty_slot_cannot_sign():
    se = SecureElement("closed-anchor", "0033")
    with pytest.raises(EmptySlotError):
        se.sign(IDENTITY_SLOT, b"m")


def test_destroyed_element_is_empty_and_refuses():
    se = SecureElement("closed-anchor", "0044")
    se_genesis(se, "ecc-p256-class", 1)
    se.destroy()
    assert se.is_empty()
    with pytest.raises(FailedElementError):
        se.sign(IDENTITY_SLOT, b"m")


def test_counter_monotonic():
    se = SecureElement("closed-anchor", "0055")
    seen = [se.monotonic_counter]
    se_genesis(se, "ecc-p256-class", 1)
    for _ in range(5):
        seen.append(se.increment_counter())
    assert seen == sorted(seen) and len(set(seen)) == len(seen)


def test_slot_report_flags_and_signature():
    se = SecureElement("closed-anchor", "0066")
    _, att = se_genesis(se, "ecc-p256-class", 1)
    for slot in (IDENTITY_SLOT, ATTESTATION_SLOT):
        report = attested_slot_report(se, slot)
        assert report.serial == "0066"
        assert ORIGIN_INTERNAL in report.policy_flags and NON_EXPORTABLE in report.policy_flags
        assert verify_slot_report(report, att.public_key)
        assert not verify_slot_report(report, se.public_key(IDENTITY_SLOT))


def test_no_private_material_in_serialized_outputs():
    se = SecureElement("closed-anchor", "0077")
    se_genesis(se, "ecc-p256-class", 1)
    secret = se.slots[0].key.private_handle._key.private_bytes_raw()
    blob = encode_value(attested_slot_report(se, IDENTITY_SLOT)) + repr(se).encode()
    assert secret not in blob
    with pytest.raises(TypeError):
        pickle.dumps(se)
