import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seap.codec import decode_value, encode_value, pack
from seap.errors import MalformedMessageError
from seap.ground_station import handle_hello_ack, initiate_hello
from seap.messages import (
    EXCHANGE_KINDS,
    EndorsementRecord,
    HelloMsg,
    KeyVerifyMsg,
    MessageKind,
    bundle_keys,
    decode,
    encode,
    frame_size,
    identity_bundle,
    kind_of,
    new_nonce,
    wire_size,
)
from seap.satellite import handle_hello

# Frozen byte counts of the modeled link frames.
MODEL = {
    "ecc-p256-class": {"hello": 200, "hello-ack": 1500, "key-verify": 150, "exchange": 1850},
    "hybrid-ecc-falcon": {"exchange": 7640},
    "falcon-only": {"exchange": 7128},
}


@pytest.mark.parametrize("suite", sorted(MODEL))
def test_wire_model_values(suite):
    for kind, size in MODEL[suite].items():
        assert wire_size(kind, suite) == size


def test_exchange_within_published_totals():
    for suite, target in (("ecc-p256-class", 1900), ("hybrid-ecc-falcon", 8000), ("falcon-only", 6500)):
        assert abs(wire_size("exchange", suite) - target) <= 0.15 * target


def test_cert_size_ecc_in_two_to_three_kb():
    assert 2000 <= wire_size(MessageKind.CERT, "ecc-p256-class") <= 3000


@pytest.mark.parametrize("suite", sorted(MODEL))
def test_measured_frames_match_model(make_net, suite):
    net = make_net(suite=suite)
    gs = net.gs["gs-00"]
    hello = initiate_hello(gs, "sat", 0, random.Random(0))
    ack = handle_hello(net.sat, hello, 10)
    kv = handle_hello_ack(gs, ack, 20)
    measured = {kind_of(m).value: frame_size(m) for m in (hello, ack, kv)}
    assert measured == {k.value: wire_size(k, suite) for k in EXCHANGE_KINDS}


def test_encode_decode_roundtrip(net):
    gs = net.gs["gs-01"]
    hello = initiate_hello(gs, "sat", 0, random.Random(0))
    ack = handle_hello(net.sat, hello, 5)
    kv = handle_hello_ack(gs, ack, 9)
    for msg in (hello, ack, kv):
        assert decode(encode(msg)) == msg


def test_decode_rejects_garbage_and_truncation(net):
    hello = initiate_hello(net.gs["gs-00"], "sat", 0, random.Random(0))
    data = encode(hello)
    with pytest.raises(MalformedMessageError):
        decode(data[:-1])
    with pytest.raises(MalformedMessageError):
        decode(data + b"\0")
    with pytest.raises(MalformedMessageError):
        decode(b"\xff\xff\xff")
    with pytest.raises(MalformedMessageError):
        decode(encode_value(b"raw bytes"))


def test_decode_rejects_wrong_field_types():
    with pytest.raises(MalformedMessageError):
        decode(encode_value(KeyVerifyMsg("not-an-int", b"s", "gs")))


values = st.recursive(
    st.none() | st.booleans() | st.integers(min_value=-(2**63), max_value=2**63) | st.binary(max_size=40) | st.text(max_size=20),
    lambda inner: st.lists(inner, max_size=5).map(tuple),
    max_leaves=20,
)


@given(values)
@settings(max_examples=200, deadline=None)
def test_codec_roundtrip_property(value):
    assert decode_value(encode_value(value)) == value


@given(st.lists(st.binary(max_size=8), max_size=4), st.lists(st.binary(max_size=8), max_size=4))
@settings(max_examples=100, deadline=None)
def test_pack_is_injective(a, b):
    if a != b:
        assert pack(*a) != pack(*b)


def test_identity_bundle_roundtrip():
    assert bundle_keys(identity_bundle(b"a" * 64, None)) == (b"a" * 64, None)
    with pytest.raises(MalformedMessageError):
        bundle_keys(b"junk")


def test_nonce_length():
    assert len(new_nonce(random.Random(1))) == 16
    assert len(new_nonce(random.Random(1), 256)) == 32
    with pytest.raises(ValueError):
        new_nonce(random.Random(1), 12)


def test_record_is_hashable_and_ordered_fields():
    r = EndorsementRecord(5, "gs-00", b"s")
    assert {r: 1}[r] == 1
    assert isinstance(HelloMsg(b"n", "g", b"s"), HelloMsg)
