import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_force_quorum

from seap.crypto import generate_keypair, make_serial, sign
from seap.errors import BothElementsFailedError, NotCertifiedError, SeapError
from seap.ground_station import handle_hello_ack, initiate_hello, verify_certificate
from seap.messages import EndorsementRecord, HelloMsg, KeyVerifyMsg, hello_payload, key_verify_payload
from seap.satellite import (
    Phase,
    ProtocolParams,
    broadcast_cert,
    find_quorum,
    handle_hello,
    handle_key_verify,
    issue_eat,
    new_satellite,
    on_boot,
)


def records_strategy(max_n=12):
    return st.lists(
        st.tuples(st.integers(0, 5), st.integers(0, 40)),
        max_size=max_n,
        unique=True,
    ).map(lambda xs: sorted((EndorsementRecord(ts, f"gs-{g}", b"s") for g, ts in xs), key=lambda r: (r.ts, r.gs_id)))


@given(records_strategy(), st.integers(1, 5), st.integers(1, 30))
@settings(max_examples=400, deadline=None)
def test_find_quorum_matches_oracle(records, k, window):
    got = find_quorum(records, k, window)
    want = brute_force_quorum(records, k, window)
    if want is None:
        assert got is None
    else:
        assert got is not None and len({r.gs_id for r in got}) == k == len(got)
        assert (got[0].ts, max(r.ts for r in got)) == want


def test_find_quorum_examples():
    recs = [EndorsementRecord(t, g, b"") for t, g in [(0, "a"), (1, "a"), (5, "b"), (9, "c")]]
    assert find_quorum(recs, 3, 10) is not None
    assert [r.ts for r in find_quorum(recs, 3, 9)] == [1, 5, 9]  # later "a" record keeps span 8 < 9
    assert find_quorum(recs, 3, 8) is None  # span 8 is not strictly less than W=8
    assert find_quorum(recs, 4, 100) is None  # only three distinct stations
    assert find_quorum(recs, 0, 1) == ()


def test_params_threshold():
    assert ProtocolParams(2, 2, 10).threshold == 7
    assert ProtocolParams(2, 2, 10, threshold_override=3).threshold == 3
    with pytest.raises(ValueError):
        ProtocolParams(-1, 0, 10)
    with pytest.raises(ValueError):
        ProtocolParams(0, 0, 0)
    assert ProtocolParams(1, 1, 10, t_percent=20).for_committee(20).t_gs == 4


def exchange(net, gs_id, t):
    gs = net.gs[gs_id]
    hello = initiate_hello(gs, "sat", t, net.rng)
    ack = handle_hello(net.sat, hello, t + 10)
    kv = handle_hello_ack(gs, ack, t + 20)
    return kv, handle_key_verify(net.sat, kv, gs_id)


def test_certifies_at_threshold(net):
    # n=5, t_gs=1, t_ch=1 -> threshold 4
    results = [exchange(net, g, 100 * i) for i, g in enumerate(net.ids[:4])]
    assert all(c is None for _, c in results[:3])
    cert = results[3][1]
    assert cert is not None and net.sat.phase is Phase.CERTIFIED
    assert cert.signers == net.ids[:4]
    assert verify_certificate(cert, net.registry, 4, net.params.window_ms, net.policy)
    assert not verify_certificate(cert, net.registry, 5, net.params.window_ms)
    assert len(broadcast_cert(net.sat)) == 5


def test_window_excludes_stale_endorsements(net):
    exchange(net, "gs-00", 0)
    exchange(net, "gs-01", 1000)
    exchange(net, "gs-02", 6000)  # gs-00 at t=20 falls out of the 6000 ms window
    _, cert = exchange(net, "gs-03", 6500)
    assert cert is None
    _, cert = exchange(net, "gs-04", 6600)
    assert cert is not None and "gs-00" not in cert.signers
    assert cert.span_ms < net.params.window_ms


def test_duplicate_and_post_cert_drops(net):
    kv, _ = exchange(net, "gs-00", 0)
    assert handle_key_verify(net.sat, kv, "gs-00") is None
    assert net.sat.drops[-1][0] == "duplicate"
    for i, g in enumerate(net.ids[1:4], 1):
        exchange(net, g, 100 * i)
    assert net.sat.phase is Phase.CERTIFIED
    kv, cert = exchange(net, "gs-04", 900)
    assert cert is None and net.sat.drops[-1][0] == "already-certified"


def test_key_verify_rejections(net):
    gs = net.gs["gs-00"]
    good = key_verify_payload(net.sat.vk_s, 5)
    assert handle_key_verify(net.sat, KeyVerifyMsg(5, sign(gs.keypair, good), "gs-00"), "gs-01") is None
    assert net.sat.drops[-1][0] == "sender-mismatch"
    stranger = generate_keypair("ecc-p256-class", "stranger")
    assert handle_key_verify(net.sat, KeyVerifyMsg(5, sign(stranger, good), "gs-99"), "gs-99") is None
    assert net.sat.drops[-1][0] == "unknown-sender"
    other = key_verify_payload(b"another key", 5)
    assert handle_key_verify(net.sat, KeyVerifyMsg(5, sign(gs.keypair, other), "gs-00"), "gs-00") is None
    assert net.sat.drops[-1][0] == "bad-signature"
    assert net.sat.log == []


def test_hello_rejections(net):
    stranger = generate_keypair("ecc-p256-class", "stranger")
    assert handle_hello(net.sat, HelloMsg(b"n" * 16, "gs-99", sign(stranger, hello_payload(b"n" * 16))), 0) is None
    assert net.sat.drops[-1][0] == "unknown-sender"
    forged = HelloMsg(b"n" * 16, "gs-00", sign(stranger, hello_payload(b"n" * 16)))
    assert handle_hello(net.sat, forged, 0) is None
    assert net.sat.drops[-1][0] == "bad-signature"


def test_pre_genesis_drops(net):
    sat = new_satellite("s2", net.suite, net.registry, net.params, ("a", "b"))
    gs = net.gs["gs-00"]
    assert handle_hello(sat, initiate_hello(gs, "s2", 0, net.rng), 0) is None
    assert sat.drops[-1][0] == "pre-genesis"
    with pytest.raises(SeapError):
        issue_eat(sat, b"n", 0)
    with pytest.raises(NotCertifiedError):
        broadcast_cert(sat)


def test_boot_twice_refused(net):
    with pytest.raises(SeapError):
        on_boot(net.sat, random.Random(0))


def test_degraded_boot_and_both_failed(make_net):
    net = make_net(failed=(1,), degraded_ok=True)
    assert net.sat.degraded
    ack = handle_hello(net.sat, initiate_hello(net.gs["gs-00"], "sat", 0, net.rng), 1)
    assert ack.degraded and ack.vk_trop is None
    rng = random.Random(3)
    sat = new_satellite("s3", net.suite, net.registry, net.params, (make_serial(rng), make_serial(rng)))
    for se in sat.elements:
        se.fail()
    with pytest.raises(BothElementsFailedError):
        on_boot(sat, rng)


def test_eat_heartbeat_and_counters(net):
    before = [se.monotonic_counter for se in net.sat.elements]
    t1 = issue_eat(net.sat, b"a" * 16, 10)
    t2 = issue_eat(net.sat, b"b" * 16, 20)
    assert t2.heartbeat == t1.heartbeat + 1
    after = [se.monotonic_counter for se in net.sat.elements]
    assert all(a == b + 2 for a, b in zip(after, before))
    net.sat.se_nxp.fail()
    t3 = issue_eat(net.sat, b"c" * 16, 30)
    assert t3.sig_nxp is None and t3.sig_trop is not None
    net.sat.se_trop.fail()
    with pytest.raises(BothElementsFailedError):
        issue_eat(net.sat, b"d" * 16, 40)
