import random
from dataclasses import replace

import pytest

from seap.crypto import make_serial
from seap.errors import GenesisConflictError, MalformedMessageError, PolicyFlagMissingError, SerialMismatchError
from seap.ground_station import (
    REJECT_REASONS,
    Verdict,
    appraise_eat,
    genesis_bootstrap,
    handle_cert,
    handle_hello_ack,
    initiate_hello,
    verify_certificate,
)
from seap.messages import decode, encode, new_nonce
from seap.satellite import genesis_evidence, handle_hello, handle_key_verify, issue_eat, new_satellite, on_boot


def ack_for(net, gs_id="gs-00", sat=None, t=0):
    gs = net.gs[gs_id]
    hello = initiate_hello(gs, "sat", t, net.rng)
    return gs, handle_hello(sat or net.sat, hello, t + 5)


def clone_of(net, serials=None):
    rng = random.Random("clone")
    clone = new_satellite("clone", net.suite, net.registry, net.params, serials or (make_serial(rng), make_serial(rng)))
    on_boot(clone, rng)
    return clone


def test_honest_ack_endorsed(net):
    gs, ack = ack_for(net)
    kv = handle_hello_ack(gs, ack, 100)
    assert kv is not None and kv.timestamp == 100 and kv.gs_id == "gs-00"
    assert gs.sessions == {}


def test_session_expires_at_window(net):
    gs, ack = ack_for(net)
    assert handle_hello_ack(gs, ack, net.params.window_ms) is None
    assert gs.drops[-1][0] == "session-expired"
    gs, ack = ack_for(net, "gs-01")
    assert handle_hello_ack(gs, ack, net.params.window_ms - 1) is not None


def test_unknown_session_and_replay(net):
    gs, ack = ack_for(net)
    assert handle_hello_ack(gs, ack, 10) is not None
    assert handle_hello_ack(gs, ack, 11) is None
    assert gs.drops[-1][0] == "unknown-session"


@pytest.mark.parametrize("copy_serials,reason", [(False, "serial-mismatch"), (True, "quote-signature")])
def test_clone_rejected_with_identity_checks(net, copy_serials, reason):
    clone = clone_of(net, net.sat.serials if copy_serials else None)
    gs, ack = ack_for(net, sat=clone)
    assert handle_hello_ack(gs, ack, 10) is None
    assert gs.drops[-1][0] == reason


def test_clone_accepted_without_identity_checks(net):
    clone = clone_of(net)
    gs, ack = ack_for(net, sat=clone)
    gs.policy = replace(gs.policy, identity_checks=False)
    assert handle_hello_ack(gs, ack, 10) is not None


def test_measurement_mismatch(net):
    gs, ack = ack_for(net)
    gs.policy = replace(gs.policy, reference_measurement=b"\1" * 32)
    assert handle_hello_ack(gs, ack, 10) is None
    assert gs.drops[-1][0] == "measurement-mismatch"


def test_degraded_ack_policy(make_net):
    strict = make_net(failed=(0,), degraded_ok=True)
    gs, ack = ack_for(strict)
    assert handle_hello_ack(gs, ack, 10) is not None
    gs, ack = ack_for(strict, "gs-01")
    gs.policy = replace(gs.policy, degraded_mode_allowed=False)
    assert handle_hello_ack(gs, ack, 10) is None
    assert gs.drops[-1][0] == "degraded-not-allowed"


# --- EAT appraisal ---


def test_eat_accept_and_reasons(net):
    nonce = new_nonce(net.rng)
    token = issue_eat(net.sat, nonce, 100)
    assert appraise_eat(net.policy, token, nonce, 150).verdict is Verdict.ACCEPT
    cases = {
        "stale-nonce": dict(expected_nonce=b"x" * 16),
        "nonce-expired": dict(now=100 + net.policy.nonce_ttl_ms),
    }
    for reason, kw in cases.items():
        args = dict(expected_nonce=nonce, now=150) | kw
        got = appraise_eat(net.policy, token, args["expected_nonce"], args["now"])
        assert (got.verdict, got.reason) == (Verdict.REJECT, reason)
    assert appraise_eat(replace(net.policy, reference_measurement=b"\0" * 32), token, nonce, 150).reason == "measurement-mismatch"
    assert appraise_eat(replace(net.policy, registered_serials=("a", "b")), token, nonce, 150).reason == "serial-mismatch"
    assert appraise_eat(replace(net.policy, registered_attestation_keys=None), token, nonce, 150).reason == "keys-unpinned"
    bad = replace(token, heartbeat=token.heartbeat + 1)
    assert appraise_eat(net.policy, bad, nonce, 150).reason == "bad-signature"
    for r in ("stale-nonce", "nonce-expired", "bad-signature"):
        assert r in REJECT_REASONS


def test_eat_degraded(net):
    net.sat.se_trop.fail()
    nonce = new_nonce(net.rng)
    token = issue_eat(net.sat, nonce, 0)
    assert appraise_eat(net.policy, token, nonce, 1).reason == "missing-anchor"
    assert appraise_eat(replace(net.policy, degraded_mode_allowed=True), token, nonce, 1).verdict is Verdict.ACCEPT_DEGRADED


def test_eat_from_clone_rejected(net):
    clone = clone_of(net, net.sat.serials)
    nonce = new_nonce(net.rng)
    assert appraise_eat(net.policy, issue_eat(clone, nonce, 0), nonce, 1).reason == "bad-signature"


# --- genesis bootstrap ---


def test_bootstrap_pins_once(net):
    ev = genesis_evidence(net.sat, new_nonce(net.rng), 0)
    with pytest.raises(GenesisConflictError):
        genesis_bootstrap(net.policy, ev.token, ev.slot_reports)
    fresh = replace(net.policy, registered_attestation_keys=None)
    pinned = genesis_bootstrap(fresh, ev.token, ev.slot_reports)
    assert pinned.registered_attestation_keys == net.policy.registered_attestation_keys


def test_bootstrap_rejects_wrong_serials(net):
    clone = clone_of(net)
    ev = genesis_evidence(clone, new_nonce(net.rng), 0)
    with pytest.raises(SerialMismatchError):
        genesis_bootstrap(replace(net.policy, registered_attestation_keys=None), ev.token, ev.slot_reports)


def test_bootstrap_requires_policy_flags(net):
    ev = genesis_evidence(net.sat, new_nonce(net.rng), 0)
    reports = tuple(replace(r, policy_flags=("origin-internal",)) for r in ev.slot_reports)
    with pytest.raises(PolicyFlagMissingError):
        genesis_bootstrap(replace(net.policy, registered_attestation_keys=None), ev.token, reports)


# --- certificates ---


def certified(net):
    cert = None
    for i, g in enumerate(net.ids[: net.params.threshold]):
        gs, ack = ack_for(net, g, t=100 * i)
        cert = handle_key_verify(net.sat, handle_hello_ack(gs, ack, 100 * i + 20), g)
    assert cert is not None
    return cert


def test_cert_accepted_and_byte_flips_rejected(net):
    cert = certified(net)
    assert handle_cert(net.gs["gs-04"], cert)
    args = (net.registry, net.params.threshold, net.params.window_ms, net.policy)
    assert verify_certificate(cert, *args)
    data = encode(cert)
    rng = random.Random(5)
    for pos in rng.sample(range(len(data)), 300):
        mutated = bytearray(data)
        mutated[pos] ^= 1 << rng.randrange(8)
        try:
            other = decode(bytes(mutated))
        except MalformedMessageError:
            continue
        assert not verify_certificate(other, *args), pos
