"""Attack procedures that do not need the full event engine, plus attack helpers.

The channel-hop schedule is replayed by driving the agents with exact
timestamps; posterior corruption and genesis cloning are key-lifecycle
attacks with no link-level component.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional

from ..committee import (
    Committee,
    CommitteeChain,
    next_committee,
    prepare_rotation,
    propose_and_sign_handover,
    satellite_update_committee,
    verify_handover_chain,
)
from ..config import ScenarioConfig
from ..crypto import KeyRegistry, generate_keypair, get_suite, make_serial, registry_from_keys, sign
from ..errors import AssumptionGuardError, DeletedKeyError, InvalidHandoverError, SeapError
from ..ground_station import (
    GsState,
    VerifierPolicy,
    appraise_eat,
    genesis_bootstrap,
    handle_hello_ack,
    initiate_hello,
)
from ..messages import HandoverCertificate, Member, SignerEntry, handover_body, new_nonce
from ..satellite import (
    ProtocolParams,
    SatelliteState,
    genesis_evidence,
    handle_hello,
    handle_key_verify,
    issue_eat,
    new_satellite,
    on_boot,
)
from .channel import ChannelState
from .trace import EventTrace
from .world import Metrics, Outcome, ScenarioResult, max_window_yield, run_protocol

# --- channel hopping ---------------------------------------------------------------


@dataclass
class ChannelHopResult:
    channels: ChannelState
    earth_endorsements: list[tuple[int, str]]
    window_yield: int
    certified: bool
    threshold: int
    trace: EventTrace = field(default_factory=EventTrace)


def _hop_world(seed: int, n: int, window_ms: int, params: ProtocolParams):
    suite = get_suite("ecc-p256-class")
    ids = [f"gs-{i:02d}" for i in range(n)]
    keys = [(g, generate_keypair(suite, f"{seed}/hop/{g}")) for g in ids]
    registry = registry_from_keys(keys)
    rng = random.Random(f"{seed}/hop")
    earth = new_satellite("earth-tee", suite, registry, params, (make_serial(rng), make_serial(rng)))
    on_boot(earth, rng)
    # Plain protocol without hardware pinning: the clone is indistinguishable.
    policy = VerifierPolicy(earth.measurement_hash, ("", ""), identity_checks=False)
    stations = {g: GsState(g, kp, registry, policy, window_ms) for g, kp in keys}
    return earth, stations, rng


def channel_hop_attack(
    window_ms: int = 6000,
    t_ch: int = 1,
    t_gs: int = 0,
    t0: int = 0,
    threshold: Optional[int] = None,
    seed: int = 0,
) -> ChannelHopResult:
    """Corrupt t_ch channels for [t0, t0+W), then t_ch fresh channels for [t0+W, t0+2W).

    Honest stations behind the corrupted channels each run one exchange with
    the Earth clone, the first wave endorsing at t0 + W/2 and the second at
    t0 + 7W/6, so all endorsements fall inside one window.
    """
    params = ProtocolParams(t_gs, t_ch, window_ms, threshold_override=threshold)
    n = max(2 * t_ch, 1) + 1
    earth, stations, rng = _hop_world(seed, n, window_ms, params)
    trace = EventTrace()
    channels = ChannelState(window_ms, t_ch)
    waves = [(t0, t0 + window_ms // 2), (t0 + window_ms, t0 + window_ms + window_ms // 6)]
    ids = sorted(stations)
    certified = False
    for w, (start, endorse_at) in enumerate(waves):
        for k in range(t_ch):
            gs_id = ids[w * t_ch + k]
            channels.add(gs_id, start, start + window_ms)
            trace.add(start, "corrupt-channel", gs_id=gs_id, start_ms=start, end_ms=start + window_ms)
            gs = stations[gs_id]
            hello_at = endorse_at - 200
            hello = initiate_hello(gs, "satellite", hello_at, rng)
            trace.add(hello_at, "intercept", gs_id=gs_id, kind="hello")
            ack = handle_hello(earth, hello, hello_at)
            kv = handle_hello_ack(gs, ack, endorse_at)
            if kv is None or not channels.is_corrupted(gs_id, endorse_at):
                raise RuntimeError(f"hop exchange with {gs_id} did not complete on the corrupted channel")
            trace.add(endorse_at, "endorse", gs_id=gs_id, ts=kv.timestamp, target="earth-tee", channel_corrupted=True)
            certified = handle_key_verify(earth, kv, gs_id) is not None or certified
    points = [(r.ts, r.gs_id) for r in earth.log]
    return ChannelHopResult(channels, points, max_window_yield(points, window_ms), certified, params.threshold, trace)


# --- relay and man-in-the-middle ---------------------------------------------------------


def relay_attack(identity_checks: bool, seed: int = 0, base: Optional[ScenarioConfig] = None) -> ScenarioResult:
    """Satellite host forwards every ground-station message to an Earth clone."""
    from .scenarios import gallery_config

    cfg = base or gallery_config("relay-on" if identity_checks else "relay-off")
    adversary = replace(cfg.adversary, strategy="relay", identity_checks=identity_checks)
    return run_protocol(replace(cfg, seed=seed, adversary=adversary))


def mitm_block(override: bool, seed: int = 0, base: Optional[ScenarioConfig] = None) -> ScenarioResult:
    """Corrupt every channel at once; refused unless the t_ch bound is explicitly waived."""
    from .scenarios import gallery_config

    cfg = base or gallery_config("mitm-all")
    if not override:
        raise AssumptionGuardError("corrupting all channels violates the t_ch bound; pass override=True")
    adversary = replace(cfg.adversary, strategy="mitm-clone", all_channels=True, allow_tch_violation=True)
    return run_protocol(replace(cfg, seed=seed, adversary=adversary))


# --- posterior corruption ------------------------------------------------------------


def _stations(suite, ids, seed, epoch, policy, window_ms):
    return [
        GsState(g, generate_keypair(suite, f"{seed}/e{epoch}/{g}"), KeyRegistry(), policy, window_ms, epoch=epoch)
        for g in ids
    ]


def posterior_corruption(cfg: ScenarioConfig) -> ScenarioResult:
    """Committees hand over epoch by epoch; afterwards the adversary corrupts every
    station that ever served and tries to sign an alternative handover for each
    past epoch it used to control."""
    suite = get_suite(cfg.suite)
    trace = EventTrace()
    sizes = list(cfg.epochs) or [3 * cfg.n_gs]
    policy = VerifierPolicy(b"\0" * 32, ("", ""))
    rng = random.Random(f"{cfg.seed}/posterior")
    genesis_ids = [f"gs-{i:02d}" for i in range(cfg.n_gs)]
    states = {s.gs_id: s for s in _stations(suite, genesis_ids, cfg.seed, 0, policy, cfg.window_ms)}
    genesis = Committee.from_states(0, states.values(), cfg.t_percent)
    chain = CommitteeChain([genesis], [])
    # Key objects registered per epoch; destroying a handle is visible through them.
    held = [{g: states[g].keypair for g in genesis_ids}]
    trace.add(0, "committee", epoch=0, members=genesis.n, t_gs=genesis.t_gs)

    current, t, next_id = genesis, 0, cfg.n_gs
    for size in sizes:
        t += 1
        epoch = current.epoch + 1
        stay = sorted(rng.sample(current.ids(), rng.randint(0, min(size, current.n) - 1)))
        fresh = [f"gs-{i:02d}" for i in range(next_id, next_id + size - len(stay))]
        next_id += len(fresh)
        for s in _stations(suite, fresh, cfg.seed, epoch, policy, cfg.window_ms):
            states[s.gs_id] = s
        members = []
        for g in stay + fresh:
            if g in stay and cfg.key_rotation:
                members.append(prepare_rotation(states[g], f"{cfg.seed}/rotate/{g}/{epoch}"))
            else:
                members.append(Member(g, states[g].public_key))
        signers = [states[g] for g in current.ids()]
        handover = propose_and_sign_handover(current, members, signers, rotate=cfg.key_rotation)
        if handover is None:
            trace.add(t, "handover-failed", epoch=current.epoch)
            return ScenarioResult(cfg, trace, Metrics(), Outcome("timeout"))
        chain.handovers.append(handover)
        current = next_committee(current, handover)
        chain.epochs.append(current)
        held.append({m.gs_id: states[m.gs_id].keypair for m in current.members})
        trace.add(t, "handover", old_epoch=handover.old_epoch, signers=list(handover.signer_ids), members=current.n,
                  continuing=len(stay))

    t += 1
    for g in sorted(states):
        trace.add(t, "corrupt-gs", gs_id=g)
    honest_chain_ok = verify_handover_chain(chain, genesis)
    forged_total, refused_total, breaches = 0, 0, []
    for committee in chain.epochs[:-1]:
        e = committee.epoch
        evil = tuple(
            Member(f"evil-{e}-{i}", generate_keypair(suite, f"{cfg.seed}/evil/{e}/{i}").public_key) for i in range(3)
        )
        body = handover_body(e, evil)
        entries, refused = [], 0
        for g in committee.ids():
            try:
                entries.append(SignerEntry(g, sign(held[e][g], body)))
            except DeletedKeyError:
                refused += 1
        forged = HandoverCertificate(e, evil, tuple(entries))
        forged_chain = CommitteeChain(chain.epochs[: e + 1], chain.handovers[:e] + [forged])
        forged_chain_ok = verify_handover_chain(forged_chain, genesis)
        # A satellite whose trust store still holds epoch e.
        params = ProtocolParams(committee.t_gs, cfg.t_ch, cfg.window_ms, cfg.t_percent)
        stale = new_satellite(f"stale-sat-{e}", suite, committee.registry(), params, (make_serial(rng), make_serial(rng)))
        try:
            satellite_update_committee(stale, forged)
            stale_accepted = True
        except InvalidHandoverError:
            stale_accepted = False
        trace.add(t, "forgery-attempt", epoch=e, signatures=len(entries), deleted_keys=refused,
                  forged_chain_valid=forged_chain_ok, stale_satellite_accepted=stale_accepted)
        forged_total += len(entries)
        refused_total += refused
        if forged_chain_ok or stale_accepted:
            breaches.append(e)
    trace.add(t, "verdict", honest_chain_valid=honest_chain_ok, breached_epochs=breaches)
    outcome = Outcome("attack-succeeded" if breaches else "attack-failed")
    extra = {
        "deleted_keys": refused_total,
        "forged_signatures": forged_total,
        "honest_chain_valid": honest_chain_ok,
        "breached_epochs": breaches,
        "epochs": len(chain.epochs),
    }
    return ScenarioResult(cfg, trace, Metrics(), outcome, extra)


# --- genesis cloning --------------------------------------------------------------------


def genesis_clone(cfg: ScenarioConfig) -> ScenarioResult:
    """A software clone runs its own key genesis and tries to pass as the launched device."""
    suite = get_suite(cfg.suite)
    trace = EventTrace()
    rng = random.Random(f"{cfg.seed}/genesis-clone")
    ids = [f"gs-{i:02d}" for i in range(cfg.n_gs)]
    keys = [(g, generate_keypair(suite, f"{cfg.seed}/gs/{g}")) for g in ids]
    registry = registry_from_keys(keys)
    params = ProtocolParams(cfg.t_gs, cfg.t_ch, cfg.window_ms, cfg.t_percent)
    real = new_satellite("satellite", suite, registry, params, (make_serial(rng), make_serial(rng)))
    on_boot(real, rng)
    base = VerifierPolicy(real.measurement_hash, real.serials, nonce_ttl_ms=cfg.window_ms)
    nonce = new_nonce(rng)
    evidence = genesis_evidence(real, nonce, 0)
    pinned = genesis_bootstrap(base, evidence.token, evidence.slot_reports)
    trace.add(0, "genesis", holder="satellite", serials=list(real.serials))

    accepted: list[str] = []

    def attempt(label: str, clone: SatelliteState, t: int, verifiers) -> None:
        ev = genesis_evidence(clone, new_nonce(rng), t)
        for name, policy in verifiers:
            try:
                genesis_bootstrap(policy, ev.token, ev.slot_reports)
                accepted.append(f"{label}/{name}/bootstrap")
                trace.add(t, "clone-accepted", clone=label, check=f"{name}-bootstrap")
            except SeapError as exc:
                trace.add(t, "clone-rejected", clone=label, check=f"{name}-bootstrap", reason=type(exc).__name__)
        challenge = new_nonce(rng)
        verdict = appraise_eat(pinned, issue_eat(clone, challenge, t), challenge, t)
        trace.add(t, "clone-" + ("accepted" if verdict.accepted else "rejected"), clone=label, check="eat", reason=verdict.reason)
        if verdict.accepted:
            accepted.append(f"{label}/eat")
        gs = GsState(ids[0], keys[0][1], registry, pinned, cfg.window_ms)
        ack = handle_hello(clone, initiate_hello(gs, "satellite", t, rng), t)
        kv = handle_hello_ack(gs, ack, t + 100) if ack is not None else None
        reason = gs.drops[-1][0] if gs.drops else None
        trace.add(t, "clone-" + ("accepted" if kv else "rejected"), clone=label, check="hello-ack", reason=reason)
        if kv is not None:
            accepted.append(f"{label}/hello-ack")
        clone_keys = {k.public_key for k in clone.identity_keys + clone.attestation_keys if k}
        distinct = clone_keys.isdisjoint({k.public_key for k in real.identity_keys + real.attestation_keys if k})
        trace.add(t, "clone-keys", clone=label, distinct_from_real=distinct)

    own = new_satellite("clone-own-serials", suite, registry, params, (make_serial(rng), make_serial(rng)))
    on_boot(own, rng)
    attempt("own-serials", own, 1000, (("fresh-verifier", base), ("pinned-verifier", pinned)))
    # A clone that copies the public serial strings still generates different
    # keys; verifiers that already pinned the launched chips reject it.
    copied = new_satellite("clone-copied-serials", suite, registry, params, real.serials)
    on_boot(copied, rng)
    attempt("copied-serials", copied, 2000, (("pinned-verifier", pinned),))
    outcome = Outcome("attack-succeeded" if accepted else "attack-failed")
    return ScenarioResult(cfg, trace, Metrics(), outcome, {"accepted": accepted})
