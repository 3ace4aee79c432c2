"""Event-driven run of one scenario: satellite, ground stations, links and adversary."""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Optional

from ..config import ScenarioConfig
from ..crypto import generate_keypair, get_suite, make_serial, registry_from_keys, sign
from ..errors import ConfigError, SeapError
from ..ground_station import (
    GsState,
    VerifierPolicy,
    genesis_bootstrap,
    handle_cert,
    handle_hello_ack,
    initiate_hello,
)
from ..messages import (
    CertificateOfAuthorization,
    HelloAckMsg,
    HelloMsg,
    KeyVerifyMsg,
    frame_size,
    key_verify_payload,
    kind_of,
    new_nonce,
)
from ..perf import GS_VERIFY_MS
from ..satellite import (
    Phase,
    ProtocolParams,
    SatelliteState,
    broadcast_cert,
    genesis_evidence,
    handle_hello,
    handle_key_verify,
    new_satellite,
    on_boot,
)
from .adversary import USES_EARTH_TEE, Adversary
from .channel import ChannelState, Interval, random_hop_schedule
from .engine import SimClock
from .schedule import ContactSchedule, Pass, build_schedule
from .trace import EventTrace

SAT = "satellite"
EARTH = "earth-tee"
GRACE_MS = 1000


@dataclass(frozen=True)
class Outcome:
    kind: str
    time_ms: Optional[int] = None

    def __str__(self) -> str:
        return f"{self.kind}({self.time_ms})" if self.time_ms is not None else self.kind


@dataclass(frozen=True)
class Provenance:
    gs_id: str
    ts: int
    target: str
    gs_corrupted: bool
    channel_corrupted: bool
    forged: bool = False

    @property
    def honest_clean(self) -> bool:
        return not (self.gs_corrupted or self.channel_corrupted)

    def to_dict(self) -> dict:
        return {
            "gs_id": self.gs_id,
            "ts": self.ts,
            "target": self.target,
            "gs_corrupted": self.gs_corrupted,
            "channel_corrupted": self.channel_corrupted,
            "forged": self.forged,
        }


@dataclass
class Exchange:
    xid: int
    gs_id: str
    start_ms: int
    target: str = SAT
    bytes: int = 0
    end_ms: Optional[int] = None

    @property
    def duration_ms(self) -> Optional[int]:
        return None if self.end_ms is None else self.end_ms - self.start_ms


@dataclass
class Metrics:
    satellite_cert_ms: Optional[int] = None
    earth_cert_ms: Optional[int] = None
    orbit_period_ms: int = 0
    exchanges: list[Exchange] = field(default_factory=list)
    endorsements: list[Provenance] = field(default_factory=list)
    cert_signers: list[Provenance] = field(default_factory=list)
    earth_cert_signers: list[Provenance] = field(default_factory=list)
    drops: Counter = field(default_factory=Counter)
    sessions: Counter = field(default_factory=Counter)
    gs_cert_accepted: int = 0
    max_corrupted_channel_yield: int = 0

    @property
    def time_to_cert_ms(self) -> Optional[int]:
        return self.satellite_cert_ms

    @property
    def hours_to_cert(self) -> Optional[float]:
        return None if self.satellite_cert_ms is None else self.satellite_cert_ms / 3_600_000

    @property
    def orbits_to_cert(self) -> Optional[int]:
        if self.satellite_cert_ms is None or not self.orbit_period_ms:
            return None
        return self.satellite_cert_ms // self.orbit_period_ms + 1

    def completed(self, target: str = SAT) -> list[Exchange]:
        return [x for x in self.exchanges if x.end_ms is not None and x.target == target]


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trace: EventTrace
    metrics: Metrics
    outcome: Outcome
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def expected(self) -> str:
        return self.config.expected()

    @property
    def as_expected(self) -> bool:
        if self.outcome.kind != self.expected:
            return False
        hours = self.config.expected_hours
        if hours is not None:
            h = self.metrics.hours_to_cert
            return h is not None and hours[0] <= h <= hours[1]
        return True


def max_window_yield(points: list[tuple[int, str]], window_ms: int) -> int:
    """Largest number of distinct stations among points whose timestamps fit in one window."""
    points = sorted(points)
    best = 0
    for i, (start, _) in enumerate(points):
        ids = {g for ts, g in points[i:] if ts - start < window_ms}
        best = max(best, len(ids))
    return best


class World:
    def __init__(self, cfg: ScenarioConfig):
        cfg.validate()
        self.cfg = cfg
        seed = cfg.seed
        self.rng_keys = random.Random(f"{seed}/keys")
        self.rng_nonce = random.Random(f"{seed}/nonce")
        self.rng_link = random.Random(f"{seed}/link")
        self.rng_cpu = random.Random(f"{seed}/cpu")
        self.rng_adv = random.Random(f"{seed}/adversary")
        self.clock = SimClock()
        self.trace = EventTrace()
        self.metrics = Metrics()
        self.suite = get_suite(cfg.suite)
        self.gs_ids = [f"gs-{i:02d}" for i in range(cfg.n_gs)]
        self.done = False
        self._xids = itertools.count(1)
        self.exchanges: dict[int, Exchange] = {}
        self.provenance: dict[tuple[str, int, str], Provenance] = {}
        self.prop: dict[tuple[str, int], int] = {}
        self.outbox: dict[str, CertificateOfAuthorization] = {}

        self.params = ProtocolParams(cfg.t_gs, cfg.t_ch, cfg.window_ms, cfg.t_percent, cfg.threshold_override)
        keys = [(g, generate_keypair(self.suite, f"{seed}/gs/{g}")) for g in self.gs_ids]
        self.registry = registry_from_keys(keys)
        self.sat = self._boot_satellite(SAT, (make_serial(self.rng_keys), make_serial(self.rng_keys)))
        base = VerifierPolicy(
            reference_measurement=self.sat.measurement_hash,
            registered_serials=self.sat.serials,
            nonce_ttl_ms=cfg.window_ms,
            degraded_mode_allowed=cfg.degraded_mode_allowed,
            identity_checks=cfg.adversary.identity_checks,
        )
        nonce = new_nonce(self.rng_nonce, cfg.nonce_bits)
        evidence = genesis_evidence(self.sat, nonce, 0)
        try:
            self.policy = genesis_bootstrap(base, evidence.token, evidence.slot_reports)
            self.trace.add(0, "genesis", serials=list(self.sat.serials), degraded=self.sat.degraded)
        except SeapError as exc:
            # Verifiers keep an unpinned policy and will refuse every quote.
            self.policy = base
            self.trace.add(0, "genesis-rejected", serials=list(self.sat.serials), reason=type(exc).__name__)

        self.skew = {g: self.rng_link.randint(-cfg.clock_skew_ms, cfg.clock_skew_ms) for g in self.gs_ids}
        self.gs = {
            g: GsState(g, kp, self.registry, self.policy, cfg.window_ms, nonce_bits=cfg.nonce_bits) for g, kp in keys
        }
        self.schedule: ContactSchedule = build_schedule(
            cfg.schedule, self.gs_ids, cfg.deadline_ms, random.Random(f"{seed}/schedule")
        )
        self.metrics.orbit_period_ms = cfg.schedule.orbit_period_ms if cfg.schedule.template == "leo" else 0
        self.adv = Adversary(cfg.adversary, self._channels(), self.rng_adv)
        self.earth: Optional[SatelliteState] = None
        if cfg.adversary.strategy in USES_EARTH_TEE:
            clone_rng = random.Random(f"{seed}/clone")
            self.earth = self._boot_satellite(EARTH, (make_serial(clone_rng), make_serial(clone_rng)), clone_rng)
        self._schedule_adversary()
        for p in self.schedule.passes:
            if p.start_ms <= cfg.deadline_ms:
                self.clock.schedule_at(p.start_ms, self._start_pass, p)

    # --- setup ---------------------------------------------------------------------

    def _boot_satellite(self, sat_id: str, serials, rng: Optional[random.Random] = None) -> SatelliteState:
        sat = new_satellite(sat_id, self.suite, self.registry, self.params, serials)
        if sat_id == SAT:
            for name in self.cfg.failed_elements:
                (sat.se_nxp if name == "closed-anchor" else sat.se_trop).fail()
        on_boot(sat, rng or self.rng_keys)
        return sat

    def _channels(self) -> ChannelState:
        adv = self.cfg.adversary
        W, horizon = self.cfg.window_ms, self.cfg.deadline_ms
        if adv.all_channels:
            limit = self.cfg.n_gs if adv.allow_tch_violation else self.cfg.t_ch
            state = ChannelState(W, limit)
            for g in self.gs_ids:
                state.add(g, 0, max(horizon + 1, W))
            return state
        if adv.random_channels:
            return random_hop_schedule(self.gs_ids, W, self.cfg.t_ch, horizon, random.Random(f"{self.cfg.seed}/channels"))
        state = ChannelState(W, self.cfg.t_ch)
        for g, s, e in adv.channel_intervals:
            if g not in self.gs_ids:
                raise ConfigError(f"channel interval names unknown station {g}")
            state.add(g, s, e)
        return state

    def _schedule_adversary(self) -> None:
        adv = self.cfg.adversary
        for iv in self.adv.channels.intervals:
            if iv.start_ms <= self.cfg.deadline_ms:
                self.clock.schedule_at(iv.start_ms, self._channel_event, "corrupt-channel", iv)
            if iv.end_ms <= self.cfg.deadline_ms:
                self.clock.schedule_at(iv.end_ms, self._channel_event, "release-channel", iv)
        plan = list(adv.corrupted_gs)
        if adv.random_corruptions:
            listed = {g for g, _ in plan}
            pool = [g for g in self.gs_ids if g not in listed]
            for g in self.rng_adv.sample(pool, adv.random_corruptions):
                plan.append((g, self.rng_adv.randrange(0, max(1, self.cfg.deadline_ms))))
        for g, at in plan:
            if g not in self.gs_ids:
                raise ConfigError(f"corrupted_gs names unknown station {g}")
            self.clock.schedule_at(max(0, at), self._corrupt_gs, g)

    # --- helpers ---------------------------------------------------------------------

    def gs_now(self, gs_id: str) -> int:
        return self.clock.now + self.skew[gs_id]

    def _send_record(self, src: str, dst: str, msg, xid: Optional[int]) -> int:
        size = frame_size(msg)
        if xid is not None and xid in self.exchanges:
            self.exchanges[xid].bytes += size
        self.trace.add(self.clock.now, "send", src=src, dst=dst, kind=kind_of(msg).value, bytes=size, xid=xid)
        return size

    def _drop(self, reason: str, where: str, msg, xid: Optional[int]) -> None:
        self.metrics.drops[reason] += 1
        self.trace.add(self.clock.now, "drop", reason=reason, at=where, kind=kind_of(msg).value, xid=xid)

    def _arrival(self, gs_id: str, t: int, extra_ms: int = 0) -> Optional[int]:
        p = self.schedule.pass_at(gs_id, t)
        if p is None:
            return None
        arrive = t + extra_ms + self.prop.get((gs_id, p.start_ms), 0)
        return arrive if arrive < p.end_ms else None

    def _cpu_ms(self) -> int:
        lo, hi = self.suite.sign_latency_ms
        ops = [self.rng_cpu.randint(lo, hi) for _ in range(4)]
        if self.cfg.parallel_se and self.suite.parallel_capable:
            return max(ops[0] + ops[1], ops[2] + ops[3])
        return sum(ops)

    # --- adversary events --------------------------------------------------------

    def _channel_event(self, event: str, iv: Interval) -> None:
        self.trace.add(self.clock.now, event, gs_id=iv.gs_id, start_ms=iv.start_ms, end_ms=iv.end_ms)

    def _corrupt_gs(self, gs_id: str) -> None:
        if gs_id in self.adv.corrupted:
            return
        self.adv.corrupted[gs_id] = self.clock.now
        self.trace.add(self.clock.now, "corrupt-gs", gs_id=gs_id)
        if self.earth is not None:
            stamps = {self.gs_now(gs_id)} | {p.ts for p in self.metrics.endorsements if p.target == EARTH and not p.forged}
            for ts in sorted(stamps):
                self._forge(gs_id, ts)

    def _forge(self, gs_id: str, ts: int) -> None:
        """A corrupted station signs an endorsement for the clone with a chosen timestamp."""
        earth = self.earth
        if earth is None or earth.phase is Phase.CERTIFIED or self.done:
            return
        sig = sign(self.gs[gs_id].keypair, key_verify_payload(earth.vk_s, ts))
        prov = Provenance(gs_id, ts, EARTH, True, False, forged=True)
        self._note_endorsement(prov)
        cert = handle_key_verify(earth, KeyVerifyMsg(ts, sig, gs_id), gs_id)
        if cert is not None:
            self._on_earth_cert(cert)

    # --- ground-station side ---------------------------------------------------------

    def _start_pass(self, p: Pass) -> None:
        lo, hi = self.cfg.schedule.one_way_ms()
        self.prop[(p.gs_id, p.start_ms)] = self.rng_link.randint(lo, hi)
        self.trace.add(self.clock.now, "pass", gs_id=p.gs_id, duration_ms=p.duration_ms)
        if p.gs_id in self.outbox:
            self._downlink_from_sat(p.gs_id, self.outbox.pop(p.gs_id), None)
        self._open_session(p.gs_id, p)

    def _open_session(self, gs_id: str, p: Pass) -> None:
        if self.done or self.clock.now >= p.end_ms:
            return
        state = self.gs[gs_id]
        silent = self.adv.is_corrupted(gs_id) and self.cfg.adversary.corrupted_behavior == "silent"
        if state.received_cert is None and not silent:
            state.expire_sessions(self.gs_now(gs_id))
            hello = initiate_hello(state, SAT, self.gs_now(gs_id), self.rng_nonce)
            xid = next(self._xids)
            self.exchanges[xid] = Exchange(xid, gs_id, self.clock.now)
            self.metrics.sessions[gs_id] += 1
            self._uplink(gs_id, hello, xid)
        if self.clock.now + self.cfg.window_ms < p.end_ms:
            self.clock.schedule(self.cfg.window_ms, self._open_session, gs_id, p)

    def _gs_receive(self, gs_id: str, msg, xid: Optional[int]) -> None:
        self.trace.add(self.clock.now, "deliver", dst=gs_id, kind=kind_of(msg).value, xid=xid)
        if isinstance(msg, HelloAckMsg):
            delay = self.rng_cpu.randint(*GS_VERIFY_MS)
            self.clock.schedule(delay, self._gs_process_ack, gs_id, msg, xid)
        elif isinstance(msg, CertificateOfAuthorization):
            ok = handle_cert(self.gs[gs_id], msg)
            self.metrics.gs_cert_accepted += ok
            self.trace.add(self.clock.now, "cert-accepted" if ok else "cert-rejected", gs_id=gs_id)

    def _gs_process_ack(self, gs_id: str, msg: HelloAckMsg, xid: Optional[int]) -> None:
        state = self.gs[gs_id]
        before = len(state.drops)
        kv = handle_hello_ack(state, msg, self.gs_now(gs_id))
        if kv is None:
            reason = state.drops[-1][0] if len(state.drops) > before else "no-endorsement"
            self._drop(reason, gs_id, msg, xid)
            return
        target = EARTH if self.earth is not None and msg.vk_s == self.earth.vk_s else SAT
        if xid in self.exchanges:
            self.exchanges[xid].target = target
        prov = Provenance(
            gs_id,
            kv.timestamp,
            target,
            self.adv.is_corrupted(gs_id),
            self.adv.channels.is_corrupted(gs_id, self.clock.now),
        )
        self._note_endorsement(prov)
        self._uplink(gs_id, kv, xid)

    def _note_endorsement(self, prov: Provenance) -> None:
        self.provenance[(prov.gs_id, prov.ts, prov.target)] = prov
        self.metrics.endorsements.append(prov)
        self.trace.add(self.clock.now, "endorse", **prov.to_dict())

    # --- links -------------------------------------------------------------------------

    def _uplink(self, gs_id: str, msg, xid: Optional[int]) -> None:
        t = self.clock.now
        self._send_record(gs_id, SAT, msg, xid)
        if self.adv.owns_channel(gs_id, t):
            self.trace.add(t, "intercept", gs_id=gs_id, kind=kind_of(msg).value, xid=xid)
            if isinstance(msg, HelloMsg):
                self.clock.schedule(0, self._earth_receive, gs_id, msg, xid)
                return
            if isinstance(msg, KeyVerifyMsg):
                self.clock.schedule(0, self._earth_receive, gs_id, msg, xid)
                if not self.adv.forwards():
                    return
        arrive = self._arrival(gs_id, t)
        if arrive is None:
            self._drop("out-of-contact", gs_id, msg, xid)
            return
        strategy = self.adv.strategy
        if strategy == "block-all":
            self.clock.schedule_at(arrive, self._drop, "host-blocked", SAT, msg, xid)
        elif strategy == "relay":
            self.clock.schedule_at(arrive + self.cfg.adversary.relay_latency_ms, self._earth_receive, gs_id, msg, xid)
        else:
            self.clock.schedule_at(arrive, self._sat_receive, gs_id, msg, xid)

    def _downlink_from_sat(self, gs_id: str, msg, xid: Optional[int]) -> None:
        t = self.clock.now
        self._send_record(SAT, gs_id, msg, xid)
        if self.adv.strategy in ("block-all", "relay"):
            self._drop("host-blocked", SAT, msg, xid)
            return
        if self.adv.owns_channel(gs_id, t):
            self.trace.add(t, "intercept", gs_id=gs_id, kind=kind_of(msg).value, xid=xid)
            if not self.adv.forwards():
                self._drop("adversary-dropped", gs_id, msg, xid)
                return
        arrive = self._arrival(gs_id, t)
        if arrive is None:
            if isinstance(msg, CertificateOfAuthorization):
                self.outbox[gs_id] = msg
            else:
                self._drop("out-of-contact", gs_id, msg, xid)
            return
        self.clock.schedule_at(arrive, self._gs_receive, gs_id, msg, xid)

    def _downlink_from_earth(self, gs_id: str, msg, xid: Optional[int]) -> None:
        t = self.clock.now
        self._send_record(EARTH, gs_id, msg, xid)
        if self.adv.strategy == "relay":
            arrive = self._arrival(gs_id, t, self.cfg.adversary.relay_latency_ms)
        elif self.adv.owns_channel(gs_id, t):
            self.trace.add(t, "inject", gs_id=gs_id, kind=kind_of(msg).value, xid=xid)
            arrive = self._arrival(gs_id, t)
        else:
            arrive = None
        if arrive is None:
            self._drop("no-path", EARTH, msg, xid)
            return
        self.clock.schedule_at(arrive, self._gs_receive, gs_id, msg, xid)

    # --- satellite and clone ---------------------------------------------------------

    def _sat_receive(self, gs_id: str, msg, xid: Optional[int]) -> None:
        self.trace.add(self.clock.now, "deliver", dst=SAT, src=gs_id, kind=kind_of(msg).value, xid=xid)
        if isinstance(msg, HelloMsg):
            ack = handle_hello(self.sat, msg, self.clock.now)
            if ack is None:
                self._drop(self.sat.drops[-1][0], SAT, msg, xid)
                return
            self.clock.schedule(self._cpu_ms(), self._downlink_from_sat, gs_id, ack, xid)
        elif isinstance(msg, KeyVerifyMsg):
            before = len(self.sat.drops)
            cert = handle_key_verify(self.sat, msg, gs_id)
            if len(self.sat.drops) > before:
                self._drop(self.sat.drops[-1][0], SAT, msg, xid)
                return
            x = self.exchanges.get(xid)
            if x is not None and x.target == SAT and x.end_ms is None:
                x.end_ms = self.clock.now
                self.trace.add(self.clock.now, "exchange", gs_id=gs_id, xid=xid, duration_ms=x.duration_ms, bytes=x.bytes)
            if cert is not None:
                self._on_sat_cert(cert)

    def _earth_receive(self, gs_id: str, msg, xid: Optional[int]) -> None:
        earth = self.earth
        if earth is None or self.done:
            return
        self.trace.add(self.clock.now, "deliver", dst=EARTH, src=gs_id, kind=kind_of(msg).value, xid=xid)
        if isinstance(msg, HelloMsg):
            ack = handle_hello(earth, msg, self.clock.now)
            if ack is not None:
                self._downlink_from_earth(gs_id, ack, xid)
        elif isinstance(msg, KeyVerifyMsg):
            before = len(earth.drops)
            cert = handle_key_verify(earth, msg, gs_id)
            if len(earth.drops) > before:
                self._drop(earth.drops[-1][0], EARTH, msg, xid)
                return
            x = self.exchanges.get(xid)
            if x is not None and x.end_ms is None:
                x.end_ms = self.clock.now
            if cert is not None:
                self._on_earth_cert(cert)
                return
            for g in sorted(self.adv.corrupted):
                self._forge(g, msg.timestamp)

    def _signer_provenance(self, cert: CertificateOfAuthorization, target: str) -> list[Provenance]:
        return [self.provenance[(e.gs_id, e.ts, target)] for e in cert.endorsements]

    def _on_sat_cert(self, cert: CertificateOfAuthorization) -> None:
        now = self.clock.now
        self.metrics.satellite_cert_ms = now
        self.metrics.cert_signers = self._signer_provenance(cert, SAT)
        self.trace.add(now, "cert", holder=SAT, signers=cert.signers, span_ms=cert.span_ms)
        for gs_id, c in broadcast_cert(self.sat):
            if self.schedule.in_contact(gs_id, now):
                self._downlink_from_sat(gs_id, c, None)
            else:
                self.outbox[gs_id] = c
        if self.earth is None:
            self.clock.schedule(GRACE_MS, self._finish)

    def _on_earth_cert(self, cert: CertificateOfAuthorization) -> None:
        now = self.clock.now
        self.metrics.earth_cert_ms = now
        self.metrics.earth_cert_signers = self._signer_provenance(cert, EARTH)
        self.trace.add(now, "cert", holder=EARTH, signers=cert.signers, span_ms=cert.span_ms)
        self._finish()

    def _finish(self) -> None:
        self.done = True

    # --- run ---------------------------------------------------------------------------

    def run(self) -> ScenarioResult:
        self.clock.run(self.cfg.deadline_ms, stop=lambda: self.done)
        self.metrics.exchanges = [self.exchanges[k] for k in sorted(self.exchanges)]
        honest_channel = [
            (p.ts, p.gs_id)
            for p in self.metrics.endorsements
            if p.target == EARTH and p.channel_corrupted and not p.gs_corrupted
        ]
        self.metrics.max_corrupted_channel_yield = max_window_yield(honest_channel, self.cfg.window_ms)
        outcome = self._outcome()
        self.trace.add(self.clock.now, "outcome", outcome=outcome.kind, time_ms=outcome.time_ms)
        return ScenarioResult(self.cfg, self.trace, self.metrics, outcome)

    def _outcome(self) -> Outcome:
        m = self.metrics
        if m.earth_cert_ms is not None:
            return Outcome("attack-succeeded", m.earth_cert_ms)
        if self.adv.strategy in ("passive", "block-all"):
            if m.satellite_cert_ms is not None:
                return Outcome("certified", m.satellite_cert_ms)
            return Outcome("timeout")
        return Outcome("attack-failed")


def run_protocol(cfg: ScenarioConfig) -> ScenarioResult:
    return World(cfg).run()
