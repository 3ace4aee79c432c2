"""Ground-station committees: handover certificates, key rotation and satellite updates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .crypto import KeyRegistry, Seed, generate_keypair, safe_verify, sign
from .errors import DeletedKeyError, InvalidHandoverError
from .ground_station import GsState
from .messages import HandoverCertificate, Member, SignerEntry, handover_body
from .perf import t_gs_for
from .satellite import SatelliteState


@dataclass(frozen=True)
class Committee:
    epoch: int
    members: tuple[Member, ...]
    t_percent: int

    def __post_init__(self):
        ids = [m.gs_id for m in self.members]
        if len(set(ids)) != len(ids):
            raise ValueError("committee member ids must be unique")
        if not 0 <= self.t_percent <= 100:
            raise ValueError("t_percent must lie in [0, 100]")

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def t_gs(self) -> int:
        return t_gs_for(self.t_percent, self.n)

    @property
    def handover_quorum(self) -> int:
        return self.t_gs + 1

    def registry(self) -> KeyRegistry:
        return KeyRegistry({m.gs_id: m.public_key for m in self.members}, self.epoch)

    def ids(self) -> list[str]:
        return [m.gs_id for m in self.members]

    @classmethod
    def from_states(cls, epoch: int, states: Iterable[GsState], t_percent: int) -> "Committee":
        return cls(epoch, tuple(Member(s.gs_id, s.public_key) for s in states), t_percent)


@dataclass
class CommitteeChain:
    epochs: list[Committee] = field(default_factory=list)
    handovers: list[HandoverCertificate] = field(default_factory=list)


def prepare_rotation(gs: GsState, seed: Seed) -> Member:
    """Generate the key a continuing member will use in the next epoch."""
    gs.pending_keypair = generate_keypair(gs.keypair.suite, seed)
    return Member(gs.gs_id, gs.pending_keypair.public_key)


def rotate_key(gs: GsState, seed: Optional[Seed] = None) -> GsState:
    """Activate the next-epoch key and irreversibly destroy the current one."""
    new = gs.pending_keypair
    if new is None:
        if seed is None:
            raise ValueError("rotate_key needs a seed when no key was prepared")
        new = generate_keypair(gs.keypair.suite, seed)
    old = gs.keypair
    old.private_handle.destroy()
    gs.retired_keys.append(old)
    gs.keypair = new
    gs.pending_keypair = None
    gs.epoch += 1
    return gs


def collect_signatures(old: Committee, body: bytes, signers: Iterable[GsState]) -> list[SignerEntry]:
    registered = {m.gs_id: m.public_key for m in old.members}
    entries: dict[str, SignerEntry] = {}
    for gs in signers:
        if gs.gs_id not in registered or gs.gs_id in entries:
            continue
        try:
            sig = sign(gs.keypair, body)
        except DeletedKeyError:
            continue
        if safe_verify(registered[gs.gs_id], body, sig):
            entries[gs.gs_id] = SignerEntry(gs.gs_id, sig)
    return [entries[k] for k in sorted(entries)]


def propose_and_sign_handover(
    old: Committee,
    new_members: Sequence[Member],
    honest_signers: Iterable[GsState],
    rotation_seeds: Optional[dict[str, Seed]] = None,
    rotate: bool = True,
) -> Optional[HandoverCertificate]:
    """Collect signatures from reachable honest members of ``old``.

    Returns the handover certificate when at least t_GS + 1 valid signatures
    were gathered, else None. Each signer then rotates its key (destroying
    the old handle); members that continue into the new committee must have
    called :func:`prepare_rotation` so their new key appears in ``new_members``.
    """
    new_members = tuple(new_members)
    if not new_members:
        raise ValueError("new committee must have at least one member")
    if len({m.gs_id for m in new_members}) != len(new_members):
        raise ValueError("new committee member ids must be unique")
    signers = list(honest_signers)
    body = handover_body(old.epoch, new_members)
    entries = collect_signatures(old, body, signers)
    if len(entries) < old.handover_quorum:
        return None
    cert = HandoverCertificate(old.epoch, new_members, tuple(entries))
    if rotate:
        seeds = rotation_seeds or {}
        signed = {e.gs_id for e in entries}
        for gs in signers:
            if gs.gs_id in signed:
                seed = seeds.get(gs.gs_id, f"rotate/{gs.gs_id}/{old.epoch + 1}")
                rotate_key(gs, seed)
    return cert


def handover_valid(prior: Committee, handover: HandoverCertificate, quorum: Optional[int] = None) -> bool:
    if handover.old_epoch != prior.epoch:
        return False
    ids = handover.signer_ids
    if len(set(ids)) != len(ids):
        return False
    registered = {m.gs_id: m.public_key for m in prior.members}
    body = handover.body()
    valid = sum(1 for s in handover.signatures if s.gs_id in registered and safe_verify(registered[s.gs_id], body, s.signature))
    return valid == len(ids) and valid >= (prior.handover_quorum if quorum is None else quorum)


def next_committee(prior: Committee, handover: HandoverCertificate) -> Committee:
    return Committee(prior.epoch + 1, handover.new_committee, prior.t_percent)


def verify_handover_chain(chain: CommitteeChain, genesis: Committee) -> bool:
    """Every link is signed by at least t_GS + 1 distinct members of the preceding committee."""
    current = genesis
    if chain.epochs and chain.epochs[0] != genesis:
        return False
    for i, handover in enumerate(chain.handovers):
        if not handover_valid(current, handover):
            return False
        current = next_committee(current, handover)
        if i + 1 < len(chain.epochs) and chain.epochs[i + 1].members != current.members:
            return False
    return True


def satellite_update_committee(
    sat: SatelliteState, handover: HandoverCertificate, t_percent: Optional[int] = None
) -> SatelliteState:
    """Replace the satellite trust store after verifying the handover against it."""
    t_percent = sat.params.t_percent if t_percent is None else t_percent
    current = Committee(
        sat.trust_store.committee_epoch,
        tuple(Member(g, pk) for g, pk in sat.trust_store.items()),
        t_percent or 0,
    )
    quorum = current.handover_quorum if t_percent is not None else sat.params.t_gs + 1
    if not handover_valid(current, handover, quorum):
        raise InvalidHandoverError(f"handover from epoch {handover.old_epoch} does not verify against epoch {current.epoch}")
    new = next_committee(current, handover)
    sat.set_trust_store(new.registry())
    sat.params = sat.params.for_committee(new.n)
    return sat
