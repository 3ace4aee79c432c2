import random

import pytest

from seap.crypto import generate_keypair, get_suite, make_serial, registry_from_keys
from seap.ground_station import GsState, VerifierPolicy, genesis_bootstrap
from seap.messages import new_nonce
from seap.satellite import ProtocolParams, genesis_evidence, new_satellite, on_boot

ECC = "ecc-p256-class"


class Network:
    """A booted satellite, its pinned verifier policy and n ground stations."""

    def __init__(self, n=5, t_gs=1, t_ch=1, window_ms=6000, suite=ECC, seed=0, failed=(), degraded_ok=False):
        self.suite = get_suite(suite)
        self.ids = [f"gs-{i:02d}" for i in range(n)]
        self.keys = {g: generate_keypair(self.suite, f"{seed}/{g}") for g in self.ids}
        self.registry = registry_from_keys(self.keys.items())
        self.params = ProtocolParams(t_gs, t_ch, window_ms)
        self.rng = random.Random(seed)
        self.sat = new_satellite("sat", self.suite, self.registry, self.params,
                                 (make_serial(self.rng), make_serial(self.rng)))
        for index in failed:
            self.sat.elements[index].fail()
        on_boot(self.sat, self.rng)
        base = VerifierPolicy(self.sat.measurement_hash, self.sat.serials, nonce_ttl_ms=window_ms,
                              degraded_mode_allowed=degraded_ok)
        ev = genesis_evidence(self.sat, new_nonce(self.rng), 0)
        self.policy = genesis_bootstrap(base, ev.token, ev.slot_reports)
        self.gs = {g: GsState(g, self.keys[g], self.registry, self.policy, window_ms) for g in self.ids}


@pytest.fixture
def net():
    return Network()


@pytest.fixture
def make_net():
    return Network
