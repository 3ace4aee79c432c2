"""Named scenarios and the generator of random adversary schedules."""

from __future__ import annotations

import random
from dataclasses import replace

from ..config import HOUR_MS, ScenarioConfig
from .adversary import AdversaryConfig
from .schedule import ScheduleConfig

MINUTE_MS = 60_000

_GEO = ScheduleConfig(template="geo")


def _gallery() -> dict[str, ScenarioConfig]:
    honest_leo = ScenarioConfig(
        name="honest-leo",
        n_gs=10,
        t_percent=20,
        t_ch=2,
        window_ms=12 * HOUR_MS,
        deadline_ms=24 * HOUR_MS,
        schedule=ScheduleConfig(template="leo", contacts_per_orbit=(1, 2)),
        expected_outcome="certified",
        expected_hours=(6.0, 11.0),
    )
    geo = ScenarioConfig(
        name="honest-geo",
        n_gs=10,
        t_percent=20,
        t_ch=2,
        window_ms=10 * MINUTE_MS,
        deadline_ms=HOUR_MS,
        schedule=_GEO,
        expected_outcome="certified",
    )
    # Two stations whose channels are corrupted back to back; the first
    # endorses the clone about W/2 into its window, the second W/6 after
    # the hop.
    hop = ScenarioConfig(
        name="channel-hop",
        n_gs=4,
        t_percent=0,
        t_ch=1,
        window_ms=6000,
        deadline_ms=20_000,
        schedule=ScheduleConfig(
            template="explicit",
            passes=(("gs-00", 2600, 2400), ("gs-01", 6600, 2400)),
        ),
        adversary=AdversaryConfig(
            strategy="channel-hop",
            channel_intervals=(("gs-00", 0, 6000), ("gs-01", 6000, 12000)),
            identity_checks=False,
        ),
        expected_outcome="attack-failed",
    )
    relay_on = replace(
        geo,
        name="relay-on",
        deadline_ms=30 * MINUTE_MS,
        adversary=AdversaryConfig(strategy="relay", identity_checks=True),
        expected_outcome="attack-failed",
    )
    relay_off = replace(
        relay_on,
        name="relay-off",
        adversary=AdversaryConfig(strategy="relay", identity_checks=False),
        expected_outcome="attack-succeeded",
    )
    mitm = replace(
        geo,
        name="mitm-all",
        deadline_ms=30 * MINUTE_MS,
        adversary=AdversaryConfig(
            strategy="mitm-clone", all_channels=True, allow_tch_violation=True, identity_checks=False
        ),
        expected_outcome="attack-succeeded",
    )
    block = replace(
        geo,
        name="block-all",
        deadline_ms=30 * MINUTE_MS,
        adversary=AdversaryConfig(strategy="block-all"),
        expected_outcome="timeout",
    )
    posterior = ScenarioConfig(
        name="posterior-corruption",
        kind="posterior-corruption",
        n_gs=10,
        t_percent=30,
        t_ch=2,
        epochs=(30,),
        expected_outcome="attack-failed",
    )
    clone = ScenarioConfig(name="genesis-clone", kind="genesis-clone", expected_outcome="attack-failed")
    return {c.name: c for c in (honest_leo, geo, hop, relay_on, relay_off, mitm, block, posterior, clone)}


GALLERY = _gallery()
GALLERY_NAMES = tuple(GALLERY)

# Extra named scenarios that are not part of the gallery matrix.
EXTRA = {
    "channel-hop-naive": replace(GALLERY["channel-hop"], name="channel-hop-naive", threshold_override=2,
                                 expected_outcome="attack-succeeded"),
    "honest-leo-moderate": ScenarioConfig(
        name="honest-leo-moderate",
        n_gs=14,
        t_percent=25,
        t_ch=3,
        window_ms=12 * HOUR_MS,
        deadline_ms=24 * HOUR_MS,
        schedule=ScheduleConfig(template="leo", contacts_per_orbit=(2, 3), pass_duration_ms=5 * MINUTE_MS,
                                pass_gap_ms=MINUTE_MS),
        expected_outcome="certified",
        expected_hours=(6.0, 8.0),
    ),
    "posterior-no-rotation": replace(GALLERY["posterior-corruption"], name="posterior-no-rotation",
                                     key_rotation=False, expected_outcome="attack-succeeded"),
}


def gallery_config(name: str, seed=None) -> ScenarioConfig:
    try:
        cfg = GALLERY[name] if name in GALLERY else EXTRA[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(GALLERY) + sorted(EXTRA)}") from None
    return cfg if seed is None else replace(cfg, seed=seed)


def random_adversary_config(seed: int) -> ScenarioConfig:
    """A small, fully visible network under a random adversary that respects the bounds.

    Identity pinning is off so only the endorsement threshold stands between
    the Earth clone and a certificate.
    """
    rng = random.Random(f"adversary-schedule/{seed}")
    n = rng.randint(4, 8)
    window = 6000
    while True:
        t_percent = rng.choice((0, 10, 20, 25, 30, 40))
        t_gs = t_percent * n // 100
        t_ch = rng.randint(0, 2)
        if t_gs + 2 * t_ch + 1 <= n:
            break
    # Staggered passes spread the honest endorsements over several windows so
    # that corruption intervals and certification interleave.
    passes = []
    for g in range(n):
        t = rng.randrange(0, 2 * window)
        for _ in range(rng.randint(1, 3)):
            duration = rng.randint(1500, 2 * window)
            passes.append((f"gs-{g:02d}", t, duration))
            t += duration + rng.randint(500, 2 * window)
    return ScenarioConfig(
        name=f"random-adversary-{seed}",
        n_gs=n,
        t_percent=t_percent,
        t_ch=t_ch,
        window_ms=window,
        seed=seed,
        deadline_ms=8 * window,
        schedule=ScheduleConfig(template="explicit", propagation_ms=(20, 40), passes=tuple(passes)),
        adversary=AdversaryConfig(
            strategy="channel-hop",
            random_channels=True,
            random_corruptions=rng.randint(0, t_gs),
            identity_checks=False,
            forward_policy="random",
            corrupted_behavior=rng.choice(("silent", "honest")),
        ),
        expected_outcome="attack-failed",
    )


def random_posterior_config(seed: int, key_rotation: bool = True) -> ScenarioConfig:
    """Random committee evolution followed by corruption of every former member."""
    rng = random.Random(f"posterior-schedule/{seed}")
    n = rng.randint(4, 12)
    epochs = tuple(rng.randint(4, 12) for _ in range(rng.randint(1, 4)))
    return ScenarioConfig(
        name=f"random-posterior-{seed}",
        kind="posterior-corruption",
        n_gs=n,
        t_percent=rng.choice((10, 20, 25, 30, 40, 50, 60)),
        t_ch=0,
        seed=seed,
        epochs=epochs,
        key_rotation=key_rotation,
        expected_outcome="attack-failed" if key_rotation else "attack-succeeded",
    )
