"""Random bounded adversaries: Earth certificates, clean-signer coverage and channel yield."""

import argparse
import json
import time
from collections import Counter

from seap.simnet.scenarios import random_adversary_config
from seap.simnet.world import World


def sweep(runs: int, start: int = 0) -> dict:
    stats = Counter()
    yields = Counter()
    t0 = time.perf_counter()
    for seed in range(start, start + runs):
        cfg = random_adversary_config(seed)
        m = World(cfg).run().metrics
        stats["earth_certs"] += m.earth_cert_ms is not None
        stats["satellite_certs"] += m.satellite_cert_ms is not None
        stats["earth_endorsements"] += sum(p.target == "earth-tee" for p in m.endorsements)
        stats["missing_clean_signer"] += m.satellite_cert_ms is not None and not any(p.honest_clean for p in m.cert_signers)
        yields[f"t_ch={cfg.t_ch} yield={m.max_corrupted_channel_yield}"] += 1
    return {"runs": runs, **stats, "yield_histogram": dict(sorted(yields.items())), "seconds": round(time.perf_counter() - t0, 1)}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=1000)
    parser.add_argument("--start", type=int, default=0)
    args = parser.parse_args()
    print(json.dumps(sweep(args.runs, args.start), indent=2))


if __name__ == "__main__":
    main()
