"""Time to certificate over many seeds for both LEO parameterizations, next to the closed-form model."""

import argparse
import json
from statistics import median

from seap.perf import cert_time_model
from seap.simnet.runner import run_batch
from seap.simnet.scenarios import gallery_config

COLUMNS = {"conservative": ("honest-leo", 2, 2, (1, 2)), "moderate": ("honest-leo-moderate", 3, 3, (2, 3))}


def sweep(seeds: int) -> dict:
    out = {}
    for column, (name, t_gs, t_ch, contacts) in COLUMNS.items():
        results = run_batch([gallery_config(name, s) for s in range(seeds)])
        hours = [r.metrics.hours_to_cert for r in results if r.metrics.hours_to_cert is not None]
        orbits = [r.metrics.orbits_to_cert for r in results if r.metrics.orbits_to_cert is not None]
        model = cert_time_model(t_gs, t_ch, contacts)
        out[column] = {
            "certified": f"{len(hours)}/{seeds}",
            "hours": [round(min(hours), 2), round(median(hours), 2), round(max(hours), 2)],
            "orbits": [min(orbits), max(orbits)],
            "model": model.to_dict(),
        }
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=200)
    args = parser.parse_args()
    print(json.dumps(sweep(args.seeds), indent=2))


if __name__ == "__main__":
    main()
