"""Closed-form latency, bandwidth and cert-time tables for every suite, plus simulated cross-checks."""

import argparse
import json
from dataclasses import replace

from seap.cli import report_tables
from seap.crypto import SUITES
from seap.simnet.runner import run_scenario
from seap.simnet.scenarios import gallery_config


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    out = {}
    for suite in sorted(SUITES):
        row = {
            "latency": report_tables("latency", suite),
            "latency_parallel": report_tables("latency", suite, parallel=True),
            "bandwidth": report_tables("bandwidth", suite),
        }
        for parallel in (False, True):
            r = run_scenario(replace(gallery_config("honest-leo", args.seed), suite=suite, parallel_se=parallel))
            xs = r.metrics.completed()
            row[f"simulated_{'parallel' if parallel else 'sequential'}"] = {
                "latency_ms": [min(x.duration_ms for x in xs), max(x.duration_ms for x in xs)],
                "bytes": sorted({x.bytes for x in xs}),
            }
        out[suite] = row
    out["cert_time"] = [report_tables("cert-time", "ecc-p256-class", t_gs=2, t_ch=2, contacts=(1, 2)),
                        report_tables("cert-time", "ecc-p256-class", t_gs=3, t_ch=3, contacts=(2, 3))]
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
