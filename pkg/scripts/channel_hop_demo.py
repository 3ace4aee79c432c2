"""Replay the two-wave channel-hopping schedule and show where each threshold lands."""

import argparse

from seap.simnet.attacks import channel_hop_attack


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--window-ms", type=int, default=6000)
    parser.add_argument("--t-ch", type=int, default=1)
    args = parser.parse_args()
    for label, threshold in (("t_GS + 2 t_ch + 1", None), ("naive t_ch + 1", args.t_ch + 1)):
        r = channel_hop_attack(args.window_ms, args.t_ch, threshold=threshold)
        print(f"threshold {r.threshold} ({label}): Earth endorsements {r.earth_endorsements}, "
              f"yield in one window {r.window_yield}, Earth certified: {r.certified}")
    for iv in r.channels.intervals:
        print(f"  corrupted {iv.gs_id} [{iv.start_ms}, {iv.end_ms}) ms")


if __name__ == "__main__":
    main()
