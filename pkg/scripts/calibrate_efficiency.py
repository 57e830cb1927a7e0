#!/usr/bin/env python3
"""Scan the per-transaction efficiency overhead and report sustained
sequential read throughput per channel.

Used to pick the ``efficiency_overhead`` value in the timing presets so the
sequential figure lands on the measured per-channel bandwidth (13.27 GB/s
per HBM pseudo channel, 18 GB/s per DDR4 channel) instead of the raw bus
peak.
"""

import argparse
import dataclasses
import sys

from hbmsim.addrmap import KINDS, DEFAULT_POLICY, get_policy
from hbmsim.dram import KIND_PRESET, TIMING_PRESETS, PseudoChannel
from hbmsim.engine import Engine, RstConfig


def sequential_gbps(kind_name: str, overhead: float, n: int) -> float:
    kind = KINDS[kind_name]
    timing = dataclasses.replace(TIMING_PRESETS[KIND_PRESET[kind_name]],
                                 efficiency_overhead=overhead)
    eng = Engine(get_policy(DEFAULT_POLICY[kind_name], kind),
                 PseudoChannel(kind, timing))
    cfg = RstConfig(0, 64, 64, 0x10000000, n)
    return eng.run_read_throughput(cfg).gbps


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", choices=sorted(KINDS), default="hbm")
    parser.add_argument("--start", type=float, default=0.0)
    parser.add_argument("--stop", type=float, default=0.25)
    parser.add_argument("--steps", type=int, default=26)
    parser.add_argument("-n", type=int, default=50000,
                        help="transactions per measurement")
    args = parser.parse_args(argv)

    width = (args.stop - args.start) / max(args.steps - 1, 1)
    print(f"{'overhead':>9}  {'GB/s per channel':>16}")
    for i in range(args.steps):
        ov = args.start + i * width
        print(f"{ov:9.3f}  {sequential_gbps(args.kind, ov, args.n):16.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
