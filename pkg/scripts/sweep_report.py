#!/usr/bin/env python3
"""Pretty-print a sweep.csv as one throughput table per (kind, burst),
policies as columns and strides as rows."""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_path", type=Path, help="sweep.csv to summarize")
    args = parser.parse_args(argv)

    tables = defaultdict(dict)
    with args.csv_path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["kind"], int(row["B"]))
            tables[key][(int(row["S"]), row["policy"])] = float(row["gbps"])

    for (kind, burst), cells in sorted(tables.items()):
        policies = sorted({p for _, p in cells})
        strides = sorted({s for s, _ in cells})
        print(f"\n{kind} B={burst} (GB/s)")
        print(f"{'S':>8} " + " ".join(f"{p:>8}" for p in policies))
        for s in strides:
            vals = " ".join(f"{cells.get((s, p), float('nan')):8.2f}"
                            for p in policies)
            print(f"{s:>8} {vals}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
