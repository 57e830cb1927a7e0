#!/usr/bin/env python3
"""Run every built-in preset, writing artifacts under out/<preset>/."""

import argparse
import sys
from pathlib import Path

from hbmsim.harness import list_presets, run_preset


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", type=Path,
                        help="output directory root (default: out)")
    args = parser.parse_args(argv)

    for name, desc in list_presets():
        print(f"== {name}: {desc}")
        art = run_preset(name, args.out / name)
        for f in art.files:
            print(f"   {f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
