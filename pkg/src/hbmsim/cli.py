"""Command line entry point.

Subcommands: run, sweep, preset, list-presets.  Errors are reported as a
single JSON object on stderr and a nonzero exit code so wrapping scripts
can parse failures mechanically.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .engine import ValidationError
from .harness import list_presets, run_experiment, run_preset, sweep


def _fail(kind: str, message: str, code: int = 1) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as f:
        data = json.load(f)
    return ExperimentConfig.from_dict(data)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hbmsim",
        description="deterministic HBM/DDR4 memory subsystem benchmark "
                    "simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a single experiment config")
    run_p.add_argument("config", help="path to a JSON experiment config")
    run_p.add_argument("--out", default="out", help="output directory")

    sweep_p = sub.add_parser("sweep", help="execute a sweep config")
    sweep_p.add_argument("config", help="path to a JSON sweep config")
    sweep_p.add_argument("--out", default="out", help="output directory")

    preset_p = sub.add_parser("preset", help="run a named preset experiment")
    preset_p.add_argument("name")
    preset_p.add_argument("--out", default=None,
                          help="output directory (default: out/<name>)")

    sub.add_parser("list-presets", help="list preset names")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name, desc in list_presets():
                print(f"{name:24s} {desc}")
            return 0
        if args.command == "preset":
            out = Path(args.out) if args.out else Path("out") / args.name
            art = run_preset(args.name, out)
        elif args.command == "run":
            art = run_experiment(_load_config(args.config), Path(args.out))
        else:
            art = sweep(_load_config(args.config), Path(args.out))
        for f in art.files:
            print(f)
        return art.exit_status
    except FileNotFoundError as e:
        return _fail("file-not-found", str(e), 2)
    except json.JSONDecodeError as e:
        return _fail("invalid-json", str(e), 2)
    except ConfigError as e:
        return _fail("config-error", str(e), 2)
    except (ValidationError, ValueError, KeyError) as e:
        return _fail("validation-error", str(e), 2)


if __name__ == "__main__":
    sys.exit(main())
