"""Command line entry point ``ilwkit``.

Exit codes: 0 success, 2 configuration error, 3 numerical abort, 4 I/O error.
Any ``--section.key=value`` option overrides the configuration file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, parse_override_value
from .evolution import NumericalAbort
from .runner import (
    COMMANDS,
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    load_config,
    run_diagnose,
)
from .soliton import SolitonDivergence


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ilwkit", description="ILW simulations and diagnostics")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("simulate", "soliton", "limits", "check-inequalities"):
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="TOML configuration file")
        s.add_argument("--seed", type=int)
        s.add_argument("--threads", type=int)
        s.add_argument("--output", help="output directory for run folders")
        if name == "soliton":
            s.add_argument("--delta", type=float)
            s.add_argument("--speed", type=float)
    d = sub.add_parser("diagnose")
    d.add_argument("run_dir", type=Path)
    d.add_argument("--threads", type=int)
    d.add_argument("--output", type=Path, help="CSV path (default: <run_dir>/diagnostics.rerun.csv)")
    return p


def split_overrides(extra: list) -> tuple:
    """Separate ``--section.key=value`` tokens from anything unrecognized."""
    overrides, unknown = {}, []
    it = iter(extra)
    for tok in it:
        if tok.startswith("--") and "." in tok.split("=", 1)[0]:
            key, eq, value = tok[2:].partition("=")
            if not eq:
                value = next(it, None)
                if value is None:
                    unknown.append(tok)
                    continue
            overrides[key] = parse_override_value(value)
        else:
            unknown.append(tok)
    return overrides, unknown


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    overrides, unknown = split_overrides(extra)
    if unknown:
        print(f"error: unrecognized arguments: {' '.join(unknown)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "diagnose":
            res = run_diagnose(args.run_dir, args.threads, args.output)
        else:
            for attr, key in (("seed", "run.seed"), ("threads", "run.threads"), ("output", "output.directory"),
                              ("delta", "model.delta"), ("speed", "initial.soliton_speed")):
                if getattr(args, attr, None) is not None:
                    overrides[key] = getattr(args, attr)
            if args.command == "soliton":
                overrides.setdefault("initial.kind", "soliton")
            cfg = load_config(args.config, overrides)
            res = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalAbort, SolitonDivergence) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"run_dir": str(res.run_dir), "status": res.status, **res.summary}, indent=2, default=str))
    return res.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
