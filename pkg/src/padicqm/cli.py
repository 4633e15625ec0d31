"""Command-line entry point: ``padicqm <scenario> --config FILE --out DIR``."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .experiments import NumericalContractError, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = {
    "two-slit": "two_slit",
    "ctqw": "ctqw",
    "collapse": "collapse",
    "spectrum": "spectrum",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padicqm", description="p-adic quantum mechanics scenarios")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "two-slit": "interference patterns for the two-slit model (p-adic and real sectors)",
        "ctqw": "continuous-time quantum walk driven by a kernel operator",
        "collapse": "apparatus scans of balls with ball-projection collapse",
        "spectrum": "eigenvalue table of the Vladimirov Hamiltonian on the window",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="flat key = value configuration file")
        p.add_argument("--out", default=None, help="output directory (default: output_dir key, else .)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    scenario = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, scenario)
        result = run_scenario(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalContractError as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in result.files:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
