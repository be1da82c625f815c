"""Command-line front end.

Exit codes: 0 success, 2 configuration rejected, 3 solution blew up.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .integrator import BlowUpError
from .scenarios import (
    SCENARIO_DESCRIPTIONS,
    SCENARIO_KEYS,
    ConfigError,
    format_planck_report,
    load_config_file,
    parse_set_overrides,
    report_planck_numbers,
    resolve_config,
    run_scenario,
    scenario_names,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsb",
        description="Planck-scale wave-equation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a named scenario")
    run_p.add_argument("scenario", help="scenario name (see 'nsb list')")
    run_p.add_argument("--config", help="JSON file with scenario keys")
    run_p.add_argument("--out", default=".", help="output directory (default: .)")
    run_p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override one key (value parsed as JSON, else text); "
                            "repeatable")
    run_p.add_argument("--plotscript", action="store_true",
                       help="also write a gnuplot script next to the CSVs")

    report_p = sub.add_parser("report", help="print reference numbers")
    report_sub = report_p.add_subparsers(dest="report_kind", required=True)
    planck_p = report_sub.add_parser("planck",
                                     help="Planck-scale values behind the units")
    planck_p.add_argument("--json", action="store_true",
                          help="emit machine-readable JSON")

    sub.add_parser("list", help="list scenarios and their configuration keys")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    file_params = load_config_file(args.config) if args.config else {}
    overrides = parse_set_overrides(args.overrides)
    params = resolve_config(args.scenario, file_params, overrides)
    manifest = run_scenario(args.scenario, params, out_dir=args.out,
                            plotscript=args.plotscript)
    for entry in manifest["outputs"]:
        print(f"wrote {manifest['output_dir']}/{entry['path']}")
    print(f"wrote {manifest['output_dir']}/manifest.json")
    extra = manifest["solver"].get("fitted_order")
    if extra is not None:
        print(f"fitted_order {extra:.4f}")
    return EXIT_OK


def _cmd_report_planck(args: argparse.Namespace) -> int:
    numbers = report_planck_numbers()
    if args.json:
        print(json.dumps(numbers, indent=2))
    else:
        print(format_planck_report(numbers))
    return EXIT_OK


def _cmd_list() -> int:
    for name in scenario_names():
        print(f"{name}: {SCENARIO_DESCRIPTIONS[name]}")
        for key, spec in SCENARIO_KEYS[name].items():
            print(f"  {key} ({spec.kind}, default {spec.default!r}): {spec.doc}")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "report":
            return _cmd_report_planck(args)
        if args.command == "list":
            return _cmd_list()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
