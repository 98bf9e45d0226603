"""Command-line entry point: ``routesim run|compare|scenarios``."""

from __future__ import annotations

import argparse
import os
import sys

from .metrics import emit_report
from .runner import compare, run_scenario
from .scenario import PROTOCOLS, ParseError, parse_scenario, reference_scenarios, serialize_scenario

EXIT_OK, EXIT_PARSE, EXIT_RUNTIME = 0, 1, 2


def load(source: str):
    """Parse a scenario file; a built-in name is accepted when no such file exists."""
    if not os.path.exists(source) and source in reference_scenarios():
        return reference_scenarios()[source]
    with open(source) as fh:
        return parse_scenario(fh.read())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="routesim", description="Packet-level routing protocol simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one protocol")
    run.add_argument("scenario", help="scenario file or built-in name")
    run.add_argument("--protocol", choices=PROTOCOLS, help="override the scenario's protocol")
    run.add_argument("--out", default=".", help="output directory (default: current)")

    cmp_ = sub.add_parser("compare", help="simulate all four protocols")
    cmp_.add_argument("scenario", help="scenario file or built-in name")
    cmp_.add_argument("--out", required=True, help="output directory")
    cmp_.add_argument("--jobs", type=int, default=1, help="parallel runs (default 1)")

    sc = sub.add_parser("scenarios", help="inspect built-in scenarios")
    sc_sub = sc.add_subparsers(dest="action", required=True)
    sc_sub.add_parser("list")
    dump = sc_sub.add_parser("dump")
    dump.add_argument("name")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "scenarios":
            refs = reference_scenarios()
            if args.action == "list":
                for name in refs:
                    print(name)
                return EXIT_OK
            if args.name not in refs:
                print(f"error: no built-in scenario {args.name!r}", file=sys.stderr)
                return EXIT_PARSE
            sys.stdout.write(serialize_scenario(refs[args.name]))
            return EXIT_OK
        scenario = load(args.scenario)
        if args.command == "run":
            report = run_scenario(scenario, args.protocol)
            csv_path, _ = emit_report(report, args.out)
            sys.stdout.write(report.summary_text())
            print(f"wrote {csv_path}", file=sys.stderr)
        else:
            os.makedirs(args.out, exist_ok=True)
            compare(scenario, args.out, jobs=args.jobs)
            with open(os.path.join(args.out, f"{scenario.name}.compare.csv")) as fh:
                sys.stdout.write(fh.read())
        return EXIT_OK
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
