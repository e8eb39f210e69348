"""Command-line entry points.

Every subcommand runs one scenario file and writes its report::

    covspec verify --scenario scenarios/tree_name.json --out reports
    covspec gallery --name exa00-chain --format csv --out reports

Exit codes: 0 all claims pass, 1 some claim fails, 2 inconclusive or
hypothesis violated, 3 usage or schema error.
"""
from __future__ import annotations

import argparse
import sys

from .scenarios import ScenarioError, emit, load_scenario, report_csv, report_json, run_scenario

# scenario kinds accepted by each subcommand
SUBCOMMANDS = {
    "spectra": {"spectra"},
    "cover": {"cover"},
    "cheeger": {"cheeger"},
    "folner": {"folner"},
    "hyperbolic": {"hyperbolic"},
    "verify": {"monotonicity", "tame", "name", "stability"},
    "gallery": {"gallery"},
}

EXIT = {"PASS": 0, "FAIL": 1, "INCONCLUSIVE": 2, "HYPOTHESIS_VIOLATED": 2}
USAGE_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covspec", description="Bottom of the spectrum under coverings: scenario runner.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run a scenario of kind {', '.join(sorted(SUBCOMMANDS[name]))}")
        p.add_argument("--scenario", help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--out", default=None, help="output directory (default: print to stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if name == "gallery":
            p.add_argument("--name", help="gallery entry, used when no scenario file is given")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else USAGE_ERROR
    try:
        if args.scenario:
            scn = load_scenario(args.scenario)
        elif args.command == "gallery" and args.name:
            scn = {"version": "v1", "name": args.name, "kind": "gallery", "seed": 0, "inputs": {"name": args.name}}
        else:
            print("covspec: --scenario is required", file=sys.stderr)
            return USAGE_ERROR
        if scn["kind"] not in SUBCOMMANDS[args.command]:
            print(f"covspec: scenario kind {scn['kind']!r} does not belong to '{args.command}'", file=sys.stderr)
            return USAGE_ERROR
        report = run_scenario(scn, seed=args.seed)
    except ScenarioError as exc:
        for path, msg in exc.errors:
            print(f"covspec: schema error at {path or '<root>'}: {msg}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"covspec: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if args.out:
        path = emit(report, args.out, args.format)
        print(f"{report.outcome} {path}")
    else:
        sys.stdout.write(report_json(report) if args.format == "json" else report_csv(report))
    return EXIT[report.outcome]


if __name__ == "__main__":
    sys.exit(main())
