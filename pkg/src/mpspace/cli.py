"""Command line entry point: run scenario files and explain tasks."""
from __future__ import annotations

import argparse
import sys

from .errors import MpspaceError
from .ideals import DEFAULT_CAP_N
from .scenario import explain, report_failed, report_json, report_text, run_scenario, load_scenario


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpspace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file and print its report")
    r.add_argument("file")
    fmt = r.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for independent tasks")
    r.add_argument("--cap-N", dest="cap_N", type=int, default=DEFAULT_CAP_N,
                   help="cap on truncation orders and power stabilisation")
    r.add_argument("--modular-filter", choices=("on", "off"), default="off",
                   help="skip pairs that reduce to zero modulo a prime (results are verified over Q)")
    r.add_argument("-o", "--output", help="write the report here instead of stdout")
    e = sub.add_parser("explain", help="describe the pipeline behind a task")
    e.add_argument("task")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "explain":
            sys.stdout.write(explain(args.task))
            return 0
        if args.jobs < 1:
            raise MpspaceError("--jobs must be positive")
        data = load_scenario(args.file)
        report = run_scenario(data, cap_N=args.cap_N, jobs=args.jobs,
                              modular_filter=args.modular_filter == "on")
    except MpspaceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = report_text(report) if args.fmt == "text" else report_json(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 1 if report_failed(report) else 0


if __name__ == "__main__":
    sys.exit(main())
