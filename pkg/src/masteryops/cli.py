"""Administrative command line: validation, serving, reports, simulation.

The server does the real work; these verbs either talk to local files
(validate, replay, report, simulate, export) or boot the service (serve).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import analytics
from .catalog import CatalogError, load_catalog, validate_catalog
from .labqueue import QueuePolicy
from .ledger import LedgerError, load_events, replay
from .planning import actual_burndown, export_points, load_schedule
from .simulator import SimulationError, load_sim_config, render_result, run_sim


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (CatalogError, LedgerError, SimulationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="masteryops", description="mastery-learning course operations"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-catalog", help="check a catalog file against all invariants")
    p.add_argument("catalog")
    p.set_defaults(handler=cmd_validate_catalog)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--port", type=int, help="override the configured port")
    p.add_argument("--ledger", help="override the configured ledger path")
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("replay", help="replay a ledger file and summarize per student")
    p.add_argument("ledger")
    p.set_defaults(handler=cmd_replay)

    p = sub.add_parser("report", help="print an analytics report")
    p.add_argument("kind", choices=["waiting", "achievements", "cohort"])
    p.add_argument("--ledger", required=True)
    p.add_argument("--catalog")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("simulate", help="run a queue simulation from a config file")
    p.add_argument("config")
    p.add_argument("--trace", help="write a per-event trace to this file")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("export-burndown", help="export burndown series as tabular text")
    p.add_argument("student")
    p.add_argument("--ledger", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--target", help="target grade level (default: highest)")
    p.set_defaults(handler=cmd_export_burndown)

    return parser


def cmd_validate_catalog(args) -> int:
    catalog = load_catalog(args.catalog)
    report = validate_catalog(catalog)
    if report.ok:
        print(f"catalog OK: {len(catalog.achievements)} achievements, "
              f"{len(catalog.groups)} groups, levels {'/'.join(catalog.levels)}")
        return 0
    for line in report.lines():
        print(line)
    return 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config

    config = load_config(args.config)
    if args.port is not None:
        config.port = args.port
    if args.ledger is not None:
        config.ledger = args.ledger
    try:
        app = create_app(config)
    except LedgerError as exc:
        print(f"refusing to start, ledger unusable: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def cmd_replay(args) -> int:
    events = load_events(args.ledger)
    records = replay(events)
    print("student\tpassed\tpending_rechecks\tattempts_used")
    for student, record in sorted(records.items()):
        print(
            f"{student}\t{len(record.passed)}\t{len(record.pending_rechecks)}"
            f"\t{record.attempts_used}"
        )
    print(f"# {len(events)} events, {len(records)} students", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    events = load_events(args.ledger)
    if args.kind == "waiting":
        print(analytics.render_waiting(analytics.waiting_times(events)), end="")
        return 0
    if args.catalog is None:
        print("error: --catalog is required for this report", file=sys.stderr)
        return 1
    catalog = load_catalog(args.catalog)
    if args.kind == "achievements":
        print(analytics.render_achievements(analytics.achievement_stats(events, catalog)), end="")
    else:
        print(analytics.render_cohort(analytics.cohort_progress(events, catalog, QueuePolicy())), end="")
    return 0


def cmd_simulate(args) -> int:
    config = load_sim_config(args.config)
    trace: list[str] | None = [] if args.trace else None
    result = run_sim(config, trace=trace)
    print(render_result(result), end="")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            handle.write("\n".join(trace or []) + "\n")
    return 0


def cmd_export_burndown(args) -> int:
    events = load_events(args.ledger)
    catalog = load_catalog(args.catalog)
    schedule = load_schedule(args.schedule)
    target = args.target or catalog.levels[-1]
    series = actual_burndown(events, args.student, target, catalog, schedule)
    print(
        export_points(
            [
                (f"{args.student}:actual", [(ts, float(v)) for ts, v in series.points]),
                (f"{args.student}:ideal", list(series.ideal.points())),
            ]
        ),
        end="",
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
