"""Command line front end.

Subcommands: run, validate, compare, replay, report, serve.  Every command
prints a short stable summary on stdout so shell scripts can cut fields out
of it, and maps error classes to fixed exit codes:

  0  success
  2  bad input (scenario schema, topology, trace parsing, unknown names)
  3  runtime invariant violation inside the engine
  4  replay divergence
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import Engine
from .errors import (
    InvariantViolation,
    MalformedTrace,
    ReplayDivergence,
    ScenarioError,
    TopologyError,
    UnknownComponent,
)
from .metrics import MetricsReport, build_ledger, build_report
from .replay import replay_file
from .scenario import Scenario, build_topology, count_spec_references, parse_scenario
from .topology import change_impact
from .trace import parse_lines

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_INVARIANT = 3
EXIT_DIVERGED = 4

_COMPARE_METRICS = {
    "throughput": lambda r: r.throughput_rps,
    "availability": lambda r: r.availability,
    "latency_p50": lambda r: r.latency_p50_us,
    "latency_p95": lambda r: r.latency_p95_us,
    "latency_max": lambda r: r.latency_max_us,
    "max_in_flight": lambda r: r.max_in_flight,
}


def _load(path: str, seed: int | None, duration_us: int | None) -> Scenario:
    scenario = parse_scenario(Path(path).read_text(encoding="utf-8"))
    if seed is not None or duration_us is not None:
        scenario = scenario.with_overrides(seed=seed, duration_us=duration_us)
    return scenario


def _fmt(value) -> str:
    if value is None:
        return "na"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _run_report(scenario: Scenario, sink=None) -> tuple[Engine, MetricsReport]:
    eng = Engine(scenario, sink=sink)
    eng.run()
    ledger = build_ledger(list(parse_lines(eng.writer.lines)))
    return eng, build_report(ledger)


def cmd_run(args) -> int:
    scenario = _load(args.scenario, args.seed, args.duration_us)
    stem = Path(args.scenario).stem
    trace_path = args.trace or f"{stem}.trace.jsonl"
    metrics_path = args.metrics or f"{stem}.metrics.{args.format}"
    with open(trace_path, "w", encoding="utf-8") as fh:
        eng, report = _run_report(scenario, sink=lambda line: fh.write(line + "\n"))
    rendered = report.to_csv() if args.format == "csv" else report.to_json() + "\n"
    Path(metrics_path).write_text(rendered, encoding="utf-8")
    c = report.counts
    print(
        f"run ok style={scenario.style} seed={scenario.seed}"
        f" duration_us={scenario.duration_us} lines={len(eng.writer.lines)}"
        f" submitted={c['submitted']} success={c['success']}"
        f" failure={c['failure']} timeout={c['timeout']}"
        f" throughput_rps={_fmt(report.throughput_rps)}"
        f" availability={_fmt(report.availability)}"
        f" trace={trace_path} metrics={metrics_path}"
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = _load(args.scenario, None, None)
    topo = build_topology(scenario)
    print(f"valid style={scenario.style} components={len(topo.specs)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    a = _load(args.scenario_a, args.seed, args.duration_us)
    # one seed for both runs so the comparison is apples to apples
    b = _load(args.scenario_b, args.seed if args.seed is not None else a.seed, args.duration_us)
    pick = _COMPARE_METRICS[args.metric]
    _, report_a = _run_report(a)
    _, report_b = _run_report(b)
    va, vb = pick(report_a), pick(report_b)
    ratio = va / vb if va is not None and vb else None
    print(f"a {args.scenario_a} {args.metric}={_fmt(va)}")
    print(f"b {args.scenario_b} {args.metric}={_fmt(vb)}")
    print(f"ratio={_fmt(ratio)}")
    return EXIT_OK


def cmd_replay(args) -> int:
    count = replay_file(args.trace)
    print(f"replay ok lines={count}")
    return EXIT_OK


def cmd_report_reuse(args) -> int:
    totals: dict[str, int] = {}
    for path in args.scenarios:
        scenario = _load(path, None, None)
        for name, count in count_spec_references(scenario).items():
            totals[name] = totals.get(name, 0) + count
    print("spec,references")
    for name in sorted(totals):
        print(f"{name},{totals[name]}")
    return EXIT_OK


def cmd_report_impact(args) -> int:
    scenario = _load(args.scenario, None, None)
    impact = change_impact(build_topology(scenario), args.component)
    print("affected")
    for name in sorted(impact.affected):
        print(name)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve

    return serve(args.scenario, host=args.host, port=args.port, pace=args.pace)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylesim",
        description="Deterministic simulator of five architectural styles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario, write trace and metrics")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--trace", help="trace output path (default <stem>.trace.jsonl)")
    run.add_argument("--metrics", help="metrics output path (default <stem>.metrics.<format>)")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--duration-us", type=int, dest="duration_us", help="override the run length")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.set_defaults(fn=cmd_run)

    validate = sub.add_parser("validate", help="check a scenario without running it")
    validate.add_argument("scenario")
    validate.set_defaults(fn=cmd_validate)

    compare = sub.add_parser("compare", help="run two scenarios with one seed, print a ratio")
    compare.add_argument("scenario_a")
    compare.add_argument("scenario_b")
    compare.add_argument("--metric", choices=sorted(_COMPARE_METRICS), default="throughput")
    compare.add_argument("--seed", type=int)
    compare.add_argument("--duration-us", type=int, dest="duration_us")
    compare.set_defaults(fn=cmd_compare)

    replay = sub.add_parser("replay", help="re-run a trace and assert it regenerates itself")
    replay.add_argument("trace", help="trace JSONL file")
    replay.set_defaults(fn=cmd_replay)

    report = sub.add_parser("report", help="static reports over scenario files")
    report_sub = report.add_subparsers(dest="kind", required=True)
    reuse = report_sub.add_parser("reuse", help="spec library reference counts")
    reuse.add_argument("scenarios", nargs="+")
    reuse.set_defaults(fn=cmd_report_reuse)
    impact = report_sub.add_parser("impact", help="components touched by changing one component")
    impact.add_argument("scenario")
    impact.add_argument("--component", required=True)
    impact.set_defaults(fn=cmd_report_impact)

    serve = sub.add_parser("serve", help="serve a live session over HTTP and WebSocket")
    serve.add_argument("scenario")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8642)
    serve.add_argument("--pace", type=float, help="virtual seconds per wall second (default from scenario)")
    serve.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ReplayDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ScenarioError, TopologyError, MalformedTrace, UnknownComponent, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
