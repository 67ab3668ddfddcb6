"""Command-line entry point.

Subcommands:

* ``simulate`` writes a synthetic event stream plus its ground truth and
  oracle crossings.
* ``analyze`` runs the full pipeline on an event file and exports the
  crossing, density and diagram CSVs, a text summary and a JSON
  diagnostics file.
* ``fd`` re-bins an existing fd.csv with a new bin width.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError, load_run_config
from .diagram import FD_HEADER, FdPoint, FundamentalDiagram, bin_fd, export_results
from .ingest import EventFormatError, parse_events, write_events_csv
from .pipeline import analyze_events
from .simulate import (ScenarioError, sample_uwb_events, simulate_run,
                       write_ground_truth_csv, write_oracle_crossings_csv)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="pedflow", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration file")
    common.add_argument("--out-dir", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="override the configured RNG seed")

    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common],
                   help="generate a synthetic run (events, ground truth, oracle)")

    analyze = sub.add_parser("analyze", parents=[common],
                             help="extract crossings, densities and the diagram")
    analyze.add_argument("events", help="location-event file (csv or jsonl)")
    analyze.add_argument("--format", choices=("csv", "jsonl"),
                         help="event format (default: by file extension)")
    analyze.add_argument("--bin-width", type=float,
                         help="diagram bin width in 1/m (overrides config)")
    analyze.add_argument("--include-degraded", action="store_true",
                         help="pool interpolation-degraded crossings into the diagram")
    analyze.add_argument("--run-id", default=None,
                         help="label for this run in fd.csv (default: events file stem)")

    fd = sub.add_parser("fd", parents=[common], help="re-bin an existing fd.csv")
    fd.add_argument("fd_csv", help="fd.csv produced by analyze")
    fd.add_argument("--bin-width", type=float, required=True,
                    help="new bin width in 1/m")
    return parser


def _cmd_simulate(args) -> int:
    config = load_run_config(args.config)
    scenario = config.scenario(seed=args.seed)
    truth = simulate_run(scenario)
    events = sample_uwb_events(truth, scenario)
    os.makedirs(args.out_dir, exist_ok=True)
    write_events_csv(events, os.path.join(args.out_dir, "events.csv"))
    write_ground_truth_csv(truth, os.path.join(args.out_dir, "ground_truth.csv"))
    write_oracle_crossings_csv(truth.crossings,
                               os.path.join(args.out_dir, "oracle_crossings.csv"))
    print(f"simulated {scenario.n_pedestrians} pedestrians, "
          f"{len(events)} events, {len(truth.crossings)} oracle crossings -> {args.out_dir}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    config = load_run_config(args.config)
    fmt = args.format or ("jsonl" if args.events.endswith(".jsonl") else "csv")
    try:
        with open(args.events, "rb") as fh:
            events = parse_events(fh, format=fmt)
    except OSError as exc:
        print(f"pedflow: cannot read events: {exc}", file=sys.stderr)
        return EXIT_DATA

    run_id = args.run_id or os.path.splitext(os.path.basename(args.events))[0]
    result = analyze_events(
        events,
        geometry=config.geometry,
        section=config.section,
        qc=config.qc,
        run_id=run_id,
        include_degraded=args.include_degraded or config.include_degraded,
        exclude_self=config.exclude_self,
    )
    if not result.accepted_tags:
        print("pedflow: no tag passed quality control; nothing to analyze",
              file=sys.stderr)
        return EXIT_DATA

    bin_width = args.bin_width if args.bin_width is not None else config.bin_width
    export_results(
        result.diagram, result.free_velocity, result.metrics, result.profile,
        args.out_dir, section_length=config.section.length, bin_width=bin_width,
        quality_reports=[result.quality[tag] for tag in sorted(result.quality)],
    )
    diag_path = os.path.join(args.out_dir, "diagnostics.json")
    with open(diag_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(result.diagnostics(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"analyzed {len(events)} events: {len(result.crossings)} crossings from "
          f"{result.participants} tags -> {args.out_dir}")
    return EXIT_OK


def _read_fd_csv(path) -> FundamentalDiagram:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != FD_HEADER:
        raise EventFormatError(f"expected header {FD_HEADER!r}", line=1)
    points = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise EventFormatError("expected 5 comma-separated fields", line=number)
        try:
            points.append(FdPoint(density=float(parts[0]), velocity=float(parts[1]),
                                  tag_id=parts[2], loop=int(parts[3]), run=parts[4]))
        except ValueError as exc:
            raise EventFormatError(str(exc), line=number) from None
    return FundamentalDiagram(points=tuple(points))


def _cmd_fd(args) -> int:
    if args.bin_width <= 0:
        print("pedflow: --bin-width must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        diagram = _read_fd_csv(args.fd_csv)
    except OSError as exc:
        print(f"pedflow: cannot read diagram: {exc}", file=sys.stderr)
        return EXIT_DATA
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "fd_binned.csv")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rho_bin_center,v_mean,v_std,count\n")
        for b in bin_fd(diagram, args.bin_width):
            fh.write(f"{b.center!r},{b.v_mean!r},{b.v_std!r},{b.count}\n")
    print(f"re-binned {len(diagram.points)} points -> {out_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        return _cmd_fd(args)
    except (ConfigError, ScenarioError) as exc:
        print(f"pedflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EventFormatError as exc:
        print(f"pedflow: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"pedflow: i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
