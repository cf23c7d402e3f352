"""Operator command line: validate feeds, build graphs, plan trips, geocode, report, serve.

Machine-readable results go to stdout as JSON; human diagnostics go to
stderr. Exit codes: 0 ok, 1 usage error, 2 I/O or parse failure,
3 validation issues found, 4 plan error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import date
from pathlib import Path

from .errors import MmtpError, PlanError
from .geocode import build_place_index, geocode
from .graph import (
    DEFAULT_LINK_RADIUS_M,
    MODE_TRANSIT_WALK,
    MODES,
    build_graph,
    link_stops,
    load_graph,
    serialize_graph,
)
from .gtfs import parse_feed, parse_gtfs_time, validate_feed
from .osm import GeoPoint, extract_street_network, parse_osm_xml
from .router import PlanRequest, plan, response_to_dict
from .scenario import apply_scenario, load_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_PLAN = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; keep 2 for I/O
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_latlon(text: str) -> GeoPoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected lat,lon, got {text!r}")
    return GeoPoint(float(parts[0]), float(parts[1]))


def build_arg_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmtp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-gtfs", help="validate a GTFS feed directory or zip")
    p.add_argument("feed")
    p.add_argument("--json", action="store_true", help="emit issues as JSON lines")

    p = sub.add_parser("build-graph", help="build a multimodal graph from OSM + GTFS")
    p.add_argument("--osm", required=True)
    p.add_argument("--gtfs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--link-radius", type=float, default=DEFAULT_LINK_RADIUS_M, metavar="M")
    p.add_argument("--plot", metavar="FILE", help="also render the network to an image file")

    p = sub.add_parser("plan", help="plan a trip against a built graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--from", dest="origin", required=True, metavar="LAT,LON")
    p.add_argument("--to", dest="destination", required=True, metavar="LAT,LON")
    p.add_argument("--date", required=True, metavar="YYYY-MM-DD")
    p.add_argument("--time", required=True, metavar="HH:MM:SS")
    p.add_argument("--mode", default=MODE_TRANSIT_WALK, choices=MODES)
    p.add_argument("--n", type=int, default=3, metavar="K")
    p.add_argument("--max-walk", type=float, default=800.0, metavar="M")
    p.add_argument("--scenario", metavar="FILE.json")
    p.add_argument("--fares", metavar="FILE.json", help="route_type -> [base, per_km] map")
    p.add_argument("--plot", metavar="FILE", help="render the itineraries to an image file")

    p = sub.add_parser("geocode", help="look up place names in an OSM extract")
    p.add_argument("--graph-osm", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--limit", type=int, default=10)

    p = sub.add_parser("report", help="write summary CSV and figures for a built graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("serve", help="run the HTTP planning service")
    p.add_argument("--config", help="config JSON; defaults to $MMTP_CONFIG")

    return parser


def resolve_config_path(explicit: str | None) -> str:
    path = explicit or os.environ.get("MMTP_CONFIG")
    if not path:
        raise ValueError("no config given: pass --config or set MMTP_CONFIG")
    return path


def _cmd_validate(args) -> int:
    feed = parse_feed(args.feed)
    issues = validate_feed(feed)
    if args.json:
        for issue in issues:
            print(json.dumps(issue.as_dict(), sort_keys=True))
        print(f"{len(issues)} issues", file=sys.stderr)
    else:
        for issue in issues:
            print(f"{issue.code}\t{issue.file}\t{issue.id}\t{issue.message}")
        print(f"{len(issues)} issues")
    return EXIT_VALIDATION if issues else EXIT_OK


def _cmd_build(args) -> int:
    with open(args.osm, "rb") as fh:
        doc = parse_osm_xml(fh.read())
    street = extract_street_network(doc)
    feed = parse_feed(args.gtfs)
    graph = build_graph(street, feed, link_radius_m=args.link_radius)
    data = serialize_graph(graph)
    Path(args.out).write_bytes(data)
    linked = sum(1 for s in graph.stops if s.linked_street_vertex is not None)
    print(f"{len(street.vertices)} vertices, {len(street.edges)} street edges")
    print(f"{linked} stops linked")
    print(f"graph written to {args.out} ({len(data)} bytes)")
    if args.plot:
        from .viz import render_network

        render_network(graph, args.plot)
        print(f"network figure written to {args.plot}", file=sys.stderr)
    return EXIT_OK


def _cmd_plan(args) -> int:
    graph = load_graph(args.graph)
    scenario_view = None
    if args.scenario:
        scenario_view = apply_scenario(graph, load_scenario(args.scenario))
    fare_config = None
    if args.fares:
        with open(args.fares, encoding="utf-8") as fh:
            fare_config = {int(k): (float(v[0]), float(v[1])) for k, v in json.load(fh).items()}
    request = PlanRequest(
        origin=_parse_latlon(args.origin),
        destination=_parse_latlon(args.destination),
        date=date.fromisoformat(args.date),
        depart_at=parse_gtfs_time(args.time),
        mode=args.mode,
        max_walk_m=args.max_walk,
        num_itineraries=args.n,
    )
    try:
        response = plan(graph, request, scenario_view=scenario_view, fare_config=fare_config)
    except PlanError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_PLAN
    print(json.dumps(response_to_dict(response), sort_keys=True))
    if args.plot:
        from .viz import render_network

        render_network(graph, args.plot, itineraries=response.itineraries,
                       scenario_view=scenario_view)
        print(f"itinerary figure written to {args.plot}", file=sys.stderr)
    return EXIT_OK


def _cmd_geocode(args) -> int:
    with open(args.graph_osm, "rb") as fh:
        doc = parse_osm_xml(fh.read())
    index = build_place_index(doc)
    hits = geocode(index, args.q, args.limit)
    print(json.dumps(
        [{"name": e.name, "lat": e.point.lat, "lon": e.point.lon, "kind": e.kind} for e in hits],
        sort_keys=True,
    ))
    return EXIT_OK


def _cmd_report(args) -> int:
    graph = load_graph(args.graph)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    linked = sum(1 for s in graph.stops if s.linked_street_vertex is not None)
    rows = [
        ("vertices", len(graph.street.vertices)),
        ("street_edges", len(graph.street.edges)),
        ("stops", len(graph.stops)),
        ("stops_linked", linked),
        ("routes", len(graph.routes)),
        ("trips", len(graph.trips)),
        ("calendars", len(graph.calendars)),
        ("stop_time_events", sum(len(e) for e in graph.timetable.trip_events.values())),
        ("frequency_entries", sum(len(f) for f in graph.timetable.frequencies.values())),
    ]
    summary = out_dir / "summary.csv"
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerows(rows)

    from .viz import render_departures_histogram, render_network

    render_network(graph, str(out_dir / "network.png"))
    render_departures_histogram(graph, str(out_dir / "departures.png"))
    print(f"report written to {out_dir}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .errors import CorruptGraph, VersionMismatch
    from .service import load_config, run_service

    try:
        config = load_config(resolve_config_path(args.config))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        run_service(config)
    except (OSError, CorruptGraph, VersionMismatch) as exc:
        print(f"graph load failure: {exc}", file=sys.stderr)
        return 2
    return EXIT_OK


_COMMANDS = {
    "validate-gtfs": _cmd_validate,
    "build-graph": _cmd_build,
    "plan": _cmd_plan,
    "geocode": _cmd_geocode,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def run(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PlanError:
        raise  # handled per-command
    except (MmtpError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
