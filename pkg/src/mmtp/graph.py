"""Merge a street network and a GTFS feed into one routable graph.

Stops are linked to their nearest walk-permitted street vertex within a
radius (no edge splitting); unlinked stops stay in the graph but are
excluded from routing. The built graph is immutable and safe to share
across concurrent queries; serialization is deterministic JSON.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import NamedTuple

import numpy as np

from .errors import CorruptGraph, NoStopsLinked, NoVertexForMode, VersionMismatch
from .gtfs import Frequency, GtfsFeed, ServiceCalendar, TransitRoute, Trip, parse_service_date, format_service_date
from .osm import BBox, DRIVE_SPEED_KMH, GeoPoint, StreetEdge, StreetNetwork, haversine_m

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_LINK_RADIUS_M = 500.0

MODE_WALK = "WALK"
MODE_TRANSIT_WALK = "TRANSIT_WALK"
MODE_DRIVE = "DRIVE"
MODES = (MODE_WALK, MODE_TRANSIT_WALK, MODE_DRIVE)


class TripEvent(NamedTuple):
    arrival: int
    departure: int
    stop_id: str
    stop_sequence: int


class StopDeparture(NamedTuple):
    departure: int
    trip_id: str
    stop_sequence: int


@dataclass(frozen=True)
class StopVertex:
    stop_id: str
    point: GeoPoint
    linked_street_vertex: int | None
    link_length_m: float


@dataclass
class Timetable:
    stop_departures: dict[str, list[StopDeparture]] = field(default_factory=dict)
    trip_events: dict[str, list[TripEvent]] = field(default_factory=dict)
    frequencies: dict[str, list[Frequency]] = field(default_factory=dict)


@dataclass(frozen=True)
class GraphMeta:
    bbox: BBox
    build_timestamp: str
    format_version: int
    link_radius_m: float


@dataclass
class MultimodalGraph:
    street: StreetNetwork
    stops: list[StopVertex]
    timetable: Timetable
    trips: dict[str, Trip]
    routes: dict[str, TransitRoute]
    calendars: dict[str, ServiceCalendar]
    shapes: dict[str, list[GeoPoint]]
    meta: GraphMeta
    _indexes: "_RuntimeIndexes | None" = field(default=None, compare=False, repr=False)

    @property
    def indexes(self) -> "_RuntimeIndexes":
        if self._indexes is None:
            self._indexes = _RuntimeIndexes(self)
        return self._indexes

    def stop_by_id(self, stop_id: str) -> StopVertex | None:
        return self.indexes.stop_by_id.get(stop_id)


class _RuntimeIndexes:
    """Derived adjacency and lookup tables; never serialized."""

    def __init__(self, graph: MultimodalGraph):
        # (neighbor, length_m, edge_index) per vertex, both directions
        self.walk_adjacency: dict[int, list[tuple[int, float, int]]] = {}
        # (neighbor, drive_seconds, edge_index); reverse entries only when not oneway
        self.drive_adjacency: dict[int, list[tuple[int, int, int]]] = {}
        for idx, e in enumerate(graph.street.edges):
            if e.walk_permitted:
                self.walk_adjacency.setdefault(e.from_vertex, []).append((e.to_vertex, e.length_m, idx))
                self.walk_adjacency.setdefault(e.to_vertex, []).append((e.from_vertex, e.length_m, idx))
            if e.drive_permitted:
                secs = drive_seconds(e.length_m, e.highway_class)
                self.drive_adjacency.setdefault(e.from_vertex, []).append((e.to_vertex, secs, idx))
                if not e.oneway_drive:
                    self.drive_adjacency.setdefault(e.to_vertex, []).append((e.from_vertex, secs, idx))

        self.stop_by_id: dict[str, StopVertex] = {s.stop_id: s for s in graph.stops}
        # street vertex -> linked stops reachable from it
        self.stops_at_vertex: dict[int, list[StopVertex]] = {}
        for s in graph.stops:
            if s.linked_street_vertex is not None:
                self.stops_at_vertex.setdefault(s.linked_street_vertex, []).append(s)

        # (trip_id, stop_sequence) -> position in the trip's event list
        self.event_position: dict[tuple[str, int], int] = {}
        for trip_id, events in graph.timetable.trip_events.items():
            for pos, ev in enumerate(events):
                self.event_position[(trip_id, ev.stop_sequence)] = pos

        self._graph = graph
        self._mode_arrays: dict[str, tuple[list[int], np.ndarray, np.ndarray]] = {}
        self._walk_secs: dict[float, dict[int, list[tuple[int, int, float, int]]]] = {}

    def walk_adjacency_with_secs(self, speed_mps: float) -> dict[int, list[tuple[int, int, float, int]]]:
        """(neighbor, seconds, length_m, edge_index) per vertex for a fixed walk speed."""
        cached = self._walk_secs.get(speed_mps)
        if cached is None:
            cached = {
                v: [(nb, int(round(length / speed_mps)), length, eidx)
                    for nb, length, eidx in entries]
                for v, entries in self.walk_adjacency.items()
            }
            self._walk_secs[speed_mps] = cached
        return cached

    def vertices_for_mode(self, graph: MultimodalGraph, mode: str) -> dict[int, GeoPoint]:
        adjacency = self.drive_adjacency if mode == MODE_DRIVE else self.walk_adjacency
        return {v: graph.street.vertices[v] for v in adjacency}

    def mode_vertex_arrays(self, mode: str) -> tuple[list[int], np.ndarray, np.ndarray]:
        """Vertex ids (ascending) plus their lat/lon in radians, for vectorized scans."""
        key = MODE_DRIVE if mode == MODE_DRIVE else MODE_WALK
        if key not in self._mode_arrays:
            adjacency = self.drive_adjacency if key == MODE_DRIVE else self.walk_adjacency
            ids = sorted(adjacency)
            vertices = self._graph.street.vertices
            lats = np.radians(np.array([vertices[v].lat for v in ids], dtype=np.float64))
            lons = np.radians(np.array([vertices[v].lon for v in ids], dtype=np.float64))
            self._mode_arrays[key] = (ids, lats, lons)
        return self._mode_arrays[key]


def walk_seconds(length_m: float, speed_mps: float) -> int:
    return int(round(length_m / speed_mps))


def drive_seconds(length_m: float, highway_class: str) -> int:
    kmh = DRIVE_SPEED_KMH.get(highway_class, 30)
    return int(round(length_m / (kmh / 3.6)))


def _default_timestamp() -> str:
    # Honors SOURCE_DATE_EPOCH so identical inputs serialize byte-identically.
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def build_graph(
    street: StreetNetwork,
    feed: GtfsFeed,
    link_radius_m: float = DEFAULT_LINK_RADIUS_M,
    build_timestamp: str | None = None,
) -> MultimodalGraph:
    """Merge street and feed; link stops; index the timetable."""
    timetable = Timetable()
    for trip_id, sts in feed.stop_times.items():
        timetable.trip_events[trip_id] = [
            TripEvent(st.arrival, st.departure, st.stop_id, st.stop_sequence) for st in sts
        ]
        for st in sts:
            timetable.stop_departures.setdefault(st.stop_id, []).append(
                StopDeparture(st.departure, trip_id, st.stop_sequence)
            )
    for deps in timetable.stop_departures.values():
        deps.sort()
    timetable.frequencies = {t: list(fs) for t, fs in feed.frequencies.items()}

    stops = [
        StopVertex(stop.stop_id, GeoPoint(stop.lat, stop.lon), None, 0.0)
        for stop in sorted(feed.stops.values(), key=lambda s: s.stop_id)
    ]
    shapes = {
        shape_id: [GeoPoint(p.lat, p.lon) for p in pts]
        for shape_id, pts in feed.shapes.items()
    }

    bbox = street.bbox
    for s in stops:
        bbox = bbox.union_point(s.point)

    graph = MultimodalGraph(
        street=street,
        stops=stops,
        timetable=timetable,
        trips=dict(feed.trips),
        routes=dict(feed.routes),
        calendars=dict(feed.calendars),
        shapes=shapes,
        meta=GraphMeta(
            bbox=bbox,
            build_timestamp=build_timestamp or _default_timestamp(),
            format_version=FORMAT_VERSION,
            link_radius_m=link_radius_m,
        ),
    )
    linked = link_stops(graph, link_radius_m)
    if graph.stops and linked == 0:
        raise NoStopsLinked(f"none of {len(graph.stops)} stops lie within {link_radius_m} m of a walkable street vertex")
    return graph


def link_stops(graph: MultimodalGraph, radius_m: float = DEFAULT_LINK_RADIUS_M) -> int:
    """Link each stop to the nearest walk-permitted street vertex within radius_m.

    Rewrites graph.stops in place and returns the number of linked stops.
    """
    walk_vertices = [
        (vid, graph.street.vertices[vid]) for vid in sorted(graph.indexes.walk_adjacency)
    ]
    linked = 0
    new_stops: list[StopVertex] = []
    for stop in graph.stops:
        best = _nearest_within(walk_vertices, stop.point, radius_m)
        if best is None:
            logger.warning("stop %s: no walkable street vertex within %.0f m; excluded from routing",
                           stop.stop_id, radius_m)
            new_stops.append(StopVertex(stop.stop_id, stop.point, None, 0.0))
        else:
            vid, dist = best
            new_stops.append(StopVertex(stop.stop_id, stop.point, vid, dist))
            linked += 1
    graph.stops[:] = new_stops
    graph._indexes = None  # stop links changed
    return linked


def _nearest_within(
    candidates: list[tuple[int, GeoPoint]], p: GeoPoint, radius_m: float
) -> tuple[int, float] | None:
    # Conservative degree box prefilter before exact haversine.
    max_dlat = radius_m / 110_000.0
    max_dlon = radius_m / (110_000.0 * max(0.01, math.cos(math.radians(p.lat))))
    best: tuple[float, int] | None = None
    for vid, q in candidates:
        if abs(q.lat - p.lat) > max_dlat or abs(q.lon - p.lon) > max_dlon:
            continue
        d = haversine_m(p, q)
        if d <= radius_m and (best is None or (d, vid) < best):
            best = (d, vid)
    if best is None:
        return None
    return best[1], best[0]


def nearest_vertex(graph: MultimodalGraph, p: GeoPoint, mode: str) -> tuple[int, float]:
    """Globally nearest street vertex permitted for the mode; ties go to the smallest id."""
    ids, lats, lons = graph.indexes.mode_vertex_arrays(mode)
    if not ids:
        raise NoVertexForMode(f"no street vertex permits mode {mode}")
    plat, plon = math.radians(p.lat), math.radians(p.lon)
    h = (np.sin((lats - plat) / 2.0) ** 2
         + math.cos(plat) * np.cos(lats) * np.sin((lons - plon) / 2.0) ** 2)
    best = int(np.argmin(h))  # ids ascend, so the first minimum is the smallest id
    vid = ids[best]
    return vid, haversine_m(p, graph.street.vertices[vid])


# --- serialization ----------------------------------------------------------


def serialize_graph(graph: MultimodalGraph) -> bytes:
    """Deterministic single-file JSON; identical graphs serialize byte-identically."""
    doc = {
        "format_version": FORMAT_VERSION,
        "meta": {
            "bbox": list(graph.meta.bbox),
            "build_timestamp": graph.meta.build_timestamp,
            "format_version": graph.meta.format_version,
            "link_radius_m": graph.meta.link_radius_m,
        },
        "street": {
            "vertices": [[vid, p.lat, p.lon] for vid, p in sorted(graph.street.vertices.items())],
            "edges": [
                {
                    "from": e.from_vertex, "to": e.to_vertex, "length_m": e.length_m,
                    "way_id": e.way_id, "highway_class": e.highway_class,
                    "walk": e.walk_permitted, "drive": e.drive_permitted,
                    "oneway_drive": e.oneway_drive,
                }
                for e in graph.street.edges
            ],
            "bbox": list(graph.street.bbox),
        },
        "stops": [
            {
                "stop_id": s.stop_id, "lat": s.point.lat, "lon": s.point.lon,
                "linked_street_vertex": s.linked_street_vertex,
                "link_length_m": s.link_length_m,
            }
            for s in sorted(graph.stops, key=lambda s: s.stop_id)
        ],
        "timetable": {
            "stop_departures": {
                stop_id: [list(d) for d in deps]
                for stop_id, deps in sorted(graph.timetable.stop_departures.items())
            },
            "trip_events": {
                trip_id: [list(ev) for ev in events]
                for trip_id, events in sorted(graph.timetable.trip_events.items())
            },
            "frequencies": {
                trip_id: [[f.start_time, f.end_time, f.headway_secs] for f in freqs]
                for trip_id, freqs in sorted(graph.timetable.frequencies.items())
            },
        },
        "trips": {
            "items": [
                {"trip_id": t.trip_id, "route_id": t.route_id,
                 "service_id": t.service_id, "shape_id": t.shape_id}
                for t in sorted(graph.trips.values(), key=lambda t: t.trip_id)
            ],
            "shapes": {
                shape_id: [[p.lat, p.lon] for p in pts]
                for shape_id, pts in sorted(graph.shapes.items())
            },
        },
        "routes": [
            {"route_id": r.route_id, "agency_id": r.agency_id, "short_name": r.short_name,
             "long_name": r.long_name, "route_type": r.route_type}
            for r in sorted(graph.routes.values(), key=lambda r: r.route_id)
        ],
        "calendars": [
            {"service_id": c.service_id, "weekday_flags": list(c.weekday_flags),
             "start_date": format_service_date(c.start_date),
             "end_date": format_service_date(c.end_date)}
            for c in sorted(graph.calendars.values(), key=lambda c: c.service_id)
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def deserialize_graph(data: bytes) -> MultimodalGraph:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptGraph(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptGraph("top-level JSON value is not an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(version)
    try:
        street = StreetNetwork(
            vertices={int(vid): GeoPoint(lat, lon) for vid, lat, lon in doc["street"]["vertices"]},
            edges=[
                StreetEdge(
                    from_vertex=e["from"], to_vertex=e["to"], length_m=e["length_m"],
                    way_id=e["way_id"], highway_class=e["highway_class"],
                    walk_permitted=e["walk"], drive_permitted=e["drive"],
                    oneway_drive=e["oneway_drive"],
                )
                for e in doc["street"]["edges"]
            ],
            bbox=BBox(*doc["street"]["bbox"]),
        )
        stops = [
            StopVertex(s["stop_id"], GeoPoint(s["lat"], s["lon"]),
                       s["linked_street_vertex"], s["link_length_m"])
            for s in doc["stops"]
        ]
        tt = doc["timetable"]
        timetable = Timetable(
            stop_departures={
                stop_id: [StopDeparture(*d) for d in deps]
                for stop_id, deps in tt["stop_departures"].items()
            },
            trip_events={
                trip_id: [TripEvent(*ev) for ev in events]
                for trip_id, events in tt["trip_events"].items()
            },
            frequencies={
                trip_id: [Frequency(trip_id, start, end, headway) for start, end, headway in freqs]
                for trip_id, freqs in tt["frequencies"].items()
            },
        )
        trips = {
            t["trip_id"]: Trip(t["trip_id"], t["route_id"], t["service_id"], t["shape_id"])
            for t in doc["trips"]["items"]
        }
        shapes = {
            shape_id: [GeoPoint(lat, lon) for lat, lon in pts]
            for shape_id, pts in doc["trips"]["shapes"].items()
        }
        routes = {
            r["route_id"]: TransitRoute(r["route_id"], r["agency_id"], r["short_name"],
                                        r["long_name"], r["route_type"])
            for r in doc["routes"]
        }
        calendars = {
            c["service_id"]: ServiceCalendar(
                c["service_id"], tuple(bool(f) for f in c["weekday_flags"]),  # type: ignore[arg-type]
                parse_service_date(c["start_date"]), parse_service_date(c["end_date"]),
            )
            for c in doc["calendars"]
        }
        meta = GraphMeta(
            bbox=BBox(*doc["meta"]["bbox"]),
            build_timestamp=doc["meta"]["build_timestamp"],
            format_version=doc["meta"]["format_version"],
            link_radius_m=doc["meta"]["link_radius_m"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptGraph(f"malformed graph document: {exc}") from exc
    return MultimodalGraph(
        street=street, stops=stops, timetable=timetable, trips=trips,
        routes=routes, calendars=calendars, shapes=shapes, meta=meta,
    )


def load_graph(path: str | os.PathLike) -> MultimodalGraph:
    with open(path, "rb") as fh:
        return deserialize_graph(fh.read())
