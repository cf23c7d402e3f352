"""Builders for synthetic networks and feeds used across the test suite."""

from __future__ import annotations

from datetime import date

import pytest

from mmtp.gtfs import (
    Agency,
    Frequency,
    GtfsFeed,
    ServiceCalendar,
    ShapePoint,
    Stop,
    StopTime,
    TransitRoute,
    Trip,
)
from mmtp.osm import BBox, GeoPoint, StreetEdge, StreetNetwork, haversine_m
from mmtp.osm import WALK_ONLY_CLASSES, DRIVE_ONLY_CLASSES

EVERYDAY = ServiceCalendar(
    "EVERYDAY", (True,) * 7, date(2013, 1, 1), date(2013, 12, 31)
)
WEEKDAYS = ServiceCalendar(
    "WEEKDAYS", (True, True, True, True, True, False, False),
    date(2013, 1, 1), date(2013, 12, 31),
)


def assert_itinerary_consistent(itinerary, max_walk_m: float | None = None) -> None:
    """Contiguity, duration, distance sums, and the walk budget, all exact."""
    legs = itinerary.legs
    assert legs, "itinerary must have at least one leg"
    for leg in legs:
        assert leg.end_time >= leg.start_time
        assert len(leg.geometry) >= 2
    for a, b in zip(legs, legs[1:]):
        assert a.end_time == b.start_time, "legs must be temporally contiguous"
    assert itinerary.duration_s == legs[-1].end_time - legs[0].start_time
    walk_total = sum(l.distance_m for l in legs if l.kind == "WALK")
    assert itinerary.walk_distance_m == pytest.approx(walk_total, abs=1e-9)
    assert itinerary.total_distance_m == pytest.approx(sum(l.distance_m for l in legs), abs=1e-9)
    assert itinerary.boardings == sum(1 for l in legs if l.kind == "TRANSIT")
    if max_walk_m is not None:
        strict_walk = sum(l.distance_m for l in legs if l.kind == "WALK" and not l.approximate)
        assert strict_walk <= max_walk_m + 1e-6


def make_street(
    nodes: dict[int, tuple[float, float]],
    ways: list[tuple[int, list[int], str] | tuple[int, list[int], str, bool]],
) -> StreetNetwork:
    """Street network from {node_id: (lat, lon)} and (way_id, refs, class[, oneway])."""
    vertices: dict[int, GeoPoint] = {}
    edges: list[StreetEdge] = []
    for way in ways:
        way_id, refs, highway = way[0], way[1], way[2]
        oneway = bool(way[3]) if len(way) > 3 else False
        walk = highway not in DRIVE_ONLY_CLASSES
        drive = highway not in WALK_ONLY_CLASSES
        for a, b in zip(refs, refs[1:]):
            pa, pb = GeoPoint(*nodes[a]), GeoPoint(*nodes[b])
            vertices.setdefault(a, pa)
            vertices.setdefault(b, pb)
            edges.append(StreetEdge(a, b, haversine_m(pa, pb), way_id, highway,
                                    walk, drive, oneway))
    pts = list(vertices.values())
    bbox = BBox(min(p.lat for p in pts), min(p.lon for p in pts),
                max(p.lat for p in pts), max(p.lon for p in pts))
    return StreetNetwork(vertices=vertices, edges=edges, bbox=bbox)


def make_feed(
    stops: list[tuple[str, float, float]],
    trips: list[tuple[str, list[tuple[str, int, int]]]],
    calendars: list[ServiceCalendar] | None = None,
    service_ids: dict[str, str] | None = None,
    frequencies: list[Frequency] | None = None,
    route_types: dict[str, int] | None = None,
    shapes: dict[str, list[tuple[float, float]]] | None = None,
    trip_shapes: dict[str, str] | None = None,
) -> GtfsFeed:
    """Feed from (stop_id, lat, lon) and (trip_id, [(stop_id, arrival, departure)]).

    Each trip gets its own route R_<trip_id> unless remapped via route_types;
    services default to EVERYDAY.
    """
    calendars = calendars or [EVERYDAY]
    service_ids = service_ids or {}
    trip_shapes = trip_shapes or {}
    feed = GtfsFeed()
    feed.agencies["AG"] = Agency("AG", "Test Agency", "Asia/Manila")
    for cal in calendars:
        feed.calendars[cal.service_id] = cal
    for stop_id, lat, lon in stops:
        feed.stops[stop_id] = Stop(stop_id, f"Stop {stop_id}", lat, lon)
    for shape_id, pts in (shapes or {}).items():
        feed.shapes[shape_id] = [ShapePoint(shape_id, lat, lon, i + 1)
                                 for i, (lat, lon) in enumerate(pts)]
    for trip_id, events in trips:
        route_id = f"R_{trip_id}"
        feed.routes[route_id] = TransitRoute(
            route_id, "AG", trip_id, f"Route of {trip_id}",
            (route_types or {}).get(trip_id, 3))
        feed.trips[trip_id] = Trip(trip_id, route_id,
                                   service_ids.get(trip_id, calendars[0].service_id),
                                   trip_shapes.get(trip_id))
        feed.stop_times[trip_id] = [
            StopTime(trip_id, arr, dep, stop_id, seq + 1)
            for seq, (stop_id, arr, dep) in enumerate(events)
        ]
    for freq in frequencies or []:
        feed.frequencies.setdefault(freq.trip_id, []).append(freq)
    return feed
