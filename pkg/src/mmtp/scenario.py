"""Non-destructive disaster overlays: closed ways and areas, disabled stops and routes.

A scenario never touches the base graph; applying it derives the sets of
street edges and stops the router must treat as gone for that query.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .graph import MultimodalGraph
from .osm import GeoPoint


@dataclass(frozen=True)
class GeoPolygon:
    ring: tuple[GeoPoint, ...]  # implicitly closed

    def __post_init__(self):
        if len(self.ring) < 3:
            raise ValueError("polygon ring needs at least 3 points")


@dataclass
class Scenario:
    id: str
    name: str = ""
    closed_way_ids: set[int] = field(default_factory=set)
    closed_areas: list[GeoPolygon] = field(default_factory=list)
    disabled_stop_ids: set[str] = field(default_factory=set)
    disabled_route_ids: set[str] = field(default_factory=set)

    def __post_init__(self):
        if not self.id:
            raise ValueError("scenario id must be non-empty")


@dataclass(frozen=True)
class ScenarioView:
    graph: MultimodalGraph
    closed_edge_indexes: frozenset[int]
    disabled_stop_ids: frozenset[str]
    disabled_trip_ids: frozenset[str]


def point_in_polygon(poly: GeoPolygon, p: GeoPoint) -> bool:
    """Ray-casting parity on the (lon, lat) plane; points on an edge count as inside."""
    ring = poly.ring
    n = len(ring)
    x, y = p.lon, p.lat
    inside = False
    for i in range(n):
        a = ring[i]
        b = ring[(i + 1) % n]
        ax, ay, bx, by = a.lon, a.lat, b.lon, b.lat
        if _on_segment(ax, ay, bx, by, x, y):
            return True
        if (ay > y) != (by > y):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
            elif x == x_cross:
                return True
    return inside


def _on_segment(ax: float, ay: float, bx: float, by: float, x: float, y: float) -> bool:
    cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
    if cross != 0.0:
        return False
    return min(ax, bx) <= x <= max(ax, bx) and min(ay, by) <= y <= max(ay, by)


def apply_scenario(graph: MultimodalGraph, scenario: Scenario) -> ScenarioView:
    """Derive closed-edge and disabled-stop sets; the base graph stays untouched."""
    closed_edges: set[int] = set()
    for idx, edge in enumerate(graph.street.edges):
        if edge.way_id in scenario.closed_way_ids:
            closed_edges.add(idx)
            continue
        if scenario.closed_areas:
            pa = graph.street.vertices[edge.from_vertex]
            pb = graph.street.vertices[edge.to_vertex]
            if any(point_in_polygon(poly, pa) or point_in_polygon(poly, pb)
                   for poly in scenario.closed_areas):
                closed_edges.add(idx)

    disabled_stops = set(scenario.disabled_stop_ids)
    if scenario.closed_areas:
        for stop in graph.stops:
            if stop.stop_id in disabled_stops:
                continue
            if any(point_in_polygon(poly, stop.point) for poly in scenario.closed_areas):
                disabled_stops.add(stop.stop_id)

    disabled_trips = {
        trip_id for trip_id, trip in graph.trips.items()
        if trip.route_id in scenario.disabled_route_ids
    }

    return ScenarioView(
        graph=graph,
        closed_edge_indexes=frozenset(closed_edges),
        disabled_stop_ids=frozenset(disabled_stops),
        disabled_trip_ids=frozenset(disabled_trips),
    )


# --- JSON import/export ------------------------------------------------------


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "id": s.id,
        "name": s.name,
        "closed_way_ids": sorted(s.closed_way_ids),
        "closed_areas": [[[p.lat, p.lon] for p in poly.ring] for poly in s.closed_areas],
        "disabled_stop_ids": sorted(s.disabled_stop_ids),
        "disabled_route_ids": sorted(s.disabled_route_ids),
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        return Scenario(
            id=str(doc["id"]),
            name=str(doc.get("name", "")),
            closed_way_ids={int(w) for w in doc.get("closed_way_ids", [])},
            closed_areas=[
                GeoPolygon(tuple(GeoPoint(lat, lon) for lat, lon in ring))
                for ring in doc.get("closed_areas", [])
            ],
            disabled_stop_ids={str(s) for s in doc.get("disabled_stop_ids", [])},
            disabled_route_ids={str(r) for r in doc.get("disabled_route_ids", [])},
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario document: {exc}") from exc


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))
