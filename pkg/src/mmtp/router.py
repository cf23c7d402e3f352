"""Time-dependent earliest-arrival search over the multimodal graph.

The search is label-setting over a priority queue ordered by time, with a
Pareto frontier per location on (time, accumulated walk) so the walk budget
never hides a feasible path. Alternatives come from whole-set trip banning:
each found itinerary bans all transit trips it used, and the search repeats
until enough alternatives exist or a duplicate appears.

Boundary semantics: when one endpoint falls outside the graph bounding box,
a synthetic straight-line walk leg connects the raw point to its snap
vertex; when both endpoints fall outside, planning fails with a fixed
boundary message.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left
from dataclasses import dataclass, field, replace
from datetime import date as ServiceDate

from .errors import PlanError
from .graph import (
    MODE_DRIVE,
    MODE_TRANSIT_WALK,
    MODE_WALK,
    MODES,
    MultimodalGraph,
    nearest_vertex,
    walk_seconds,
)
from .gtfs import GtfsTime, format_gtfs_time, next_frequency_departure, service_active_on
from .osm import WALK_SPEED_MPS, GeoPoint, haversine_m

BOARD_PENALTY_S = 60
SEARCH_HORIZON_S = 24 * 3600

KIND_WALK = "WALK"
KIND_TRANSIT = "TRANSIT"
KIND_DRIVE = "DRIVE"


@dataclass(frozen=True)
class PlanRequest:
    origin: GeoPoint
    destination: GeoPoint
    date: ServiceDate
    depart_at: GtfsTime
    mode: str = MODE_TRANSIT_WALK
    max_walk_m: float = 800.0
    num_itineraries: int = 3
    scenario_id: str | None = None
    walk_speed_mps: float = WALK_SPEED_MPS

    def validate(self) -> None:
        if self.num_itineraries < 1:
            raise ValueError("num_itineraries must be >= 1")
        if self.max_walk_m <= 0:
            raise ValueError("max_walk_m must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        if self.depart_at < 0:
            raise ValueError("depart_at must be >= 0")
        if self.walk_speed_mps <= 0:
            raise ValueError("walk speed must be > 0")


class SearchLabel:
    """One search state: a location reached at a time with a walk budget used."""

    __slots__ = ("location", "time", "walk_m", "boardings", "shift", "step", "parent")

    def __init__(self, location, time, walk_m, boardings, shift, step, parent):
        self.location = location
        self.time = time
        self.walk_m = walk_m
        self.boardings = boardings
        self.shift = shift  # run offset for frequency trips, else 0
        self.step = step
        self.parent = parent


@dataclass
class Leg:
    kind: str  # WALK | TRANSIT | DRIVE
    start_time: GtfsTime
    end_time: GtfsTime
    distance_m: float
    geometry: list[GeoPoint]
    route_id: str | None = None
    trip_id: str | None = None
    board_stop: str | None = None
    alight_stop: str | None = None
    route_type: int | None = None
    approximate: bool = False


@dataclass
class Itinerary:
    legs: list[Leg]
    duration_s: int
    total_distance_m: float
    walk_distance_m: float
    estimated_fare: float
    boardings: int


@dataclass
class PlanResponse:
    itineraries: list[Itinerary]
    diagnostics: dict = field(default_factory=dict)


def _view_sets(scenario_view):
    if scenario_view is None:
        return frozenset(), frozenset(), frozenset()
    return (
        scenario_view.closed_edge_indexes,
        scenario_view.disabled_stop_ids,
        scenario_view.disabled_trip_ids,
    )


def next_departure(
    graph: MultimodalGraph, stop_id: str, t: GtfsTime, date: ServiceDate
) -> tuple[str, GtfsTime] | None:
    """Earliest departure >= t at the stop; scheduled and frequency sources combined.

    Ties break toward the lexicographically smallest trip_id.
    """
    deps = graph.timetable.stop_departures.get(stop_id, [])
    frequencies = graph.timetable.frequencies
    best: tuple[GtfsTime, str] | None = None

    active: dict[str, bool] = {}

    def is_active(trip_id: str) -> bool:
        if trip_id not in active:
            cal = graph.calendars.get(graph.trips[trip_id].service_id)
            active[trip_id] = cal is not None and service_active_on(cal, date)
        return active[trip_id]

    i = bisect_left(deps, (t,))
    for dep, trip_id, _seq in deps[i:]:
        if best is not None and dep > best[0]:
            break
        if trip_id in frequencies or not is_active(trip_id):
            continue
        cand = (dep, trip_id)
        if best is None or cand < best:
            best = cand

    for dep_template, trip_id, _seq in deps:
        if trip_id not in frequencies or not is_active(trip_id):
            continue
        offset = dep_template - graph.timetable.trip_events[trip_id][0].departure
        for freq in frequencies[trip_id]:
            run = next_frequency_departure(freq, max(freq.start_time, t - offset))
            if run is None:
                continue
            cand = (run + offset, trip_id)
            if cand[0] >= t and (best is None or cand < best):
                best = cand

    if best is None:
        return None
    return best[1], best[0]


def earliest_arrival(
    graph: MultimodalGraph,
    request: PlanRequest,
    scenario_view=None,
    *,
    origin_vertex: int | None = None,
    destination_vertex: int | None = None,
    start_time: GtfsTime | None = None,
    banned_trips: frozenset[str] = frozenset(),
    on_settle=None,
) -> tuple[GtfsTime, SearchLabel] | None:
    """Minimal arrival time at the destination vertex, or None when unreachable.

    Departures are scanned up to request.depart_at + 24 h. ``on_settle`` is a
    debug hook invoked with every label extracted from the queue.
    """
    closed_edges, disabled_stops, disabled_trips = _view_sets(scenario_view)
    banned = set(banned_trips) | set(disabled_trips)
    mode = request.mode
    if origin_vertex is None:
        origin_vertex = nearest_vertex(graph, request.origin, mode)[0]
    if destination_vertex is None:
        destination_vertex = nearest_vertex(graph, request.destination, mode)[0]
    t0 = request.depart_at if start_time is None else start_time
    horizon = request.depart_at + SEARCH_HORIZON_S
    idx = graph.indexes
    timetable = graph.timetable
    frequencies = timetable.frequencies
    walk_speed = request.walk_speed_mps
    max_walk = request.max_walk_m

    active_services: dict[str, bool] = {}

    def trip_active(trip_id: str) -> bool:
        service_id = graph.trips[trip_id].service_id
        if service_id not in active_services:
            cal = graph.calendars.get(service_id)
            active_services[service_id] = cal is not None and service_active_on(cal, request.date)
        return active_services[service_id]

    start = SearchLabel(("v", origin_vertex), t0, 0.0, 0, 0, ("start",), None)
    heap: list[tuple[int, int, SearchLabel]] = [(t0, 0, start)]
    frontier: dict[tuple, list[tuple[int, float]]] = {start.location: [(t0, 0.0)]}
    goal = ("v", destination_vertex)
    push_seq = 0
    heappush, heappop = heapq.heappush, heapq.heappop
    walk_adjacency = idx.walk_adjacency_with_secs(walk_speed)
    drive_adjacency = idx.drive_adjacency
    stops_at_vertex = idx.stops_at_vertex
    stop_departures = timetable.stop_departures
    trip_events = timetable.trip_events
    event_position = idx.event_position
    transit = mode == MODE_TRANSIT_WALK
    drive = mode == MODE_DRIVE

    def accept(location: tuple, time: int, walk: float) -> bool:
        """Record a Pareto point on (time, walk) at the location if nondominated."""
        points = frontier.get(location)
        if points is None:
            frontier[location] = [(time, walk)]
            return True
        for pt, pw in points:
            if pt <= time and pw <= walk:
                return False
        points[:] = [p for p in points if not (time <= p[0] and walk <= p[1])]
        points.append((time, walk))
        return True

    while heap:
        label = heappop(heap)[2]
        loc = label.location
        t = label.time
        walk = label.walk_m
        if (t, walk) not in frontier[loc]:
            continue  # superseded while queued
        if on_settle is not None:
            on_settle(label)
        if loc == goal:
            return t, label

        kind = loc[0]
        if kind == "v":
            v = loc[1]
            if drive:
                for nb, secs, eidx in drive_adjacency.get(v, ()):
                    if eidx in closed_edges:
                        continue
                    nt = t + secs
                    if accept(("v", nb), nt, walk):
                        push_seq += 1
                        heappush(heap, (nt, push_seq, SearchLabel(
                            ("v", nb), nt, walk, label.boardings, 0,
                            ("drive_edge", eidx, v, nb), label)))
            else:
                for nb, secs, length, eidx in walk_adjacency.get(v, ()):
                    if eidx in closed_edges:
                        continue
                    nw = walk + length
                    if nw > max_walk:
                        continue
                    nt = t + secs
                    # dominance check inlined: this is the hottest branch
                    nloc = ("v", nb)
                    points = frontier.get(nloc)
                    if points is None:
                        frontier[nloc] = [(nt, nw)]
                    else:
                        dominated = False
                        for pt, pw in points:
                            if pt <= nt and pw <= nw:
                                dominated = True
                                break
                        if dominated:
                            continue
                        points[:] = [p for p in points if not (nt <= p[0] and nw <= p[1])]
                        points.append((nt, nw))
                    push_seq += 1
                    heappush(heap, (nt, push_seq, SearchLabel(
                        nloc, nt, nw, label.boardings, 0,
                        ("walk_edge", eidx, v, nb), label)))
                if transit:
                    for stop in stops_at_vertex.get(v, ()):
                        stop_id = stop.stop_id
                        if stop_id in disabled_stops:
                            continue
                        nw = walk + stop.link_length_m
                        if nw > max_walk:
                            continue
                        nt = t + int(round(stop.link_length_m / walk_speed))
                        if accept(("s", stop_id), nt, nw):
                            push_seq += 1
                            heappush(heap, (nt, push_seq, SearchLabel(
                                ("s", stop_id), nt, nw, label.boardings, 0,
                                ("link_to_stop", stop_id, v), label)))

        elif kind == "s":
            stop_id = loc[1]
            stop = idx.stop_by_id[stop_id]
            if stop.linked_street_vertex is not None:
                nw = walk + stop.link_length_m
                if nw <= max_walk:
                    nt = t + int(round(stop.link_length_m / walk_speed))
                    v = stop.linked_street_vertex
                    if accept(("v", v), nt, nw):
                        push_seq += 1
                        heappush(heap, (nt, push_seq, SearchLabel(
                            ("v", v), nt, nw, label.boardings, 0,
                            ("link_to_street", stop_id, v), label)))
            ready = t + BOARD_PENALTY_S
            deps = stop_departures.get(stop_id, ())
            boardings = label.boardings + 1
            for j in range(bisect_left(deps, (ready,)), len(deps)):
                dep, trip_id, seq = deps[j]
                if dep > horizon:
                    break
                if trip_id in frequencies or trip_id in banned or not trip_active(trip_id):
                    continue
                events = trip_events[trip_id]
                pos = event_position[(trip_id, seq)]
                if pos >= len(events) - 1:
                    continue
                if accept(("t", trip_id, pos), dep, walk):
                    push_seq += 1
                    heappush(heap, (dep, push_seq, SearchLabel(
                        ("t", trip_id, pos), dep, walk, boardings, 0,
                        ("board", trip_id, pos, dep), label)))
            for dep_template, trip_id, seq in deps:
                if trip_id not in frequencies or trip_id in banned or not trip_active(trip_id):
                    continue
                events = trip_events[trip_id]
                pos = event_position[(trip_id, seq)]
                if pos >= len(events) - 1:
                    continue
                offset = dep_template - events[0].departure
                for freq in frequencies[trip_id]:
                    run = next_frequency_departure(freq, max(freq.start_time, ready - offset))
                    if run is None:
                        continue
                    dep = run + offset
                    if dep < ready or dep > horizon:
                        continue
                    if accept(("t", trip_id, pos), dep, walk):
                        push_seq += 1
                        heappush(heap, (dep, push_seq, SearchLabel(
                            ("t", trip_id, pos), dep, walk, boardings,
                            run - events[0].departure,
                            ("board", trip_id, pos, dep), label)))

        else:  # on board
            trip_id, pos = loc[1], loc[2]
            events = trip_events[trip_id]
            ev = events[pos]
            if ev.stop_id not in disabled_stops and accept(("s", ev.stop_id), t, walk):
                push_seq += 1
                heappush(heap, (t, push_seq, SearchLabel(
                    ("s", ev.stop_id), t, walk, label.boardings, 0,
                    ("alight", trip_id, pos, t), label)))
            if pos + 1 < len(events):
                nxt = events[pos + 1]
                nt = nxt.arrival + label.shift
                if nt < t:
                    nt = t
                if accept(("t", trip_id, pos + 1), nt, walk):
                    push_seq += 1
                    heappush(heap, (nt, push_seq, SearchLabel(
                        ("t", trip_id, pos + 1), nt, walk, label.boardings, label.shift,
                        ("ride", trip_id, pos + 1), label)))

    return None


# --- itinerary assembly ------------------------------------------------------


def assemble_itinerary(
    path: SearchLabel,
    graph: MultimodalGraph,
    fare_config: dict[int, tuple[float, float]] | None = None,
) -> Itinerary:
    """Turn a back-pointer chain into legs with merged street steps.

    Consecutive same-kind street steps become one leg; waits are absorbed by
    stretching the preceding street leg (or an inserted zero-length walk leg)
    so legs stay temporally contiguous.
    """
    chain: list[SearchLabel] = []
    label = path
    while label is not None:
        chain.append(label)
        label = label.parent
    chain.reverse()

    legs: list[Leg] = []
    street: Leg | None = None
    board: tuple[str, int, int] | None = None  # trip_id, position, departure

    def flush_street() -> None:
        nonlocal street
        if street is not None:
            legs.append(street)
            street = None

    def extend_street(kind: str, a: GeoPoint, b: GeoPoint, length: float,
                      start: GtfsTime, end: GtfsTime) -> None:
        nonlocal street
        if street is not None and street.kind != kind:
            flush_street()
        if street is None:
            street = Leg(kind=kind, start_time=start, end_time=end,
                         distance_m=length, geometry=[a, b])
        else:
            if street.geometry[-1] != a:
                street.geometry.append(a)
            street.geometry.append(b)
            street.distance_m += length
            street.end_time = end

    for label in chain:
        step = label.step
        op = step[0]
        if op == "start":
            continue
        parent = label.parent
        if op == "walk_edge" or op == "drive_edge":
            _, eidx, v_from, v_to = step
            edge = graph.street.edges[eidx]
            kind = KIND_DRIVE if op == "drive_edge" else KIND_WALK
            extend_street(kind, graph.street.vertices[v_from], graph.street.vertices[v_to],
                          edge.length_m, parent.time, label.time)
        elif op == "link_to_stop":
            stop = graph.indexes.stop_by_id[step[1]]
            extend_street(KIND_WALK, graph.street.vertices[step[2]], stop.point,
                          stop.link_length_m, parent.time, label.time)
        elif op == "link_to_street":
            stop = graph.indexes.stop_by_id[step[1]]
            extend_street(KIND_WALK, stop.point, graph.street.vertices[step[2]],
                          stop.link_length_m, parent.time, label.time)
        elif op == "board":
            flush_street()
            board = (step[1], step[2], step[3])
        elif op == "alight":
            trip_id, alight_pos, arrival = step[1], step[2], step[3]
            assert board is not None and board[0] == trip_id
            legs.append(_transit_leg(graph, trip_id, board[1], alight_pos, board[2], arrival))
            board = None
        # "ride" steps carry no leg content; positions come from board/alight

    flush_street()

    _absorb_waits(legs, graph)
    return _finish_itinerary(legs, fare_config)


def _transit_leg(graph: MultimodalGraph, trip_id: str, board_pos: int,
                 alight_pos: int, departure: GtfsTime, arrival: GtfsTime) -> Leg:
    events = graph.timetable.trip_events[trip_id]
    stops = [graph.indexes.stop_by_id[events[i].stop_id] for i in range(board_pos, alight_pos + 1)]
    trip = graph.trips[trip_id]
    route = graph.routes.get(trip.route_id)
    shape_pts = graph.shapes.get(trip.shape_id) if trip.shape_id else None
    if shape_pts and len(shape_pts) >= 2:
        geometry = list(shape_pts)
    else:
        geometry = [s.point for s in stops]
    return Leg(
        kind=KIND_TRANSIT,
        start_time=departure,
        end_time=arrival,
        distance_m=_polyline_length(geometry),
        geometry=geometry,
        route_id=trip.route_id,
        trip_id=trip_id,
        board_stop=stops[0].stop_id,
        alight_stop=stops[-1].stop_id,
        route_type=route.route_type if route else None,
    )


def _polyline_length(points: list[GeoPoint]) -> float:
    return sum(haversine_m(a, b) for a, b in zip(points, points[1:]))


def _absorb_waits(legs: list[Leg], graph: MultimodalGraph) -> None:
    """Make legs temporally contiguous by stretching street legs over waits."""
    i = 0
    while i < len(legs) - 1:
        gap = legs[i + 1].start_time - legs[i].end_time
        if gap > 0:
            if legs[i].kind == KIND_TRANSIT:
                # direct transfer at a stop: cover the wait with a zero-length walk leg
                stop = graph.indexes.stop_by_id[legs[i].alight_stop]
                legs.insert(i + 1, Leg(
                    kind=KIND_WALK, start_time=legs[i].end_time,
                    end_time=legs[i + 1].start_time, distance_m=0.0,
                    geometry=[stop.point, stop.point],
                ))
                i += 1
            else:
                legs[i].end_time = legs[i + 1].start_time
        i += 1


def _finish_itinerary(legs: list[Leg], fare_config) -> Itinerary:
    itinerary = Itinerary(
        legs=legs,
        duration_s=(legs[-1].end_time - legs[0].start_time) if legs else 0,
        total_distance_m=sum(l.distance_m for l in legs),
        walk_distance_m=sum(l.distance_m for l in legs if l.kind == KIND_WALK),
        estimated_fare=0.0,
        boardings=sum(1 for l in legs if l.kind == KIND_TRANSIT),
    )
    itinerary.estimated_fare = estimate_fare(itinerary, fare_config)
    return itinerary


def estimate_fare(itinerary: Itinerary, fare_config: dict[int, tuple[float, float]] | None) -> float:
    """Sum of base + per_km * km over transit legs; zero without a config."""
    if not fare_config:
        return 0.0
    total = 0.0
    for leg in itinerary.legs:
        if leg.kind != KIND_TRANSIT or leg.route_type is None:
            continue
        entry = fare_config.get(leg.route_type)
        if entry is None:
            continue
        base, per_km = entry
        total += base + per_km * (leg.distance_m / 1000.0)
    return total


def _leg_signature(itinerary: Itinerary) -> tuple:
    sig = []
    for leg in itinerary.legs:
        if leg.kind == KIND_TRANSIT:
            sig.append((leg.kind, leg.trip_id, leg.board_stop, leg.alight_stop))
        else:
            sig.append((leg.kind, tuple((p.lat, p.lon) for p in leg.geometry)))
    return tuple(sig)


# --- planning ----------------------------------------------------------------


def plan(
    graph: MultimodalGraph,
    request: PlanRequest,
    scenario_view=None,
    fare_config: dict[int, tuple[float, float]] | None = None,
) -> PlanResponse:
    """Plan up to num_itineraries alternatives; raises PlanError on failure."""
    request.validate()
    bbox = graph.meta.bbox
    origin_inside = bbox.contains(request.origin)
    destination_inside = bbox.contains(request.destination)
    if not origin_inside and not destination_inside:
        raise PlanError.boundary()

    mode = request.mode
    origin_vertex, origin_snap = nearest_vertex(graph, request.origin, mode)
    destination_vertex, destination_snap = nearest_vertex(graph, request.destination, mode)

    origin_leg: Leg | None = None
    start_time = request.depart_at
    if not origin_inside:
        duration = walk_seconds(origin_snap, request.walk_speed_mps)
        origin_leg = Leg(
            kind=KIND_WALK, start_time=request.depart_at,
            end_time=request.depart_at + duration, distance_m=origin_snap,
            geometry=[request.origin, graph.street.vertices[origin_vertex]],
            approximate=True,
        )
        start_time = origin_leg.end_time

    itineraries: list[Itinerary] = []
    signatures: set[tuple] = set()
    banned: set[str] = set()
    iterations = 0
    while len(itineraries) < request.num_itineraries:
        iterations += 1
        result = earliest_arrival(
            graph, request, scenario_view,
            origin_vertex=origin_vertex, destination_vertex=destination_vertex,
            start_time=start_time, banned_trips=frozenset(banned),
        )
        if result is None:
            break
        arrival, final_label = result
        if final_label.parent is None:
            # origin and destination snap to the same vertex
            point = graph.street.vertices[origin_vertex]
            itinerary = _finish_itinerary(
                [Leg(kind=KIND_WALK, start_time=start_time, end_time=start_time,
                     distance_m=0.0, geometry=[point, point])], fare_config)
        else:
            itinerary = assemble_itinerary(final_label, graph, fare_config)
        if not destination_inside:
            duration = walk_seconds(destination_snap, request.walk_speed_mps)
            itinerary.legs.append(Leg(
                kind=KIND_WALK, start_time=arrival, end_time=arrival + duration,
                distance_m=destination_snap,
                geometry=[graph.street.vertices[destination_vertex], request.destination],
                approximate=True,
            ))
        if origin_leg is not None:
            itinerary.legs.insert(0, replace(origin_leg, geometry=list(origin_leg.geometry)))
        if origin_leg is not None or not destination_inside:
            itinerary = _finish_itinerary(itinerary.legs, fare_config)

        signature = _leg_signature(itinerary)
        if signature in signatures:
            break
        signatures.add(signature)
        itineraries.append(itinerary)
        banned.update(l.trip_id for l in itinerary.legs if l.kind == KIND_TRANSIT)

    if not itineraries:
        raise PlanError.no_path()

    itineraries.sort(key=lambda i: (i.legs[-1].end_time, i.boardings))
    return PlanResponse(
        itineraries=itineraries,
        diagnostics={
            "origin_snap_m": origin_snap,
            "destination_snap_m": destination_snap,
            "ban_iterations": iterations,
        },
    )


# --- wire format -------------------------------------------------------------


def leg_to_dict(leg: Leg) -> dict:
    doc = {
        "kind": leg.kind,
        "start_time": format_gtfs_time(leg.start_time),
        "end_time": format_gtfs_time(leg.end_time),
        "distance_m": round(leg.distance_m, 2),
        "geometry": [[p.lat, p.lon] for p in leg.geometry],
        "approximate": leg.approximate,
    }
    if leg.kind == KIND_TRANSIT:
        doc.update({
            "route_id": leg.route_id,
            "trip_id": leg.trip_id,
            "board_stop": leg.board_stop,
            "alight_stop": leg.alight_stop,
            "route_type": leg.route_type,
        })
    return doc


def itinerary_to_dict(itinerary: Itinerary) -> dict:
    return {
        "legs": [leg_to_dict(l) for l in itinerary.legs],
        "duration_s": itinerary.duration_s,
        "total_distance_m": round(itinerary.total_distance_m, 2),
        "walk_distance_m": round(itinerary.walk_distance_m, 2),
        "estimated_fare": round(itinerary.estimated_fare, 2),
        "boardings": itinerary.boardings,
    }


def response_to_dict(response: PlanResponse) -> dict:
    return {
        "itineraries": [itinerary_to_dict(i) for i in response.itineraries],
        "diagnostics": response.diagnostics,
    }
