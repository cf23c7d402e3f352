from __future__ import annotations

import random
from datetime import date

import pytest

from mmtp.errors import PlanError
from mmtp.graph import MODE_TRANSIT_WALK, MODE_WALK, serialize_graph
from mmtp.osm import GeoPoint
from mmtp.router import PlanRequest, earliest_arrival, plan, response_to_dict
from mmtp.scenario import (
    GeoPolygon,
    Scenario,
    apply_scenario,
    point_in_polygon,
    scenario_from_dict,
    scenario_to_dict,
)
from mmtp.gtfs import parse_gtfs_time as T

from oracle import oracle_earliest_arrival

TUESDAY = date(2013, 11, 12)
NODE1 = GeoPoint(14.6000, 121.0000)
NODE5 = GeoPoint(14.6200, 121.0000)

UNIT_SQUARE = GeoPolygon((GeoPoint(0, 0), GeoPoint(0, 1), GeoPoint(1, 1), GeoPoint(1, 0)))


def base_request(**kwargs) -> PlanRequest:
    defaults = dict(origin=NODE1, destination=NODE5, date=TUESDAY,
                    depart_at=T("07:55:00"), mode=MODE_TRANSIT_WALK)
    defaults.update(kwargs)
    return PlanRequest(**defaults)


class TestPointInPolygon:
    def test_interior(self):
        assert point_in_polygon(UNIT_SQUARE, GeoPoint(0.5, 0.5)) is True

    def test_exterior(self):
        assert point_in_polygon(UNIT_SQUARE, GeoPoint(2, 2)) is False

    def test_on_edge_counts_inside(self):
        assert point_in_polygon(UNIT_SQUARE, GeoPoint(0, 0.5)) is True
        assert point_in_polygon(UNIT_SQUARE, GeoPoint(0.5, 0.0)) is True
        assert point_in_polygon(UNIT_SQUARE, GeoPoint(1, 1)) is True

    def test_concave_polygon(self):
        # L-shape: notch cut from the top right
        poly = GeoPolygon(tuple(GeoPoint(lat, lon) for lat, lon in
                                [(0, 0), (0, 2), (1, 2), (1, 1), (2, 1), (2, 0)]))
        assert point_in_polygon(poly, GeoPoint(0.5, 1.5)) is True
        assert point_in_polygon(poly, GeoPoint(1.5, 1.5)) is False

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            GeoPolygon((GeoPoint(0, 0), GeoPoint(1, 1)))


class TestApplyScenario:
    def test_closed_way_blocks_walk_plan(self, minimetro_graph):
        view = apply_scenario(minimetro_graph, Scenario(id="s1", closed_way_ids={100}))
        assert len(view.closed_edge_indexes) == len(minimetro_graph.street.edges)
        with pytest.raises(PlanError) as exc_info:
            plan(minimetro_graph, base_request(mode=MODE_WALK,
                                               destination=GeoPoint(14.6050, 121.0)), view)
        assert exc_info.value.kind == "no_path"
        # brute-force agrees the pruned graph has no path
        assert oracle_earliest_arrival(
            minimetro_graph, base_request(mode=MODE_WALK), 1, 2, scenario_view=view) is None

    def test_empty_scenario_is_identity(self, minimetro_graph):
        view = apply_scenario(minimetro_graph, Scenario(id="empty"))
        base = response_to_dict(plan(minimetro_graph, base_request()))
        overlaid = response_to_dict(plan(minimetro_graph, base_request(), view))
        assert base == overlaid

    def test_area_disables_contained_stop_but_trip_passes_through(self, minimetro_graph):
        square = GeoPolygon(tuple(GeoPoint(lat, lon) for lat, lon in
                                  [(14.6095, 120.9995), (14.6095, 121.0007),
                                   (14.6107, 121.0007), (14.6107, 120.9995)]))
        view = apply_scenario(minimetro_graph, Scenario(id="areaB", closed_areas=[square]))
        assert "B" in view.disabled_stop_ids
        response = plan(minimetro_graph, base_request(), view)
        for itinerary in response.itineraries:
            for leg in itinerary.legs:
                assert leg.board_stop != "B"
                assert leg.alight_stop != "B"
        # the A->C run on T1 still serves end to end at the base arrival time
        arrival_base = earliest_arrival(minimetro_graph, base_request())[0]
        arrival_view = earliest_arrival(minimetro_graph, base_request(), view)[0]
        assert arrival_view == arrival_base

    def test_disabling_boarding_stop_forces_detour_or_failure(self, minimetro_graph):
        view = apply_scenario(minimetro_graph, Scenario(id="noA", disabled_stop_ids={"A"}))
        # origin near A: cannot board there; B is 1112 m of walking away, over budget
        with pytest.raises(PlanError):
            plan(minimetro_graph, base_request(), view)

    def test_disabled_route_bans_its_trips(self, minimetro_graph):
        view = apply_scenario(minimetro_graph, Scenario(id="noR1", disabled_route_ids={"R1"}))
        assert view.disabled_trip_ids == frozenset({"T1"})
        response = plan(minimetro_graph, base_request(), view)
        used = {l.trip_id for i in response.itineraries for l in i.legs if l.kind == "TRANSIT"}
        assert used == {"TF"}

    def test_non_destructive(self, minimetro_graph):
        before = serialize_graph(minimetro_graph)
        apply_scenario(minimetro_graph, Scenario(
            id="x", closed_way_ids={100}, closed_areas=[UNIT_SQUARE],
            disabled_stop_ids={"A"}, disabled_route_ids={"R1"}))
        assert serialize_graph(minimetro_graph) == before

    def test_monotonicity_random_scenarios(self, minimetro_graph, minimetro3_graph):
        rng = random.Random(99)
        queries = [base_request(), base_request(depart_at=T("06:05:00")),
                   base_request(mode=MODE_WALK, max_walk_m=3000.0)]
        for graph in (minimetro_graph, minimetro3_graph):
            base_arrivals = {}
            for qi, req in enumerate(queries):
                result = earliest_arrival(graph, req)
                base_arrivals[qi] = result[0] if result else None
            for si in range(10):
                scenario = _random_scenario(rng, si)
                view = apply_scenario(graph, scenario)
                for qi, req in enumerate(queries):
                    result = earliest_arrival(graph, req, view)
                    arrival = result[0] if result else None
                    if base_arrivals[qi] is None:
                        assert arrival is None
                    elif arrival is not None:
                        assert arrival >= base_arrivals[qi]

    def test_composition_equals_union(self, minimetro_graph):
        v1 = apply_scenario(minimetro_graph, Scenario(id="a", closed_way_ids={100}))
        v2 = apply_scenario(minimetro_graph, Scenario(id="b", disabled_stop_ids={"A"},
                                                      closed_areas=[UNIT_SQUARE]))
        union = apply_scenario(minimetro_graph, Scenario(
            id="ab", closed_way_ids={100}, disabled_stop_ids={"A"},
            closed_areas=[UNIT_SQUARE]))
        assert union.closed_edge_indexes == v1.closed_edge_indexes | v2.closed_edge_indexes
        assert union.disabled_stop_ids == v1.disabled_stop_ids | v2.disabled_stop_ids


def _random_scenario(rng: random.Random, index: int) -> Scenario:
    scenario = Scenario(id=f"rand{index}")
    if rng.random() < 0.4:
        scenario.closed_way_ids.add(rng.choice([100, 200, 999]))
    if rng.random() < 0.5:
        lat = rng.uniform(14.598, 14.620)
        lon = rng.uniform(120.998, 121.002)
        d = rng.uniform(0.0005, 0.004)
        scenario.closed_areas.append(GeoPolygon((
            GeoPoint(lat - d, lon - d), GeoPoint(lat - d, lon + d),
            GeoPoint(lat + d, lon + d), GeoPoint(lat + d, lon - d))))
    if rng.random() < 0.3:
        scenario.disabled_stop_ids.add(rng.choice(["A", "B", "C", "B1"]))
    if rng.random() < 0.2:
        scenario.disabled_route_ids.add(rng.choice(["R1", "R2", "RF"]))
    return scenario


class TestScenarioJson:
    def test_roundtrip(self):
        scenario = Scenario(
            id="s1", name="flood", closed_way_ids={100, 200},
            closed_areas=[UNIT_SQUARE], disabled_stop_ids={"A"},
            disabled_route_ids={"R1"})
        assert scenario_from_dict(scenario_to_dict(scenario)) == scenario

    def test_wire_schema(self):
        doc = scenario_to_dict(Scenario(id="s1", closed_areas=[UNIT_SQUARE]))
        assert set(doc) == {"id", "name", "closed_way_ids", "closed_areas",
                            "disabled_stop_ids", "disabled_route_ids"}
        assert doc["closed_areas"] == [[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]]

    def test_two_point_polygon_rejected(self):
        with pytest.raises(ValueError):
            scenario_from_dict({"id": "bad", "closed_areas": [[[0, 0], [1, 1]]]})

    def test_empty_id_rejected(self):
        with pytest.raises(ValueError):
            scenario_from_dict({"id": ""})
