from __future__ import annotations

import math
import random

import pytest

from mmtp.errors import EmptyNetwork, XmlError
from mmtp.osm import (
    GeoPoint,
    extract_street_network,
    haversine_m,
    parse_osm_xml,
    way_permissions,
)


def chord_geodesic_m(a: GeoPoint, b: GeoPoint) -> float:
    """Independent geodesic oracle: 3D chord through the sphere, then arc length."""
    la1, lo1, la2, lo2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    p1 = (math.cos(la1) * math.cos(lo1), math.cos(la1) * math.sin(lo1), math.sin(la1))
    p2 = (math.cos(la2) * math.cos(lo2), math.cos(la2) * math.sin(lo2), math.sin(la2))
    chord = math.dist(p1, p2)
    return 2.0 * 6_371_000.0 * math.asin(min(1.0, chord / 2.0))


def osm_doc(body: str) -> bytes:
    return f'<?xml version="1.0"?><osm version="0.6">{body}</osm>'.encode()


FOUR_NODE_WAY = osm_doc(
    '<node id="1" lat="14.600" lon="121.000"/>'
    '<node id="2" lat="14.605" lon="121.000"/>'
    '<node id="3" lat="14.610" lon="121.000"/>'
    '<node id="4" lat="14.615" lon="121.000"/>'
    '<way id="10"><nd ref="1"/><nd ref="2"/><nd ref="3"/><nd ref="4"/>'
    '<tag k="highway" v="residential"/></way>'
)


class TestHaversine:
    def test_known_distance(self):
        a, b = GeoPoint(14.6000, 121.0000), GeoPoint(14.6050, 121.0000)
        expected = chord_geodesic_m(a, b)
        assert haversine_m(a, b) == pytest.approx(expected, rel=1e-7)
        assert haversine_m(a, b) == pytest.approx(556.0, rel=0.005)

    def test_identity(self):
        p = GeoPoint(14.6, 121.0)
        assert haversine_m(p, p) == 0.0

    def test_antipodal(self):
        d = haversine_m(GeoPoint(0.0, 0.0), GeoPoint(0.0, 180.0))
        assert d == pytest.approx(math.pi * 6_371_000.0, rel=0.001)

    def test_symmetry_and_triangle_inequality(self):
        rng = random.Random(4711)
        for _ in range(1000):
            base_lat = rng.uniform(-60, 60)
            base_lon = rng.uniform(-179, 179)
            pts = [GeoPoint(base_lat + rng.uniform(0, 1), base_lon + rng.uniform(0, 1))
                   for _ in range(3)]
            a, b, c = pts
            assert haversine_m(a, b) == haversine_m(b, a)
            ab, bc, ac = haversine_m(a, b), haversine_m(b, c), haversine_m(a, c)
            assert ac <= ab + bc + 1e-6 * max(1.0, ac)


class TestParseOsmXml:
    def test_fixture_counts(self):
        doc = parse_osm_xml(FOUR_NODE_WAY)
        assert len(doc.nodes) == 4
        assert len(doc.ways) == 1
        assert doc.ways[0].node_refs == (1, 2, 3, 4)

    def test_dangling_ref_kept_in_document(self):
        doc = parse_osm_xml(osm_doc(
            '<node id="1" lat="14.6" lon="121.0"/>'
            '<node id="2" lat="14.7" lon="121.0"/>'
            '<way id="10"><nd ref="1"/><nd ref="99"/><nd ref="2"/>'
            '<tag k="highway" v="residential"/></way>'
        ))
        assert doc.ways[0].node_refs == (1, 99, 2)
        assert doc.dangling_refs(doc.ways[0]) == [99]

    def test_truncated_file(self):
        with pytest.raises(XmlError):
            parse_osm_xml(b'<?xml version="1.0"?><osm><node id="1" lat="1"')

    def test_bounds_element(self):
        doc = parse_osm_xml(osm_doc('<bounds minlat="1" minlon="2" maxlat="3" maxlon="4"/>'))
        assert doc.bounds == (1.0, 2.0, 3.0, 4.0)

    def test_relations_ignored(self):
        doc = parse_osm_xml(osm_doc('<relation id="5"><member type="way" ref="10"/></relation>'))
        assert not doc.nodes and not doc.ways


class TestExtractStreetNetwork:
    def test_collinear_way_edge_lengths(self):
        network = extract_street_network(parse_osm_xml(FOUR_NODE_WAY))
        assert len(network.vertices) == 4
        assert len(network.edges) == 3
        for edge in network.edges:
            a = network.vertices[edge.from_vertex]
            b = network.vertices[edge.to_vertex]
            assert edge.length_m == pytest.approx(chord_geodesic_m(a, b), rel=1e-7)
            assert edge.length_m == pytest.approx(556.0, rel=0.005)
            assert edge.walk_permitted and edge.drive_permitted

    def test_motorway_is_drive_only(self):
        doc = parse_osm_xml(osm_doc(
            '<node id="1" lat="14.60" lon="121.00"/><node id="2" lat="14.61" lon="121.00"/>'
            '<way id="10"><nd ref="1"/><nd ref="2"/><tag k="highway" v="motorway"/></way>'
        ))
        edge = extract_street_network(doc).edges[0]
        assert edge.drive_permitted and not edge.walk_permitted

    def test_footway_is_walk_only(self):
        doc = parse_osm_xml(osm_doc(
            '<node id="1" lat="14.60" lon="121.00"/><node id="2" lat="14.61" lon="121.00"/>'
            '<way id="10"><nd ref="1"/><nd ref="2"/><tag k="highway" v="footway"/></way>'
        ))
        edge = extract_street_network(doc).edges[0]
        assert edge.walk_permitted and not edge.drive_permitted

    def test_buildings_only_is_empty(self):
        doc = parse_osm_xml(osm_doc(
            '<node id="1" lat="14.60" lon="121.00"/><node id="2" lat="14.61" lon="121.00"/>'
            '<way id="10"><nd ref="1"/><nd ref="2"/><tag k="building" v="yes"/></way>'
        ))
        with pytest.raises(EmptyNetwork):
            extract_street_network(doc)

    def test_dangling_refs_dropped_at_extraction(self):
        doc = parse_osm_xml(osm_doc(
            '<node id="1" lat="14.600" lon="121.000"/>'
            '<node id="2" lat="14.605" lon="121.000"/>'
            '<way id="10"><nd ref="1"/><nd ref="99"/><nd ref="2"/>'
            '<tag k="highway" v="residential"/></way>'
        ))
        network = extract_street_network(doc)
        assert len(network.edges) == 1  # 1-2 after 99 is dropped
        assert {network.edges[0].from_vertex, network.edges[0].to_vertex} == {1, 2}

    def test_oneway_flag(self):
        doc = parse_osm_xml(osm_doc(
            '<node id="1" lat="14.60" lon="121.00"/><node id="2" lat="14.61" lon="121.00"/>'
            '<way id="10"><nd ref="1"/><nd ref="2"/>'
            '<tag k="highway" v="primary"/><tag k="oneway" v="yes"/></way>'
        ))
        assert extract_street_network(doc).edges[0].oneway_drive

    def test_access_no_excluded(self):
        assert way_permissions({"highway": "residential", "access": "no"}) is None
        assert way_permissions({"highway": "pedestrian", "area": "yes"}) is None

    def test_deterministic(self):
        data = FOUR_NODE_WAY
        n1 = extract_street_network(parse_osm_xml(data))
        n2 = extract_street_network(parse_osm_xml(data))
        assert list(n1.vertices) == list(n2.vertices)
        assert n1.edges == n2.edges
        assert n1.bbox == n2.bbox

    def test_edge_length_matches_endpoint_haversine(self, minimetro_street):
        for edge in minimetro_street.edges:
            a = minimetro_street.vertices[edge.from_vertex]
            b = minimetro_street.vertices[edge.to_vertex]
            assert edge.length_m == haversine_m(a, b)

    def test_bbox_contains_all_vertices(self, minimetro_street):
        for p in minimetro_street.vertices.values():
            assert minimetro_street.bbox.contains(p)
