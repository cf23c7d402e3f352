"""OSM XML parsing and street-network extraction.

Reads the public OSM XML schema (node, way, nd, tag elements; relations are
ignored) and derives a walk/drive street graph from a fixed highway-class
whitelist. Vertices keep their OSM node ids.
"""

from __future__ import annotations

import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import EmptyNetwork, XmlError

logger = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0

WALK_SPEED_MPS = 1.33

# km/h by highway class for DRIVE mode.
DRIVE_SPEED_KMH = {
    "residential": 30, "service": 30, "living_street": 30,
    "unclassified": 40, "tertiary": 40,
    "secondary": 50,
    "primary": 60,
    "trunk": 80,
    "motorway": 100, "motorway_link": 100,
}

WALK_ONLY_CLASSES = frozenset({"footway", "path", "pedestrian", "steps"})
WALK_DRIVE_CLASSES = frozenset({
    "residential", "unclassified", "tertiary", "secondary", "primary",
    "trunk", "service", "living_street",
})
DRIVE_ONLY_CLASSES = frozenset({"motorway", "motorway_link"})
ROUTABLE_CLASSES = WALK_ONLY_CLASSES | WALK_DRIVE_CLASSES | DRIVE_ONLY_CLASSES


class GeoPoint(NamedTuple):
    lat: float
    lon: float


class BBox(NamedTuple):
    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def contains(self, p: GeoPoint) -> bool:
        return self.min_lat <= p.lat <= self.max_lat and self.min_lon <= p.lon <= self.max_lon

    def union_point(self, p: GeoPoint) -> "BBox":
        return BBox(
            min(self.min_lat, p.lat), min(self.min_lon, p.lon),
            max(self.max_lat, p.lat), max(self.max_lon, p.lon),
        )


@dataclass(frozen=True)
class OsmNode:
    id: int
    point: GeoPoint
    tags: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class OsmWay:
    id: int
    node_refs: tuple[int, ...]
    tags: dict[str, str] = field(default_factory=dict)


@dataclass
class OsmDocument:
    nodes: dict[int, OsmNode] = field(default_factory=dict)
    ways: list[OsmWay] = field(default_factory=list)
    bounds: BBox | None = None

    def dangling_refs(self, way: OsmWay) -> list[int]:
        return [r for r in way.node_refs if r not in self.nodes]


@dataclass(frozen=True)
class StreetEdge:
    from_vertex: int
    to_vertex: int
    length_m: float
    way_id: int
    highway_class: str
    walk_permitted: bool
    drive_permitted: bool
    oneway_drive: bool


@dataclass
class StreetNetwork:
    vertices: dict[int, GeoPoint]
    edges: list[StreetEdge]
    bbox: BBox


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a sphere of radius 6,371,000 m."""
    lat1, lon1, lat2, lon2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def parse_osm_xml(data: bytes | str) -> OsmDocument:
    """Parse node and way elements; relations are ignored, dangling way refs kept."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlError(exc.position, str(exc)) from exc

    doc = OsmDocument()
    bounds = root.find("bounds")
    if bounds is not None and all(k in bounds.attrib for k in ("minlat", "minlon", "maxlat", "maxlon")):
        doc.bounds = BBox(
            float(bounds.attrib["minlat"]), float(bounds.attrib["minlon"]),
            float(bounds.attrib["maxlat"]), float(bounds.attrib["maxlon"]),
        )

    for el in root:
        if el.tag == "node":
            node = OsmNode(
                id=int(el.attrib["id"]),
                point=GeoPoint(float(el.attrib["lat"]), float(el.attrib["lon"])),
                tags={t.attrib["k"]: t.attrib["v"] for t in el if t.tag == "tag"},
            )
            doc.nodes[node.id] = node
        elif el.tag == "way":
            way = OsmWay(
                id=int(el.attrib["id"]),
                node_refs=tuple(int(nd.attrib["ref"]) for nd in el if nd.tag == "nd"),
                tags={t.attrib["k"]: t.attrib["v"] for t in el if t.tag == "tag"},
            )
            doc.ways.append(way)
    return doc


def way_permissions(tags: dict[str, str]) -> tuple[bool, bool] | None:
    """(walk, drive) for a routable way, or None when the way is not traversable."""
    highway = tags.get("highway")
    if highway is None or highway not in ROUTABLE_CLASSES:
        return None
    if tags.get("access") == "no" or tags.get("area") == "yes":
        return None
    if highway in WALK_ONLY_CLASSES:
        return True, False
    if highway in DRIVE_ONLY_CLASSES:
        return False, True
    return True, True


def extract_street_network(doc: OsmDocument) -> StreetNetwork:
    """One vertex per node used by a routable way; one edge per consecutive node pair."""
    vertices: dict[int, GeoPoint] = {}
    edges: list[StreetEdge] = []

    for way in doc.ways:
        perms = way_permissions(way.tags)
        if perms is None:
            continue
        walk, drive = perms
        oneway = way.tags.get("oneway", "").lower() in ("yes", "true", "1")
        refs = [r for r in way.node_refs if r in doc.nodes]
        dropped = len(way.node_refs) - len(refs)
        if dropped:
            logger.warning("way %d: dropped %d dangling node ref(s)", way.id, dropped)
        for a, b in zip(refs, refs[1:]):
            pa, pb = doc.nodes[a].point, doc.nodes[b].point
            length = haversine_m(pa, pb)
            if length <= 0.0:
                logger.warning("way %d: skipping zero-length segment %d-%d", way.id, a, b)
                continue
            vertices.setdefault(a, pa)
            vertices.setdefault(b, pb)
            edges.append(StreetEdge(
                from_vertex=a, to_vertex=b, length_m=length, way_id=way.id,
                highway_class=way.tags["highway"],
                walk_permitted=walk, drive_permitted=drive, oneway_drive=oneway,
            ))

    if not edges:
        raise EmptyNetwork("no routable street edges in document")

    points = iter(vertices.values())
    first = next(points)
    bbox = doc.bounds if doc.bounds is not None else BBox(first.lat, first.lon, first.lat, first.lon)
    for p in vertices.values():
        bbox = bbox.union_point(p)
    return StreetNetwork(vertices=vertices, edges=edges, bbox=bbox)
