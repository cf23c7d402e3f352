"""Name-to-coordinates lookup over OSM named nodes and ways.

Matching is case-insensitive substring search over normalized names, ranked
exact > prefix > substring, then by name length and lexicographic order, so
repeated queries always return the same list.
"""

from __future__ import annotations

from dataclasses import dataclass

from .osm import GeoPoint, OsmDocument

# First tag key present decides the entry's category.
_KIND_KEYS = ("amenity", "shop", "tourism", "leisure", "place", "building",
              "highway", "landuse", "natural", "railway", "public_transport")


@dataclass(frozen=True)
class PlaceEntry:
    name: str
    point: GeoPoint
    source_type: str  # "node" or "way"
    source_id: int
    kind: str


@dataclass
class GeocodeIndex:
    entries: list[PlaceEntry]
    _normalized: list[str]

    def __len__(self) -> int:
        return len(self.entries)


def normalize_name(name: str) -> str:
    return " ".join(name.casefold().split())


def _kind_of(tags: dict[str, str]) -> str:
    for key in _KIND_KEYS:
        if key in tags:
            return tags[key]
    return "other"


def build_place_index(doc: OsmDocument) -> GeocodeIndex:
    """One entry per named node or way; way position is its vertex-coordinate centroid."""
    entries: list[PlaceEntry] = []
    for node in doc.nodes.values():
        name = node.tags.get("name", "").strip()
        if name:
            entries.append(PlaceEntry(name, node.point, "node", node.id, _kind_of(node.tags)))
    for way in doc.ways:
        name = way.tags.get("name", "").strip()
        if not name:
            continue
        points = [doc.nodes[r].point for r in way.node_refs if r in doc.nodes]
        if not points:
            continue
        centroid = GeoPoint(
            sum(p.lat for p in points) / len(points),
            sum(p.lon for p in points) / len(points),
        )
        entries.append(PlaceEntry(name, centroid, "way", way.id, _kind_of(way.tags)))
    return GeocodeIndex(entries=entries, _normalized=[normalize_name(e.name) for e in entries])


def geocode(index: GeocodeIndex, query: str, limit: int = 10) -> list[PlaceEntry]:
    """Ranked matches: exact first, then prefix, then substring; shorter names win ties."""
    q = normalize_name(query)
    if not q:
        return []
    ranked: list[tuple[int, int, str, int]] = []  # tier, length, normalized name, entry index
    for i, name in enumerate(index._normalized):
        if name == q:
            tier = 0
        elif name.startswith(q):
            tier = 1
        elif q in name:
            tier = 2
        else:
            continue
        ranked.append((tier, len(name), name, i))
    ranked.sort()
    return [index.entries[i] for _, _, _, i in ranked[:limit]]
