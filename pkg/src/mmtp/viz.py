"""Render the street network, stops, and itineraries to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.lines import Line2D

from .graph import MultimodalGraph
from .router import Itinerary, KIND_TRANSIT, KIND_WALK

_ITINERARY_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:purple", "tab:brown")


def render_network(
    graph: MultimodalGraph,
    path: str,
    itineraries: list[Itinerary] | None = None,
    scenario_view=None,
    dpi: int = 150,
) -> None:
    """Draw streets (grey), stops (red), closed edges (red x), and itineraries."""
    fig, ax = plt.subplots(figsize=(8, 8))
    closed = scenario_view.closed_edge_indexes if scenario_view is not None else frozenset()

    for idx, edge in enumerate(graph.street.edges):
        a = graph.street.vertices[edge.from_vertex]
        b = graph.street.vertices[edge.to_vertex]
        if idx in closed:
            ax.plot([a.lon, b.lon], [a.lat, b.lat], color="red", linewidth=1.6, alpha=0.9)
        else:
            color = "0.55" if edge.walk_permitted else "0.8"
            ax.plot([a.lon, b.lon], [a.lat, b.lat], color=color, linewidth=0.8)

    disabled_stops = scenario_view.disabled_stop_ids if scenario_view is not None else frozenset()
    for stop in graph.stops:
        marker = "x" if stop.stop_id in disabled_stops else "o"
        ax.plot(stop.point.lon, stop.point.lat, marker, color="firebrick", markersize=5)
        ax.annotate(stop.stop_id, (stop.point.lon, stop.point.lat),
                    fontsize=7, xytext=(3, 3), textcoords="offset points")

    for i, itinerary in enumerate(itineraries or []):
        color = _ITINERARY_COLORS[i % len(_ITINERARY_COLORS)]
        for leg in itinerary.legs:
            lons = [p.lon for p in leg.geometry]
            lats = [p.lat for p in leg.geometry]
            if leg.approximate:
                style = dict(linestyle=":", linewidth=1.2)
            elif leg.kind == KIND_WALK:
                style = dict(linestyle="--", linewidth=1.4)
            else:
                style = dict(linestyle="-", linewidth=2.2)
            ax.plot(lons, lats, color=color, **style)

    handles = [
        Line2D([], [], color="0.55", linewidth=0.8, label="street"),
        Line2D([], [], color="firebrick", marker="o", linestyle="", label="stop"),
    ]
    if itineraries:
        handles.append(Line2D([], [], color=_ITINERARY_COLORS[0], linewidth=2.2, label="transit leg"))
        handles.append(Line2D([], [], color=_ITINERARY_COLORS[0], linestyle="--", label="walk leg"))
    if closed:
        handles.append(Line2D([], [], color="red", linewidth=1.6, label="closed"))
    ax.legend(handles=handles, loc="best", fontsize=8)
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def render_departures_histogram(graph: MultimodalGraph, path: str, dpi: int = 150) -> None:
    """Histogram of scheduled departure hours across all stops."""
    hours = [
        dep.departure // 3600
        for deps in graph.timetable.stop_departures.values()
        for dep in deps
    ]
    fig, ax = plt.subplots(figsize=(8, 4))
    if hours:
        ax.hist(hours, bins=range(0, max(hours) + 2), color="steelblue", edgecolor="white")
    ax.set_xlabel("hour of service day")
    ax.set_ylabel("departures")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
