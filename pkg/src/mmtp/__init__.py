"""Multimodal public-transport trip planner.

Builds a routable graph from GTFS feeds and OSM street extracts, answers
origin/destination queries with annotated itinerary alternatives, and
supports disaster-scenario overlays for relief-vehicle routing.
"""

__version__ = "0.1.0"
