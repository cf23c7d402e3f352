"""HTTP planning API over a loaded graph.

Endpoints: /plan, /geocode, /scenarios CRUD, /health, /graph/meta. Every
/plan call appends one JSON line to the query log, success or failure; the
graph itself is immutable and shared by all requests. Query parameters are
validated by hand so malformed input yields 400 while planning failures
keep 422.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import MalformedTime, MmtpError, PlanError
from .geocode import GeocodeIndex, build_place_index, geocode
from .graph import MODE_TRANSIT_WALK, MODES, MultimodalGraph, load_graph
from .gtfs import parse_gtfs_time
from .osm import WALK_SPEED_MPS, GeoPoint, parse_osm_xml
from .router import PlanRequest, plan, response_to_dict
from .scenario import Scenario, apply_scenario, scenario_from_dict, scenario_to_dict

logger = logging.getLogger(__name__)

_LATLON_RE = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*$")


@dataclass
class ServiceConfig:
    graph_path: str
    listen_address: str = "127.0.0.1:8000"
    osm_path: str | None = None
    fare_config: dict[int, tuple[float, float]] = field(default_factory=dict)
    max_walk_m: float = 800.0
    num_itineraries: int = 3
    walk_speed: float = WALK_SPEED_MPS
    log_path: str = "query_log.jsonl"
    static_dir: str | None = None

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rsplit(":", 1)[1])


def load_config(path: str | Path) -> ServiceConfig:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "graph_path" not in doc:
        raise ValueError("config is missing graph_path")
    defaults = doc.get("defaults", {})
    fare_config = {
        int(route_type): (float(pair[0]), float(pair[1]))
        for route_type, pair in doc.get("fare_config", {}).items()
    }
    config = ServiceConfig(
        graph_path=doc["graph_path"],
        listen_address=doc.get("listen_address", "127.0.0.1:8000"),
        osm_path=doc.get("osm_path"),
        fare_config=fare_config,
        max_walk_m=float(defaults.get("max_walk_m", 800.0)),
        num_itineraries=int(defaults.get("num_itineraries", 3)),
        walk_speed=float(defaults.get("walk_speed", WALK_SPEED_MPS)),
        log_path=doc.get("log_path", "query_log.jsonl"),
        static_dir=doc.get("static_dir"),
    )
    if not Path(config.graph_path).exists():
        raise ValueError(f"graph_path does not exist: {config.graph_path}")
    return config


class QueryLog:
    """Append-only JSON-lines log; writes are serialized so lines never interleave."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True, ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=400)


def _not_found(message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=404)


def _loading() -> JSONResponse:
    return JSONResponse({"error": "graph is still loading"}, status_code=503)


def create_app(
    config: ServiceConfig,
    graph: MultimodalGraph | None = None,
    place_index: GeocodeIndex | None = None,
) -> FastAPI:
    """Build the app; pass a graph to skip loading from config.graph_path."""
    state: dict = {
        "graph": graph,
        "index": place_index,
        "scenarios": {},
        "log": QueryLog(config.log_path),
    }
    scenario_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        if state["graph"] is None:
            state["graph"] = load_graph(config.graph_path)
            logger.info("graph loaded from %s", config.graph_path)
        if state["index"] is None:
            if config.osm_path:
                with open(config.osm_path, "rb") as fh:
                    state["index"] = build_place_index(parse_osm_xml(fh.read()))
            else:
                state["index"] = GeocodeIndex(entries=[], _normalized=[])
        yield

    app = FastAPI(title="mmtp", docs_url=None, redoc_url=None, lifespan=lifespan)

    @app.get("/health")
    def health():
        if state["graph"] is None:
            return _loading()
        return {"status": "ok"}

    @app.get("/graph/meta")
    def graph_meta():
        g: MultimodalGraph | None = state["graph"]
        if g is None:
            return _loading()
        return {
            "bbox": {
                "min_lat": g.meta.bbox.min_lat, "min_lon": g.meta.bbox.min_lon,
                "max_lat": g.meta.bbox.max_lat, "max_lon": g.meta.bbox.max_lon,
            },
            "counts": {
                "vertices": len(g.street.vertices),
                "edges": len(g.street.edges),
                "stops": len(g.stops),
                "trips": len(g.trips),
            },
            "build_timestamp": g.meta.build_timestamp,
            "format_version": g.meta.format_version,
        }

    @app.get("/graph/stops")
    def graph_stops():
        g: MultimodalGraph | None = state["graph"]
        if g is None:
            return _loading()
        return [
            {"stop_id": s.stop_id, "lat": s.point.lat, "lon": s.point.lon,
             "linked": s.linked_street_vertex is not None}
            for s in g.stops
        ]

    @app.get("/geocode")
    def geocode_endpoint(request: Request):
        if state["graph"] is None:
            return _loading()
        params = request.query_params
        q = params.get("q")
        if q is None:
            return _bad_request("missing required parameter: q")
        try:
            limit = int(params.get("limit", "10"))
        except ValueError:
            return _bad_request("limit must be an integer")
        if limit < 1:
            return _bad_request("limit must be >= 1")
        entries = geocode(state["index"], q, limit)
        return [{"name": e.name, "lat": e.point.lat, "lon": e.point.lon} for e in entries]

    def _resolve_place(value: str) -> GeoPoint | None:
        m = _LATLON_RE.match(value)
        if m:
            return GeoPoint(float(m.group(1)), float(m.group(2)))
        hits = geocode(state["index"], value, 1)
        if not hits:
            return None
        return hits[0].point

    @app.get("/plan")
    def plan_endpoint(request: Request):
        if state["graph"] is None:
            return _loading()
        started = time.perf_counter()
        params = dict(request.query_params)
        response, error_code, itinerary_count = _handle_plan(params)
        state["log"].append({
            "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
            "params": params,
            "itineraries": itinerary_count,
            "compute_ms": round((time.perf_counter() - started) * 1000.0, 3),
            "error": error_code,
        })
        return response

    def _handle_plan(params: dict) -> tuple[JSONResponse, str | None, int]:
        for required in ("fromPlace", "toPlace", "date", "time"):
            if required not in params:
                return _bad_request(f"missing required parameter: {required}"), "bad_request", 0
        origin = _resolve_place(params["fromPlace"])
        if origin is None:
            return _bad_request(f"could not geocode fromPlace: {params['fromPlace']!r}"), "bad_request", 0
        destination = _resolve_place(params["toPlace"])
        if destination is None:
            return _bad_request(f"could not geocode toPlace: {params['toPlace']!r}"), "bad_request", 0
        try:
            request_date = date.fromisoformat(params["date"])
        except ValueError:
            return _bad_request("date must be YYYY-MM-DD"), "bad_request", 0
        try:
            depart_at = parse_gtfs_time(params["time"])
        except MalformedTime:
            return _bad_request("time must be HH:MM:SS"), "bad_request", 0
        mode = params.get("mode", MODE_TRANSIT_WALK)
        if mode not in MODES:
            return _bad_request(f"mode must be one of {', '.join(MODES)}"), "bad_request", 0
        try:
            num_itineraries = int(params.get("numItineraries", str(config.num_itineraries)))
            max_walk = float(params.get("maxWalk", str(config.max_walk_m)))
        except ValueError:
            return _bad_request("numItineraries and maxWalk must be numeric"), "bad_request", 0
        if num_itineraries < 1:
            return _bad_request("numItineraries must be >= 1"), "bad_request", 0
        if max_walk <= 0:
            return _bad_request("maxWalk must be > 0"), "bad_request", 0

        scenario_view = None
        scenario_id = params.get("scenario")
        if scenario_id is not None:
            with scenario_lock:
                scenario = state["scenarios"].get(scenario_id)
            if scenario is None:
                return _not_found(f"unknown scenario: {scenario_id}"), "unknown_scenario", 0
            scenario_view = apply_scenario(state["graph"], scenario)

        plan_request = PlanRequest(
            origin=origin, destination=destination, date=request_date,
            depart_at=depart_at, mode=mode, max_walk_m=max_walk,
            num_itineraries=num_itineraries, scenario_id=scenario_id,
            walk_speed_mps=config.walk_speed,
        )
        try:
            result = plan(state["graph"], plan_request,
                          scenario_view=scenario_view, fare_config=config.fare_config)
        except PlanError as exc:
            return JSONResponse({"error": exc.message}, status_code=422), exc.kind, 0
        except ValueError as exc:
            return _bad_request(str(exc)), "bad_request", 0
        except MmtpError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422), "plan_failed", 0
        return JSONResponse(response_to_dict(result)), None, len(result.itineraries)

    @app.post("/scenarios")
    async def create_scenario(request: Request):
        if state["graph"] is None:
            return _loading()
        try:
            doc = json.loads(await request.body())
            scenario = scenario_from_dict(doc)
        except (json.JSONDecodeError, ValueError) as exc:
            return _bad_request(f"invalid scenario: {exc}")
        with scenario_lock:
            state["scenarios"][scenario.id] = scenario
        return JSONResponse({"id": scenario.id}, status_code=201)

    @app.get("/scenarios")
    def list_scenarios():
        with scenario_lock:
            scenarios = list(state["scenarios"].values())
        return [scenario_to_dict(s) for s in scenarios]

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        with scenario_lock:
            scenario = state["scenarios"].get(scenario_id)
        if scenario is None:
            return _not_found(f"unknown scenario: {scenario_id}")
        return scenario_to_dict(scenario)

    @app.delete("/scenarios/{scenario_id}")
    def delete_scenario(scenario_id: str):
        with scenario_lock:
            scenario = state["scenarios"].pop(scenario_id, None)
        if scenario is None:
            return _not_found(f"unknown scenario: {scenario_id}")
        return Response(status_code=204)

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def run_service(config: ServiceConfig) -> None:
    import uvicorn

    # load eagerly so a bad graph fails the process before the port opens
    graph = load_graph(config.graph_path)
    app = create_app(config, graph=graph)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
