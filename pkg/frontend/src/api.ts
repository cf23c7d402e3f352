// Typed client for the planning service. The UI never computes routes
// itself; everything rendered comes back from these endpoints.

export type Mode = "WALK" | "TRANSIT_WALK" | "DRIVE";

export interface LatLon {
  lat: number;
  lon: number;
}

export interface LegDto {
  kind: "WALK" | "TRANSIT" | "DRIVE";
  start_time: string;
  end_time: string;
  distance_m: number;
  geometry: [number, number][];
  approximate: boolean;
  route_id?: string;
  trip_id?: string;
  board_stop?: string;
  alight_stop?: string;
  route_type?: number;
}

export interface ItineraryDto {
  legs: LegDto[];
  duration_s: number;
  total_distance_m: number;
  walk_distance_m: number;
  estimated_fare: number;
  boardings: number;
}

export interface PlanResponseDto {
  itineraries: ItineraryDto[];
  diagnostics: Record<string, unknown>;
}

export interface GeocodeHit {
  name: string;
  lat: number;
  lon: number;
}

export interface GraphMeta {
  bbox: { min_lat: number; min_lon: number; max_lat: number; max_lon: number };
  counts: { vertices: number; edges: number; stops: number; trips: number };
}

export interface StopDto {
  stop_id: string;
  lat: number;
  lon: number;
  linked: boolean;
}

export interface ScenarioDto {
  id: string;
  name: string;
  closed_way_ids: number[];
  closed_areas: [number, number][][];
  disabled_stop_ids: string[];
  disabled_route_ids: string[];
}

export interface PlanQuery {
  from: LatLon;
  to: LatLon;
  date: string;
  time: string;
  mode: Mode;
  numItineraries?: number;
  maxWalk?: number;
  scenario?: string | null;
}

export type PlanOutcome =
  | { ok: true; plan: PlanResponseDto }
  | { ok: false; status: number; error: string };

const fmt = (p: LatLon) => `${p.lat},${p.lon}`;

export function buildPlanQuery(q: PlanQuery): string {
  const params = new URLSearchParams({
    fromPlace: fmt(q.from),
    toPlace: fmt(q.to),
    date: q.date,
    time: q.time,
    mode: q.mode,
  });
  if (q.numItineraries !== undefined) params.set("numItineraries", String(q.numItineraries));
  if (q.maxWalk !== undefined) params.set("maxWalk", String(q.maxWalk));
  if (q.scenario) params.set("scenario", q.scenario);
  return `/plan?${params.toString()}`;
}

async function errorText(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") return body.error;
  } catch {
    // fall through to the status line
  }
  return `request failed with status ${response.status}`;
}

export async function fetchPlan(q: PlanQuery): Promise<PlanOutcome> {
  const response = await fetch(buildPlanQuery(q));
  if (!response.ok) {
    return { ok: false, status: response.status, error: await errorText(response) };
  }
  return { ok: true, plan: (await response.json()) as PlanResponseDto };
}

export async function fetchGeocode(query: string, limit = 6): Promise<GeocodeHit[]> {
  const params = new URLSearchParams({ q: query, limit: String(limit) });
  const response = await fetch(`/geocode?${params.toString()}`);
  if (!response.ok) return [];
  return (await response.json()) as GeocodeHit[];
}

export async function fetchMeta(): Promise<GraphMeta> {
  const response = await fetch("/graph/meta");
  if (!response.ok) throw new Error(await errorText(response));
  return (await response.json()) as GraphMeta;
}

export async function fetchStops(): Promise<StopDto[]> {
  const response = await fetch("/graph/stops");
  if (!response.ok) return [];
  return (await response.json()) as StopDto[];
}

export async function saveScenario(scenario: ScenarioDto): Promise<{ ok: boolean; error?: string }> {
  const response = await fetch("/scenarios", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(scenario),
  });
  if (!response.ok) return { ok: false, error: await errorText(response) };
  return { ok: true };
}

export async function deleteScenario(id: string): Promise<boolean> {
  const response = await fetch(`/scenarios/${encodeURIComponent(id)}`, { method: "DELETE" });
  return response.ok;
}
