// Wires the map, endpoint inputs, itinerary cards, and scenario editor to
// the planning service. Every displayed route comes from a /plan response.

import {
  deleteScenario,
  fetchGeocode,
  fetchMeta,
  fetchPlan,
  fetchStops,
  saveScenario,
  type LatLon,
  type Mode,
  type StopDto,
} from "./api.js";
import { MapView } from "./map.js";
import { renderBanner, renderItineraryCards } from "./render.js";
import {
  applyPlan,
  beginRequest,
  canPlan,
  finishPolygon,
  handleMapClick,
  initialState,
  selectItinerary,
  setEndpoint,
  startDrawing,
  toggleStop,
  type UiState,
} from "./state.js";

let state: UiState = initialState();
let stops: StopDto[] = [];
let mapView: MapView;
let savedAreas: LatLon[][] = [];

const $ = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

function setState(next: UiState, replanOnChange = true): void {
  const endpointsChanged = next.origin !== state.origin || next.destination !== state.destination;
  const contextChanged =
    next.mode !== state.mode || next.date !== state.date || next.time !== state.time ||
    next.scenarioId !== state.scenarioId;
  state = next;
  render();
  if (replanOnChange && (endpointsChanged || contextChanged) && canPlan(state)) {
    void requestPlan();
  }
}

async function requestPlan(): Promise<void> {
  if (!canPlan(state)) return;
  const { state: withSeq, seq } = beginRequest(state);
  state = withSeq;
  const outcome = await fetchPlan({
    from: state.origin!,
    to: state.destination!,
    date: state.date,
    time: state.time,
    mode: state.mode,
    scenario: state.scenarioId,
  });
  state = outcome.ok
    ? applyPlan(state, seq, outcome.plan, null)
    : applyPlan(state, seq, null, outcome.error);
  render();
}

function render(): void {
  mapView.render(state, stops);
  renderBanner($("banner"), state.planError);
  renderItineraryCards($("itineraries"), state.lastPlan, state.selectedItinerary,
                       (index) => setState(selectItinerary(state, index), false));
  renderScenarioPanel();
  ($("origin-input") as HTMLInputElement).placeholder =
    state.origin ? `${state.origin.lat.toFixed(5)},${state.origin.lon.toFixed(5)}` : "click map or type a place";
  ($("destination-input") as HTMLInputElement).placeholder =
    state.destination ? `${state.destination.lat.toFixed(5)},${state.destination.lon.toFixed(5)}` : "click map or type a place";
}

function renderScenarioPanel(): void {
  $("draw-status").textContent = state.drawing
    ? `drawing: ${state.draftPolygon.length} point(s)`
    : savedAreas.length
      ? `${savedAreas.length} area(s) staged`
      : "";
  $("scenario-status").textContent = state.scenarioId
    ? `active scenario: ${state.scenarioId}`
    : "no active scenario";
  const disabled = [...state.disabledStops].sort().join(", ");
  $("disabled-stops").textContent = disabled ? `disabled stops: ${disabled}` : "";
}

function bindEndpointInput(id: string, which: "origin" | "destination"): void {
  const input = $(id) as HTMLInputElement;
  const picks = $(`${id}-picks`);
  input.addEventListener("input", async () => {
    const query = input.value.trim();
    picks.replaceChildren();
    if (query.length < 2) return;
    const hits = await fetchGeocode(query);
    hits.forEach((hit) => {
      const option = document.createElement("div");
      option.className = "pick";
      option.textContent = hit.name;
      option.addEventListener("click", () => {
        picks.replaceChildren();
        input.value = hit.name;
        setState(setEndpoint(state, which, { lat: hit.lat, lon: hit.lon }));
      });
      picks.appendChild(option);
    });
  });
}

async function activateScenario(): Promise<void> {
  if (savedAreas.length === 0 && state.disabledStops.size === 0) return;
  const id = `ui-${Date.now()}`;
  const result = await saveScenario({
    id,
    name: "drawn in UI",
    closed_way_ids: [],
    closed_areas: savedAreas.map((ring) => ring.map((p) => [p.lat, p.lon] as [number, number])),
    disabled_stop_ids: [...state.disabledStops],
    disabled_route_ids: [],
  });
  if (!result.ok) {
    setState({ ...state, planError: result.error ?? "scenario rejected" }, false);
    return;
  }
  setState({ ...state, scenarioId: id });
}

async function clearScenario(): Promise<void> {
  if (state.scenarioId) {
    await deleteScenario(state.scenarioId);
  }
  savedAreas = [];
  setState({ ...state, scenarioId: null, disabledStops: new Set() });
}

async function main(): Promise<void> {
  const meta = await fetchMeta();
  stops = await fetchStops();
  mapView = new MapView(
    $("map") as unknown as SVGSVGElement,
    meta.bbox,
    {
      onClick: (point) => setState(handleMapClick(state, point)),
      onStopClick: (stopId) => setState(toggleStop(state, stopId), false),
    },
  );

  bindEndpointInput("origin-input", "origin");
  bindEndpointInput("destination-input", "destination");

  ($("mode") as HTMLSelectElement).addEventListener("change", (event) => {
    setState({ ...state, mode: (event.target as HTMLSelectElement).value as Mode });
  });
  ($("date") as HTMLInputElement).value = state.date;
  ($("date") as HTMLInputElement).addEventListener("change", (event) => {
    setState({ ...state, date: (event.target as HTMLInputElement).value });
  });
  ($("time") as HTMLInputElement).value = state.time.slice(0, 5);
  ($("time") as HTMLInputElement).addEventListener("change", (event) => {
    setState({ ...state, time: `${(event.target as HTMLInputElement).value}:00` });
  });

  $("draw-area").addEventListener("click", () => setState(startDrawing(state), false));
  $("finish-area").addEventListener("click", () => {
    const { state: next, ring, error } = finishPolygon(state);
    if (ring) savedAreas.push(ring);
    setState(error ? { ...next, planError: error } : next, false);
  });
  $("save-scenario").addEventListener("click", () => void activateScenario());
  $("clear-scenario").addEventListener("click", () => void clearScenario());

  render();
}

void main();
