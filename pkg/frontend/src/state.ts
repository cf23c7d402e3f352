// Pure UI state and transitions: endpoint selection, polygon drafting,
// stop toggles, and latest-wins tracking for in-flight plan requests.

import type { LatLon, Mode, PlanResponseDto } from "./api.js";

export interface UiState {
  origin: LatLon | null;
  destination: LatLon | null;
  mode: Mode;
  date: string;
  time: string;
  scenarioId: string | null;
  lastPlan: PlanResponseDto | null;
  planError: string | null;
  selectedItinerary: number;
  drawing: boolean;
  draftPolygon: LatLon[];
  disabledStops: Set<string>;
  requestSeq: number;
  appliedSeq: number;
}

export function initialState(): UiState {
  return {
    origin: null,
    destination: null,
    mode: "TRANSIT_WALK",
    date: "2013-11-12",
    time: "07:55:00",
    scenarioId: null,
    lastPlan: null,
    planError: null,
    selectedItinerary: 0,
    drawing: false,
    draftPolygon: [],
    disabledStops: new Set(),
    requestSeq: 0,
    appliedSeq: 0,
  };
}

/** First click sets the origin, the second the destination, the third resets. */
export function handleMapClick(state: UiState, point: LatLon): UiState {
  if (state.drawing) {
    return { ...state, draftPolygon: [...state.draftPolygon, point] };
  }
  if (state.origin === null) {
    return { ...state, origin: point };
  }
  if (state.destination === null) {
    return { ...state, destination: point };
  }
  return { ...state, origin: point, destination: null, lastPlan: null, planError: null };
}

export function setEndpoint(state: UiState, which: "origin" | "destination", point: LatLon): UiState {
  return { ...state, [which]: point };
}

/** Plans are requested only when both endpoints are set. */
export function canPlan(state: UiState): boolean {
  return state.origin !== null && state.destination !== null;
}

export function startDrawing(state: UiState): UiState {
  return { ...state, drawing: true, draftPolygon: [] };
}

/** A closed area needs at least 3 points; shorter drafts are rejected client-side. */
export function finishPolygon(state: UiState): { state: UiState; ring: LatLon[] | null; error: string | null } {
  if (state.draftPolygon.length < 3) {
    return {
      state: { ...state, drawing: false, draftPolygon: [] },
      ring: null,
      error: "a closed area needs at least 3 points",
    };
  }
  return {
    state: { ...state, drawing: false, draftPolygon: [] },
    ring: state.draftPolygon,
    error: null,
  };
}

export function toggleStop(state: UiState, stopId: string): UiState {
  const disabled = new Set(state.disabledStops);
  if (disabled.has(stopId)) {
    disabled.delete(stopId);
  } else {
    disabled.add(stopId);
  }
  return { ...state, disabledStops: disabled };
}

/** Allocate a request sequence number; stale responses are dropped on apply. */
export function beginRequest(state: UiState): { state: UiState; seq: number } {
  const seq = state.requestSeq + 1;
  return { state: { ...state, requestSeq: seq }, seq };
}

export function applyPlan(
  state: UiState,
  seq: number,
  plan: PlanResponseDto | null,
  error: string | null,
): UiState {
  if (seq <= state.appliedSeq || seq > state.requestSeq) {
    return state; // a newer request already answered, or the seq is bogus
  }
  return {
    ...state,
    appliedSeq: seq,
    lastPlan: plan,
    planError: error,
    selectedItinerary: 0,
  };
}

export function selectItinerary(state: UiState, index: number): UiState {
  return { ...state, selectedItinerary: index };
}
