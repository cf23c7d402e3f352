// DOM rendering for the itinerary list and the error banner, kept free of
// app wiring so the pieces can be driven directly in tests.

import type { PlanResponseDto } from "./api.js";

export function formatDuration(seconds: number): string {
  const minutes = Math.round(seconds / 60);
  return minutes >= 60 ? `${Math.floor(minutes / 60)} h ${minutes % 60} min` : `${minutes} min`;
}

/** Shows the service's error text verbatim, or hides the banner. */
export function renderBanner(banner: HTMLElement, error: string | null): void {
  if (error) {
    banner.textContent = error;
    banner.classList.remove("hidden");
  } else {
    banner.textContent = "";
    banner.classList.add("hidden");
  }
}

export function renderItineraryCards(
  list: HTMLElement,
  plan: PlanResponseDto | null,
  selectedIndex: number,
  onSelect: (index: number) => void,
): void {
  list.replaceChildren();
  if (!plan) return;
  if (plan.itineraries.length === 0) {
    const card = list.ownerDocument.createElement("div");
    card.className = "card";
    card.textContent = "No trip found.";
    list.appendChild(card);
    return;
  }
  plan.itineraries.forEach((itinerary, index) => {
    const card = list.ownerDocument.createElement("div");
    card.className = index === selectedIndex ? "card selected" : "card";
    const routes = itinerary.legs
      .filter((leg) => leg.kind === "TRANSIT")
      .map((leg) => leg.route_id)
      .join(", ");
    const first = itinerary.legs[0];
    const last = itinerary.legs[itinerary.legs.length - 1];

    const title = list.ownerDocument.createElement("div");
    title.className = "card-title";
    title.textContent = formatDuration(itinerary.duration_s) + (routes ? ` via ${routes}` : "");
    const costs = list.ownerDocument.createElement("div");
    costs.className = "card-row";
    costs.textContent =
      `walk ${Math.round(itinerary.walk_distance_m)} m · ` +
      `fare ${itinerary.estimated_fare.toFixed(2)} · ` +
      `${itinerary.boardings} boarding${itinerary.boardings === 1 ? "" : "s"}`;
    const times = list.ownerDocument.createElement("div");
    times.className = "card-row";
    times.textContent = `${first?.start_time ?? ""} → ${last?.end_time ?? ""}`;

    card.append(title, costs, times);
    card.addEventListener("click", () => onSelect(index));
    list.appendChild(card);
  });
}
