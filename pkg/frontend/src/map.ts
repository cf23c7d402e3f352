// SVG map rendering: blank grid over the graph bbox, stops, endpoint pins,
// itinerary legs (walk dashed, transit solid, approximate dotted), and the
// polygon draft for scenario editing.

import type { ItineraryDto, LatLon, StopDto } from "./api.js";
import { Projection } from "./geo.js";
import type { UiState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el(name: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function polylinePoints(projection: Projection, geometry: [number, number][]): string {
  return geometry
    .map(([lat, lon]) => projection.toPixel({ lat, lon }).join(","))
    .join(" ");
}

export interface MapCallbacks {
  onClick(point: LatLon): void;
  onStopClick(stopId: string): void;
}

export class MapView {
  private projection: Projection;

  constructor(
    private readonly svg: SVGSVGElement,
    bbox: Projection["bbox"],
    private readonly callbacks: MapCallbacks,
  ) {
    const rect = svg.getBoundingClientRect();
    this.projection = new Projection(bbox, rect.width || 600, rect.height || 600);
    svg.setAttribute("viewBox", `0 0 ${this.projection.width} ${this.projection.height}`);
    svg.addEventListener("click", (event) => {
      const point = this.eventLatLon(event);
      this.callbacks.onClick(point);
    });
  }

  private eventLatLon(event: MouseEvent): LatLon {
    const rect = this.svg.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * this.projection.width;
    const y = ((event.clientY - rect.top) / rect.height) * this.projection.height;
    return this.projection.toLatLon(x, y);
  }

  render(state: UiState, stops: StopDto[]): void {
    this.svg.replaceChildren();
    this.renderGrid();
    this.renderStops(state, stops);
    this.renderPolygon(state);
    const selected = state.lastPlan?.itineraries[state.selectedItinerary];
    if (selected) {
      this.renderItinerary(selected);
    }
    this.renderEndpoint(state.origin, "origin");
    this.renderEndpoint(state.destination, "destination");
  }

  private renderGrid(): void {
    // offline fallback: a plain grid instead of map tiles
    const { width, height } = this.projection;
    this.svg.appendChild(el("rect", {
      x: "0", y: "0", width: String(width), height: String(height), class: "map-bg",
    }));
    for (let i = 1; i < 10; i++) {
      const x = (i / 10) * width;
      const y = (i / 10) * height;
      this.svg.appendChild(el("line", {
        x1: String(x), y1: "0", x2: String(x), y2: String(height), class: "grid-line",
      }));
      this.svg.appendChild(el("line", {
        x1: "0", y1: String(y), x2: String(width), y2: String(y), class: "grid-line",
      }));
    }
  }

  private renderStops(state: UiState, stops: StopDto[]): void {
    for (const stop of stops) {
      const [x, y] = this.projection.toPixel(stop);
      const disabled = state.disabledStops.has(stop.stop_id);
      const circle = el("circle", {
        cx: String(x), cy: String(y), r: "5",
        class: disabled ? "stop stop-disabled" : "stop",
      });
      circle.addEventListener("click", (event) => {
        event.stopPropagation();
        this.callbacks.onStopClick(stop.stop_id);
      });
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = stop.stop_id;
      circle.appendChild(title);
      this.svg.appendChild(circle);
    }
  }

  private renderPolygon(state: UiState): void {
    if (state.draftPolygon.length === 0) return;
    const points = state.draftPolygon
      .map((p) => this.projection.toPixel(p).join(","))
      .join(" ");
    this.svg.appendChild(el("polygon", { points, class: "draft-polygon" }));
    for (const p of state.draftPolygon) {
      const [x, y] = this.projection.toPixel(p);
      this.svg.appendChild(el("circle", { cx: String(x), cy: String(y), r: "3", class: "draft-vertex" }));
    }
  }

  private renderItinerary(itinerary: ItineraryDto): void {
    for (const leg of itinerary.legs) {
      const cls = leg.approximate
        ? "leg leg-approximate"
        : leg.kind === "TRANSIT"
          ? "leg leg-transit"
          : leg.kind === "DRIVE"
            ? "leg leg-drive"
            : "leg leg-walk";
      this.svg.appendChild(el("polyline", {
        points: polylinePoints(this.projection, leg.geometry),
        class: cls,
        fill: "none",
      }));
    }
  }

  private renderEndpoint(point: LatLon | null, kind: "origin" | "destination"): void {
    if (!point) return;
    const [x, y] = this.projection.toPixel(point);
    this.svg.appendChild(el("circle", {
      cx: String(x), cy: String(y), r: "7", class: `pin pin-${kind}`,
    }));
  }
}
