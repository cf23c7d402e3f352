// Equirectangular projection between the graph bounding box and map pixels.

import type { LatLon } from "./api.js";

export interface BBox {
  min_lat: number;
  min_lon: number;
  max_lat: number;
  max_lon: number;
}

export class Projection {
  constructor(
    readonly bbox: BBox,
    readonly width: number,
    readonly height: number,
    readonly padding = 20,
  ) {}

  private get spanLat(): number {
    return Math.max(this.bbox.max_lat - this.bbox.min_lat, 1e-9);
  }

  private get spanLon(): number {
    return Math.max(this.bbox.max_lon - this.bbox.min_lon, 1e-9);
  }

  toPixel(p: LatLon): [number, number] {
    const innerW = this.width - 2 * this.padding;
    const innerH = this.height - 2 * this.padding;
    const x = this.padding + ((p.lon - this.bbox.min_lon) / this.spanLon) * innerW;
    const y = this.padding + ((this.bbox.max_lat - p.lat) / this.spanLat) * innerH;
    return [x, y];
  }

  toLatLon(x: number, y: number): LatLon {
    const innerW = this.width - 2 * this.padding;
    const innerH = this.height - 2 * this.padding;
    const lon = this.bbox.min_lon + ((x - this.padding) / innerW) * this.spanLon;
    const lat = this.bbox.max_lat - ((y - this.padding) / innerH) * this.spanLat;
    return { lat, lon };
  }
}
