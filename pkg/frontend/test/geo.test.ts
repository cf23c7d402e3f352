import { describe, expect, it } from "vitest";

import { Projection } from "../src/geo.js";

const BBOX = { min_lat: 14.595, min_lon: 120.995, max_lat: 14.625, max_lon: 121.005 };

describe("projection", () => {
  const projection = new Projection(BBOX, 600, 400);

  it("maps the bbox corners inside the padded frame", () => {
    const [x1, y1] = projection.toPixel({ lat: BBOX.max_lat, lon: BBOX.min_lon });
    expect(x1).toBeCloseTo(20);
    expect(y1).toBeCloseTo(20);
    const [x2, y2] = projection.toPixel({ lat: BBOX.min_lat, lon: BBOX.max_lon });
    expect(x2).toBeCloseTo(580);
    expect(y2).toBeCloseTo(380);
  });

  it("round-trips pixel to latlon and back", () => {
    for (const p of [
      { lat: 14.6, lon: 121.0 },
      { lat: 14.6123, lon: 120.9987 },
      { lat: BBOX.min_lat, lon: BBOX.min_lon },
    ]) {
      const [x, y] = projection.toPixel(p);
      const back = projection.toLatLon(x, y);
      expect(back.lat).toBeCloseTo(p.lat, 9);
      expect(back.lon).toBeCloseTo(p.lon, 9);
    }
  });

  it("north is up", () => {
    const [, yNorth] = projection.toPixel({ lat: 14.62, lon: 121.0 });
    const [, ySouth] = projection.toPixel({ lat: 14.60, lon: 121.0 });
    expect(yNorth).toBeLessThan(ySouth);
  });

  it("tolerates a degenerate bbox", () => {
    const flat = new Projection({ min_lat: 14.6, min_lon: 121.0, max_lat: 14.6, max_lon: 121.0 }, 100, 100);
    const [x, y] = flat.toPixel({ lat: 14.6, lon: 121.0 });
    expect(Number.isFinite(x)).toBe(true);
    expect(Number.isFinite(y)).toBe(true);
  });
});
