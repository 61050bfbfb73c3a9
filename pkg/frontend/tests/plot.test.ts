import { describe, expect, it } from "vitest";

import { renderDensity, renderForest, renderRocGeometry } from "../src/plot.js";
import type { ForestJson, GeometryItem, PreviewTable } from "../src/types.js";
import { fixture } from "./helpers.js";

describe("roc geometry rendering", () => {
  const geo = fixture<{ geometry: GeometryItem[] }>("sroc_geometry.json").geometry;

  it("draws every geometry kind the service sent", () => {
    const svg = renderRocGeometry(geo);
    const kinds = new Set(
      Array.from(svg.querySelectorAll("[data-kind]")).map((n) => n.getAttribute("data-kind")),
    );
    for (const item of geo) {
      expect(kinds.has(item.kind), item.kind).toBe(true);
    }
    expect(svg.textContent).toContain("1-Specificity");
    expect(svg.textContent).toContain("Sensitivity");
  });

  it("renders crosshair geometry as paired segments", () => {
    const crosses = fixture<{ geometry: GeometryItem[] }>("crosshair_geometry.json").geometry;
    const svg = renderRocGeometry(crosses);
    const lines = svg.querySelectorAll('[data-kind="crosshair"]');
    expect(lines.length).toBe(2 * crosses.length);
  });
});

describe("forest rendering", () => {
  it("renders one interval per row plus the summary diamond", () => {
    const forest = fixture<{ geometry: ForestJson }>("forest_geometry.json").geometry;
    const svg = renderForest(forest);
    expect(svg.querySelectorAll('[data-kind="interval"]').length).toBe(forest.rows.length);
    expect(svg.querySelectorAll('[data-kind="summary"]').length).toBe(
      forest.rows.filter((r) => r.is_summary).length,
    );
    expect(svg.textContent).toContain("Ito_1998");
  });
});

describe("density preview rendering", () => {
  it("draws the recorded table as a single path with all points", () => {
    const table = fixture<PreviewTable>("preview_pc_variance.json");
    const svg = renderDensity(table);
    const path = svg.querySelector('[data-kind="density"]')!;
    const coords = path.getAttribute("points")!.split(" ");
    expect(coords.length).toBe(table.x.length);
  });
});
