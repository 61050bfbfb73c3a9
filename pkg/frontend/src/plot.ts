// Client-side SVG rendering of server geometry JSON (interactive views);
// export downloads use the server-rendered SVG instead.

import type { ForestJson, GeometryItem, PreviewTable } from "./types.js";

const NS = "http://www.w3.org/2000/svg";

function el(name: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(NS, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function textEl(x: number, y: number, content: string, anchor = "start", size = 11): SVGElement {
  const node = el("text", {
    x, y, "font-size": size, "font-family": "sans-serif", "text-anchor": anchor,
  });
  node.textContent = content;
  return node;
}

export interface RocScale {
  size: number;
  margin: number;
  toPx(x: number, y: number): [number, number];
}

export function rocScale(size = 420, margin = 46): RocScale {
  const span = size - 2 * margin;
  return {
    size,
    margin,
    toPx: (x, y) => [margin + x * span, size - margin - y * span],
  };
}

export function rocAxes(svg: SVGElement, scale: RocScale): void {
  const [x0, y0] = scale.toPx(0, 0);
  const [x1, y1] = scale.toPx(1, 1);
  svg.appendChild(el("line", { x1: x0, y1: y0, x2: x1, y2: y0, stroke: "black" }));
  svg.appendChild(el("line", { x1: x0, y1: y0, x2: x0, y2: y1, stroke: "black" }));
  for (const t of [0, 0.2, 0.4, 0.6, 0.8, 1]) {
    const [tx] = scale.toPx(t, 0);
    svg.appendChild(textEl(tx, y0 + 16, t.toFixed(1), "middle"));
    const [, ty] = scale.toPx(0, t);
    svg.appendChild(textEl(x0 - 6, ty + 4, t.toFixed(1), "end"));
  }
  svg.appendChild(textEl((x0 + x1) / 2, scale.size - 8, "1-Specificity", "middle", 13));
  const ylab = textEl(14, (y0 + y1) / 2, "Sensitivity", "middle", 13);
  ylab.setAttribute("transform", `rotate(-90 14 ${(y0 + y1) / 2})`);
  svg.appendChild(ylab);
}

/** Render ROC-space geometry items (sroc/crosshair plots) into a fresh SVG. */
export function renderRocGeometry(items: GeometryItem[], size = 420): SVGElement {
  const scale = rocScale(size);
  const svg = el("svg", { width: size, height: size, viewBox: `0 0 ${size} ${size}` });
  svg.appendChild(el("rect", { x: 0, y: 0, width: size, height: size, fill: "white" }));
  rocAxes(svg, scale);
  for (const item of items) {
    const color = (item.style.color as string) ?? "black";
    const pts = item.points.map(([x, y]) => scale.toPx(x, y));
    const coords = pts.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    if (item.kind === "sroc_line") {
      svg.appendChild(el("polyline", {
        points: coords, fill: "none", stroke: color, "stroke-width": 2, "data-kind": item.kind,
      }));
    } else if (item.kind === "credible_region" || item.kind === "prediction_region") {
      svg.appendChild(el("polyline", {
        points: coords, fill: "none", stroke: color, "stroke-dasharray": "6,4",
        "data-kind": item.kind,
      }));
    } else if (item.kind === "summary_point") {
      const [x, y] = pts[0];
      for (const [dx1, dy1, dx2, dy2] of [[-6, 0, 6, 0], [0, -6, 0, 6], [-4, -4, 4, 4], [-4, 4, 4, -4]]) {
        svg.appendChild(el("line", {
          x1: x + dx1, y1: y + dy1, x2: x + dx2, y2: y + dy2, stroke: color,
          "data-kind": item.kind,
        }));
      }
    } else if (item.kind === "data_bubble") {
      const sizes = (item.style.sizes as number[]) ?? item.points.map(() => 1);
      const smax = Math.max(...sizes);
      pts.forEach(([x, y], i) => {
        svg.appendChild(el("circle", {
          cx: x, cy: y, r: 3 + 10 * Math.sqrt(sizes[i] / smax), fill: "none", stroke: color,
          "data-kind": item.kind,
        }));
      });
    } else if (item.kind === "crosshair") {
      const [[ax, ay], [bx, by], [cx, cy], [dx, dy]] = pts;
      svg.appendChild(el("line", { x1: ax, y1: ay, x2: bx, y2: by, stroke: color, "data-kind": item.kind }));
      svg.appendChild(el("line", { x1: cx, y1: cy, x2: dx, y2: dy, stroke: color, "data-kind": item.kind }));
    }
  }
  return svg;
}

/** Density preview: the (x, density) table is drawn verbatim as one path. */
export function renderDensity(table: PreviewTable, width = 420, height = 220): SVGElement {
  const margin = 34;
  const svg = el("svg", { width, height, viewBox: `0 0 ${width} ${height}` });
  svg.appendChild(el("rect", { x: 0, y: 0, width, height, fill: "white" }));
  const xs = table.x;
  const ys = table.density;
  const xmin = Math.min(...xs);
  const xmax = Math.max(...xs);
  const ymax = Math.max(...ys, 1e-300);
  const sx = (x: number) => margin + ((x - xmin) / (xmax - xmin || 1)) * (width - 2 * margin);
  const sy = (y: number) => height - margin - (y / ymax) * (height - 2 * margin);
  const coords = xs.map((x, i) => `${sx(x).toFixed(2)},${sy(ys[i]).toFixed(2)}`).join(" ");
  svg.appendChild(el("polyline", {
    points: coords, fill: "none", stroke: "black", "stroke-width": 1.5, "data-kind": "density",
  }));
  svg.appendChild(el("line", {
    x1: margin, y1: height - margin, x2: width - margin, y2: height - margin, stroke: "gray",
  }));
  svg.appendChild(textEl(margin, 14, `max density ${ymax.toPrecision(3)}`));
  svg.appendChild(textEl(margin, height - 8, xmin.toPrecision(3)));
  svg.appendChild(textEl(width - margin, height - 8, xmax.toPrecision(3), "end"));
  return svg;
}

export function renderForest(forest: ForestJson, width = 620): SVGElement {
  const rowH = 22;
  const top = 34;
  const plotX0 = 230;
  const plotX1 = 470;
  const rows = forest.rows;
  const height = top + rowH * (rows.length + 2);
  const svg = el("svg", { width, height, viewBox: `0 0 ${width} ${height}` });
  svg.appendChild(el("rect", { x: 0, y: 0, width, height, fill: "white" }));
  const [lo, hi] = forest.cut;
  const span = hi - lo || 1;
  const toX = (v: number) => plotX0 + ((Math.min(Math.max(v, lo), hi) - lo) / span) * (plotX1 - plotX0);
  let y = top;
  let lastLevel: string | null | undefined;
  for (const row of rows) {
    if (row.level && row.level !== lastLevel) {
      svg.appendChild(textEl(10, y, row.level, "start", 12));
      y += rowH;
      lastLevel = row.level;
    }
    svg.appendChild(textEl(10, y + 4, row.label));
    svg.appendChild(el("line", {
      x1: toX(row.lo), y1: y, x2: toX(row.hi), y2: y, stroke: "black", "data-kind": "interval",
    }));
    const xe = toX(row.estimate);
    if (row.is_summary) {
      svg.appendChild(el("polygon", {
        points: `${xe - 6},${y} ${xe},${y - 5} ${xe + 6},${y} ${xe},${y + 5}`,
        fill: "black", "data-kind": "summary",
      }));
    } else {
      const half = 3 * row.size;
      svg.appendChild(el("rect", {
        x: xe - half, y: y - half, width: 2 * half, height: 2 * half, fill: "black",
        "data-kind": "estimate",
      }));
    }
    svg.appendChild(textEl(plotX1 + 10, y + 4,
      `${row.estimate.toFixed(3)} [${row.lo.toFixed(3)}, ${row.hi.toFixed(3)}]`));
    y += rowH;
  }
  return svg;
}
