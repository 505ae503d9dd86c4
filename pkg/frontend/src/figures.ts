/**
 * Figure renderers over the documented CSV schemas.
 *
 * Hysteresis plots follow the fixed convention: red for the rising-F sweep,
 * blue for the falling-F sweep, with direction arrows along each branch.
 * Every figure's caption embeds the source file and a content hash, so a
 * rendered image can always be traced back to the exact data.
 */

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { readTable, SchemaError, type Table } from "./csv.js";
import { Figure, extentOf } from "./svg.js";

export const UP_COLOR = "#d62728";    // rising F
export const DOWN_COLOR = "#1f77b4";  // falling F

function caption(paths: string[]): string {
  return paths
    .map((p) => {
      const digest = createHash("sha256").update(readFileSync(p)).digest("hex");
      return `${p.split("/").pop()} [${digest.slice(0, 12)}]`;
    })
    .join("  ");
}

/** Split sample indices by sweep direction (sign of dF/dt). */
function splitSweeps(t: number[], F: number[]): { up: number[]; down: number[] } {
  const up: number[] = [];
  const down: number[] = [];
  for (let i = 0; i < t.length; i++) {
    const j = Math.min(i, t.length - 2);
    const dF = F[j + 1] - F[j];
    (dF >= 0 ? up : down).push(i);
  }
  return { up, down };
}

function pick(col: number[], idx: number[]): number[] {
  return idx.map((i) => col[i]);
}

function hysteresisFigure(table: Table, Fcol: string, Vcol: string,
                          title: string): string {
  const t = table.columns["t"];
  const F = table.columns[Fcol];
  const V = table.columns[Vcol];
  const { up, down } = splitSweeps(t, F);
  const fig = new Figure(extentOf(F, V), title, "F", "V");
  if (up.length > 1) {
    fig.polyline(pick(F, up), pick(V, up), UP_COLOR);
    fig.arrowsAlong(pick(F, up), pick(V, up), UP_COLOR);
  }
  if (down.length > 1) {
    fig.polyline(pick(F, down), pick(V, down), DOWN_COLOR);
    fig.arrowsAlong(pick(F, down), pick(V, down), DOWN_COLOR);
  }
  fig.legend([
    { label: "F rising", color: UP_COLOR },
    { label: "F falling", color: DOWN_COLOR },
  ]);
  if ("jump_flag" in table.columns) {
    const jumps = table.columns["jump_flag"]
      .map((v, i) => (v !== 0 ? i : -1))
      .filter((i) => i >= 0);
    if (jumps.length > 0) {
      fig.circles(pick(F, jumps), pick(V, jumps), "#000");
    }
  }
  return fig.render(caption([table.sourcePath]));
}

export function renderHysteresisSil(csvPath: string): string {
  const table = readTable(csvPath, "hysteresis");
  return hysteresisFigure(table, "F", "V", "quasi-static interface law V(F)");
}

export function renderHysteresisPde(csvPath: string): string {
  const table = readTable(csvPath, "interface");
  return hysteresisFigure(table, "F", "V_est", "measured PDE interface V(F)");
}

export function renderPhiCurve(csvPath: string, c0: number, beta: number): string {
  if (!(c0 > 0)) throw new SchemaError("phi-curve needs c0 > 0");
  if (!(beta >= 0)) throw new SchemaError("phi-curve needs beta >= 0");
  const table = readTable(csvPath, "phi_table");
  const V = table.columns["V"];
  // the table stores the unit-coupling response; scale by beta
  const g = table.columns["phi"].map((phi, i) => c0 * V[i] - beta * phi);
  const fig = new Figure(extentOf(V, g),
    `interface response c0 V - Phi(V), beta = ${beta}`, "V", "c0 V - Phi(V)");
  fig.polyline(V, g, "#333");
  return fig.render(caption([table.sourcePath]));
}

export function renderStabilityMap(csvPath: string): string {
  const table = readTable(csvPath, "stability");
  const V = table.columns["V"];
  const beta = table.columns["beta"];
  const maxRe = table.columns["max_real"];
  const stable = table.columns["stable"];
  const betas = [...new Set(beta)].sort((a, b) => a - b);
  const palette = ["#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
  const fig = new Figure(extentOf(V, maxRe), "rightmost eigenvalue vs V",
    "V", "max Re");
  betas.forEach((b, k) => {
    const idx = beta.map((v, i) => (v === b ? i : -1)).filter((i) => i >= 0);
    fig.polyline(pick(V, idx), pick(maxRe, idx), palette[k % palette.length]);
    const unstable = idx.filter((i) => stable[i] === 0);
    fig.circles(pick(V, unstable), pick(maxRe, unstable), "#d62728", 3);
  });
  fig.legend(betas.map((b, k) => ({
    label: `beta = ${b}`,
    color: palette[k % palette.length],
  })));
  return fig.render(caption([table.sourcePath]));
}

/** One SVG per recorded time; returns [time, svg] pairs. */
export function renderContourFrames(csvPath: string): Array<[number, string]> {
  const table = readTable(csvPath, "contour");
  const t = table.columns["t"];
  const x = table.columns["x"];
  const y = table.columns["y"];
  const times = [...new Set(t)].sort((a, b) => a - b);
  const extent = extentOf(x, y);
  const span = Math.max(extent.xMax - extent.xMin, extent.yMax - extent.yMin);
  const square = {
    xMin: extent.xMin,
    xMax: extent.xMin + span,
    yMin: extent.yMin,
    yMax: extent.yMin + span,
  };
  const cap = caption([csvPath]);
  return times.map((tv) => {
    const idx = t.map((v, i) => (v === tv ? i : -1)).filter((i) => i >= 0);
    const fig = new Figure(square, `membrane contour, t = ${tv.toPrecision(4)}`,
      "x", "y");
    const xs = pick(x, idx);
    const ys = pick(y, idx);
    xs.push(xs[0]);
    ys.push(ys[0]);
    fig.polyline(xs, ys, "#1f77b4");
    return [tv, fig.render(cap)];
  });
}
