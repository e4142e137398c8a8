/**
 * Figure renderers for experiment CSVs: paired boxplots of the error and its
 * estimate per grid point, relative-error boxplots, and (lambda, lambda_star)
 * heatmaps of grid averages.  Output is deterministic SVG.
 */
import { ResultRow, SchemaMismatch, assertValueColumn } from "./csv.js";
import { BoxStats, boxStats, mean, niceTicks } from "./stats.js";
import { colormap, el, svgDocument, text } from "./svg.js";

export type FigureKind = "boxplot_pair" | "relative_error_box" | "heatmap";

export interface FigureSpec {
  kind: FigureKind;
  valueColumns?: string[];
}

const WIDTH = 720;
const HEIGHT = 460;
const MARGIN = { top: 48, right: 24, bottom: 84, left: 64 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;
const SERIES_COLORS = ["#4c72b0", "#dd8452", "#55a868", "#c44e52"];

function fmt(value: number): string {
  const out = value.toPrecision(4);
  return out.includes(".") ? out.replace(/\.?0+($|e)/, "$1") : out;
}

interface GridPoint {
  key: string;
  lambda: number;
  lambdaStar: number | null;
  rows: ResultRow[];
}

function gridPoints(rows: ResultRow[]): GridPoint[] {
  const byKey = new Map<string, GridPoint>();
  for (const row of rows) {
    const key = `${row.lambda}|${row.lambda_star ?? ""}`;
    let point = byKey.get(key);
    if (!point) {
      point = { key, lambda: row.lambda, lambdaStar: row.lambda_star, rows: [] };
      byKey.set(key, point);
    }
    point.rows.push(row);
  }
  return [...byKey.values()].sort(
    (a, b) => a.lambda - b.lambda || (a.lambdaStar ?? 0) - (b.lambdaStar ?? 0),
  );
}

function pointLabel(point: GridPoint): string {
  return point.lambdaStar === null
    ? fmt(point.lambda)
    : `${fmt(point.lambda)}/${fmt(point.lambdaStar)}`;
}

function yMapper(lo: number, hi: number): (v: number) => number {
  const span = hi > lo ? hi - lo : 1;
  return (v: number) => MARGIN.top + PLOT_H * (1 - (v - lo) / span);
}

function axes(lo: number, hi: number, yLabel: string, groups: GridPoint[]): string[] {
  const yOf = yMapper(lo, hi);
  const parts: string[] = [];
  parts.push(el("line", {
    x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left, y2: MARGIN.top + PLOT_H,
    stroke: "#222222", "stroke-width": 1,
  }));
  parts.push(el("line", {
    x1: MARGIN.left, y1: MARGIN.top + PLOT_H,
    x2: MARGIN.left + PLOT_W, y2: MARGIN.top + PLOT_H,
    stroke: "#222222", "stroke-width": 1,
  }));
  for (const tick of niceTicks(lo, hi)) {
    const y = yOf(tick);
    parts.push(el("line", {
      x1: MARGIN.left - 4, y1: y, x2: MARGIN.left, y2: y, stroke: "#222222",
    }));
    parts.push(text(MARGIN.left - 8, y + 4, fmt(tick),
      { "text-anchor": "end", "font-size": 11 }));
  }
  const step = PLOT_W / groups.length;
  groups.forEach((point, i) => {
    const x = MARGIN.left + step * (i + 0.5);
    parts.push(text(0, 0, pointLabel(point), {
      "text-anchor": "end", "font-size": 10,
      transform: `translate(${(x + 3).toFixed(2)} ${(MARGIN.top + PLOT_H + 12).toFixed(2)}) rotate(-40)`,
    }));
  });
  parts.push(text(14, MARGIN.top + PLOT_H / 2, yLabel, {
    "text-anchor": "middle", "font-size": 12,
    transform: `rotate(-90 14 ${(MARGIN.top + PLOT_H / 2).toFixed(2)})`,
  }));
  const xLabel = groups[0]?.lambdaStar === null
    ? "lambda (log-spaced grid)"
    : "lambda / lambda_star (log-spaced grid)";
  parts.push(text(MARGIN.left + PLOT_W / 2, HEIGHT - 12, xLabel,
    { "text-anchor": "middle", "font-size": 12 }));
  return parts;
}

function drawBox(x: number, width: number, stats: BoxStats, yOf: (v: number) => number,
                 color: string, data: Record<string, string | number>): string {
  const center = x + width / 2;
  const parts = [
    el("line", { x1: center, y1: yOf(stats.whiskerLow), x2: center, y2: yOf(stats.q1), stroke: color }),
    el("line", { x1: center, y1: yOf(stats.q3), x2: center, y2: yOf(stats.whiskerHigh), stroke: color }),
    el("rect", {
      class: "box", x, y: yOf(stats.q3), width, height: Math.max(0.5, yOf(stats.q1) - yOf(stats.q3)),
      fill: color, "fill-opacity": 0.55, stroke: color,
      "data-median": String(stats.median), "data-n": stats.n, ...data,
    }),
    el("line", {
      x1: x, y1: yOf(stats.median), x2: x + width, y2: yOf(stats.median),
      stroke: "#111111", "stroke-width": 1.5,
    }),
  ];
  for (const v of stats.outliers) {
    parts.push(el("circle", { cx: center, cy: yOf(v), r: 2, fill: color, "fill-opacity": 0.8 }));
  }
  return parts.join("");
}

function finiteValues(rows: ResultRow[], column: string): number[] {
  return rows
    .map((r) => (r as unknown as Record<string, number | null>)[column])
    .filter((v): v is number => typeof v === "number" && Number.isFinite(v));
}

function renderGroupedBoxes(groups: GridPoint[], series: string[],
                            valueOf: (row: ResultRow, column: string) => number | null,
                            yLabel: string, title: string, annotation: string): string {
  const perBox: Array<{ group: number; series: number; stats: BoxStats }> = [];
  let lo = Number.POSITIVE_INFINITY;
  let hi = Number.NEGATIVE_INFINITY;
  groups.forEach((point, gi) => {
    series.forEach((column, si) => {
      const values = point.rows
        .map((row) => valueOf(row, column))
        .filter((v): v is number => v !== null && Number.isFinite(v));
      if (values.length === 0) return;
      const stats = boxStats(values);
      perBox.push({ group: gi, series: si, stats });
      lo = Math.min(lo, stats.whiskerLow, ...stats.outliers);
      hi = Math.max(hi, stats.whiskerHigh, ...stats.outliers);
    });
  });
  if (perBox.length === 0) {
    throw new SchemaMismatch("no finite values to plot");
  }
  const pad = 0.05 * (hi - lo || 1);
  lo -= pad;
  hi += pad;
  const yOf = yMapper(lo, hi);
  const body = axes(lo, hi, yLabel, groups);
  const step = PLOT_W / groups.length;
  const boxWidth = (step * 0.8) / series.length;
  for (const { group, series: si, stats } of perBox) {
    const x = MARGIN.left + step * group + step * 0.1 + boxWidth * si;
    body.push(drawBox(x, boxWidth, stats, yOf, SERIES_COLORS[si % SERIES_COLORS.length], {
      "data-group": pointLabel(groups[group]),
      "data-series": series[si],
    }));
  }
  series.forEach((column, si) => {
    const x = MARGIN.left + 140 * si;
    body.push(el("rect", {
      x, y: 16, width: 10, height: 10,
      fill: SERIES_COLORS[si % SERIES_COLORS.length], "fill-opacity": 0.55,
    }));
    body.push(text(x + 14, 25, column, { "font-size": 11 }));
  });
  body.push(text(MARGIN.left + PLOT_W / 2, 12, title,
    { "text-anchor": "middle", "font-size": 13, "font-weight": "bold" }));
  if (annotation) {
    body.push(text(WIDTH - MARGIN.right, HEIGHT - 12, annotation,
      { "text-anchor": "end", "font-size": 10, fill: "#666666", class: "annotation" }));
  }
  return svgDocument(WIDTH, HEIGHT, body);
}

export function renderBoxplotPair(rows: ResultRow[], valueColumns?: string[]): string {
  const series = valueColumns && valueColumns.length > 0
    ? valueColumns.map(assertValueColumn)
    : ["oos_error", "r_hat"];
  const groups = gridPoints(rows);
  const dropped = rows.filter((row) =>
    series.some((column) => {
      const v = (row as unknown as Record<string, number | null>)[column];
      return typeof v !== "number" || !Number.isFinite(v);
    })).length;
  const annotation = dropped > 0 ? `excluded ${dropped} row(s) with non-finite values` : "";
  return renderGroupedBoxes(
    groups, series,
    (row, column) => (row as unknown as Record<string, number | null>)[column],
    series.join(", "), `${series.join(" vs ")} by grid point`, annotation,
  );
}

export function renderRelativeErrorBox(rows: ResultRow[]): string {
  const kept = rows.filter((row) => !row.degenerate);
  const excluded = rows.length - kept.length;
  if (kept.length === 0) {
    throw new SchemaMismatch("all rows are degenerate; nothing to plot");
  }
  const groups = gridPoints(kept);
  const annotation = excluded > 0 ? `excluded ${excluded} degenerate row(s)` : "";
  return renderGroupedBoxes(
    groups, ["relative_error"],
    (row) => Math.abs(1 - row.r_hat / row.oos_error),
    "|1 - r_hat / oos_error|", "relative error of the risk estimate", annotation,
  );
}

export interface HeatmapCell {
  lambda: number;
  lambdaStar: number;
  mean: number | null;
  count: number;
}

/** Per-cell averages over replications; exported for independent checking. */
export function heatmapCells(rows: ResultRow[], column: string): HeatmapCell[] {
  assertValueColumn(column);
  if (rows.some((row) => row.lambda_star === null)) {
    throw new SchemaMismatch("heatmap needs the (lambda, lambda_star) grid; lambda_star is empty");
  }
  const points = gridPoints(rows);
  return points.map((point) => {
    const values = finiteValues(point.rows, column);
    return {
      lambda: point.lambda,
      lambdaStar: point.lambdaStar as number,
      mean: values.length > 0 ? mean(values) : null,
      count: values.length,
    };
  });
}

export function renderHeatmap(rows: ResultRow[], valueColumns?: string[]): string {
  const column = valueColumns && valueColumns.length > 0
    ? assertValueColumn(valueColumns[0])
    : "r_hat";
  const cells = heatmapCells(rows, column);
  const lambdas = [...new Set(cells.map((c) => c.lambda))].sort((a, b) => a - b);
  const stars = [...new Set(cells.map((c) => c.lambdaStar))].sort((a, b) => a - b);
  const means = cells.map((c) => c.mean).filter((m): m is number => m !== null);
  if (means.length === 0) {
    throw new SchemaMismatch("no finite cell averages to plot");
  }
  const lo = Math.min(...means);
  const hi = Math.max(...means);
  const span = hi > lo ? hi - lo : 1;
  const cellW = (PLOT_W - 60) / lambdas.length;
  const cellH = PLOT_H / stars.length;
  const body: string[] = [];
  for (const cell of cells) {
    const xi = lambdas.indexOf(cell.lambda);
    const yi = stars.indexOf(cell.lambdaStar);
    const x = MARGIN.left + cellW * xi;
    const y = MARGIN.top + cellH * (stars.length - 1 - yi);
    body.push(el("rect", {
      class: "cell", x, y, width: cellW, height: cellH,
      fill: cell.mean === null ? "#cccccc" : colormap((cell.mean - lo) / span),
      stroke: "#ffffff", "stroke-width": 1,
      "data-lambda": String(cell.lambda),
      "data-lambda-star": String(cell.lambdaStar),
      "data-mean": cell.mean === null ? "" : String(cell.mean),
      "data-count": cell.count,
    }));
    if (cell.mean !== null) {
      body.push(text(x + cellW / 2, y + cellH / 2 + 4, fmt(cell.mean), {
        "text-anchor": "middle", "font-size": 10,
        fill: (cell.mean - lo) / span > 0.6 ? "#111111" : "#ffffff",
      }));
    }
  }
  lambdas.forEach((lam, i) => {
    body.push(text(MARGIN.left + cellW * (i + 0.5), MARGIN.top + PLOT_H + 16, fmt(lam),
      { "text-anchor": "middle", "font-size": 10 }));
  });
  stars.forEach((star, i) => {
    body.push(text(MARGIN.left - 8, MARGIN.top + cellH * (stars.length - 1 - i) + cellH / 2 + 4,
      fmt(star), { "text-anchor": "end", "font-size": 10 }));
  });
  body.push(text(MARGIN.left + (PLOT_W - 60) / 2, HEIGHT - 24,
    "lambda (log-spaced grid)", { "text-anchor": "middle", "font-size": 12 }));
  body.push(text(14, MARGIN.top + PLOT_H / 2, "lambda_star (log-spaced grid)", {
    "text-anchor": "middle", "font-size": 12,
    transform: `rotate(-90 14 ${(MARGIN.top + PLOT_H / 2).toFixed(2)})`,
  }));
  body.push(text(MARGIN.left + (PLOT_W - 60) / 2, 12, `grid average of ${column}`,
    { "text-anchor": "middle", "font-size": 13, "font-weight": "bold" }));
  // Color bar.
  const barX = WIDTH - MARGIN.right - 28;
  const steps = 24;
  for (let i = 0; i < steps; i++) {
    body.push(el("rect", {
      x: barX, y: MARGIN.top + (PLOT_H * (steps - 1 - i)) / steps,
      width: 12, height: PLOT_H / steps + 0.5, fill: colormap(i / (steps - 1)),
    }));
  }
  body.push(text(barX + 16, MARGIN.top + PLOT_H, fmt(lo), { "font-size": 9 }));
  body.push(text(barX + 16, MARGIN.top + 8, fmt(hi), { "font-size": 9 }));
  return svgDocument(WIDTH, HEIGHT, body);
}

export function renderFigure(rows: ResultRow[], spec: FigureSpec): string {
  switch (spec.kind) {
    case "boxplot_pair":
      return renderBoxplotPair(rows, spec.valueColumns);
    case "relative_error_box":
      return renderRelativeErrorBox(rows);
    case "heatmap":
      return renderHeatmap(rows, spec.valueColumns);
    default:
      throw new SchemaMismatch(`unknown figure kind '${(spec as FigureSpec).kind}'`);
  }
}
