import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { ResultRow, parseResultsCsv } from "../src/csv.js";
import { heatmapCells, renderBoxplotPair, renderFigure, renderHeatmap, renderRelativeErrorBox } from "../src/figures.js";

const FIXTURE = join(__dirname, "..", "fixtures", "huber_grid.csv");

function syntheticRows(reps: number, lambdas: number[], stars: number[]): ResultRow[] {
  const rows: ResultRow[] = [];
  for (let rep = 0; rep < reps; rep++) {
    for (const lambda of lambdas) {
      for (const star of stars) {
        rows.push({
          rep, lambda, lambda_star: star,
          oos_error: 1 + 0.1 * rep + lambda,
          r_hat: 1 + 0.1 * rep + lambda + 0.05 * star,
          tau2_hat: null, sigma2_hat: null,
          sigma2_star: 1, df_hat: 3, trace_dpsi: 40,
          n_active: 3, n_inliers: 45, kkt_gap: 1e-9,
          degenerate: false, wall_ms: 5,
        });
      }
    }
  }
  return rows;
}

function countMatches(svg: string, pattern: RegExp): number {
  return (svg.match(pattern) ?? []).length;
}

describe("boxplot_pair", () => {
  it("draws one group per grid point with two boxes each", () => {
    // 12 rows = 2 reps x 6 grid points -> 6 groups x 2 series = 12 boxes.
    const rows = syntheticRows(2, [0.1, 0.2, 0.4], [0.05, 0.1]);
    expect(rows.length).toBe(12);
    const svg = renderBoxplotPair(rows);
    expect(countMatches(svg, /class="box"/g)).toBe(12);
    expect(countMatches(svg, /data-series="oos_error"/g)).toBe(6);
    expect(countMatches(svg, /data-series="r_hat"/g)).toBe(6);
  });

  it("annotates excluded non-finite rows", () => {
    const rows = syntheticRows(3, [0.1], [0.05]);
    rows[0].r_hat = Number.NaN;
    const svg = renderBoxplotPair(rows);
    expect(svg).toContain("excluded 1 row(s) with non-finite values");
  });
});

describe("relative_error_box", () => {
  it("excludes degenerate rows and annotates the count", () => {
    const rows = syntheticRows(4, [0.1, 0.2], [0.05]);
    rows[0].degenerate = true;
    rows[3].degenerate = true;
    const svg = renderRelativeErrorBox(rows);
    expect(svg).toContain("excluded 2 degenerate row(s)");
    expect(countMatches(svg, /class="box"/g)).toBe(2);
  });

  it("refuses to plot when everything is degenerate", () => {
    const rows = syntheticRows(2, [0.1], [0.05]).map((r) => ({ ...r, degenerate: true }));
    expect(() => renderRelativeErrorBox(rows)).toThrow(/degenerate/);
  });
});

describe("heatmap", () => {
  it("averages each cell over reps, matching an independent recomputation", () => {
    const rows = syntheticRows(5, [0.1, 0.2, 0.4], [0.05, 0.1]);
    const cells = heatmapCells(rows, "r_hat");
    expect(cells.length).toBe(6);
    for (const cell of cells) {
      // Spreadsheet-style recomputation: sorted ascending before summing, so
      // the accumulation order differs from the renderer's.
      const values = rows
        .filter((r) => r.lambda === cell.lambda && r.lambda_star === cell.lambdaStar)
        .map((r) => r.r_hat)
        .sort((a, b) => a - b);
      const recomputed = values.reduce((acc, v) => acc + v, 0) / values.length;
      expect(Math.abs((cell.mean as number) - recomputed)).toBeLessThanOrEqual(1e-12);
    }
  });

  it("embeds cell means as data attributes", () => {
    const rows = syntheticRows(2, [0.1, 0.2], [0.05]);
    const svg = renderHeatmap(rows, ["oos_error"]);
    expect(countMatches(svg, /class="cell"/g)).toBe(2);
    expect(svg).toContain("data-mean=");
    expect(svg).toContain("grid average of oos_error");
  });

  it("rejects CSVs without a lambda_star grid", () => {
    const rows = syntheticRows(2, [0.1], [0.05]).map((r) => ({ ...r, lambda_star: null }));
    expect(() => renderHeatmap(rows)).toThrow(/lambda_star/);
  });

  it("names an unknown value column", () => {
    const rows = syntheticRows(2, [0.1], [0.05]);
    expect(() => renderHeatmap(rows, ["not_a_column"])).toThrow(/not_a_column/);
  });
});

describe("determinism", () => {
  it("renders byte-identical output for the same input", () => {
    const text = readFileSync(FIXTURE, "utf-8");
    const rows1 = parseResultsCsv(text);
    const rows2 = parseResultsCsv(text);
    for (const kind of ["boxplot_pair", "relative_error_box", "heatmap"] as const) {
      expect(renderFigure(rows1, { kind })).toBe(renderFigure(rows2, { kind }));
    }
  });
});

describe("fixture acceptance", () => {
  // Desk-scale Huber-grid CSV rendered into all three figure kinds.
  const rows = parseResultsCsv(readFileSync(FIXTURE, "utf-8"));
  const points = new Set(rows.map((r) => `${r.lambda}|${r.lambda_star}`));

  it("boxplot_pair groups every grid point", () => {
    const svg = renderFigure(rows, { kind: "boxplot_pair" });
    expect(countMatches(svg, /data-series="oos_error"/g)).toBe(points.size);
  });

  it("relative_error_box annotates the degenerate exclusions", () => {
    const degenerate = rows.filter((r) => r.degenerate).length;
    expect(degenerate).toBeGreaterThan(0);
    const svg = renderFigure(rows, { kind: "relative_error_box" });
    expect(svg).toContain(`excluded ${degenerate} degenerate row(s)`);
  });

  it("heatmap cell means equal recomputed averages to 1e-12", () => {
    const svg = renderFigure(rows, { kind: "heatmap" });
    const matches = [...svg.matchAll(
      /data-lambda="([^"]*)" data-lambda-star="([^"]*)" data-mean="([^"]*)" data-count="(\d+)"/g,
    )];
    expect(matches.length).toBe(points.size);
    for (const [, lam, star, meanText, countText] of matches) {
      const values = rows
        .filter((r) => String(r.lambda) === lam && String(r.lambda_star) === star)
        .map((r) => r.r_hat)
        .filter((v) => Number.isFinite(v))
        .sort((a, b) => a - b);
      expect(values.length).toBe(Number(countText));
      if (meanText === "") continue;
      const recomputed = values.reduce((acc, v) => acc + v, 0) / values.length;
      expect(Math.abs(Number(meanText) - recomputed)).toBeLessThanOrEqual(1e-12);
    }
  });
});

describe("cli", () => {
  it("renders the fixture end to end", () => {
    const dir = mkdtempSync(join(tmpdir(), "hdrisk-figures-"));
    const out = join(dir, "fig.svg");
    const code = main(["render", "--kind", "heatmap", "--csv", FIXTURE, "--out", out]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf-8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain('class="cell"');
  });

  it("rejects non-svg outputs with a clear message", () => {
    expect(main(["--kind", "heatmap", "--csv", FIXTURE, "--out", "fig.png"])).toBe(1);
  });

  it("fails cleanly on a missing file", () => {
    expect(main(["--kind", "heatmap", "--csv", "/nope.csv", "--out", "/tmp/x.svg"])).toBe(1);
  });

  it("rejects unknown kinds", () => {
    expect(main(["--kind", "pie", "--csv", FIXTURE, "--out", "/tmp/x.svg"])).toBe(1);
  });
});
