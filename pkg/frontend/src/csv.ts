/**
 * Parsing for the experiment results CSV (fixed 15-column schema, RFC-4180,
 * LF line endings, empty fields for inapplicable values, "nan" for failures).
 */
import Papa from "papaparse";

export const RESULT_COLUMNS = [
  "rep", "lambda", "lambda_star", "oos_error", "r_hat", "tau2_hat",
  "sigma2_hat", "sigma2_star", "df_hat", "trace_dpsi", "n_active",
  "n_inliers", "kkt_gap", "degenerate", "wall_ms",
] as const;

export type ResultColumn = (typeof RESULT_COLUMNS)[number];

export interface ResultRow {
  rep: number;
  lambda: number;
  lambda_star: number | null;
  oos_error: number;
  r_hat: number;
  tau2_hat: number | null;
  sigma2_hat: number | null;
  sigma2_star: number;
  df_hat: number;
  trace_dpsi: number;
  n_active: number | null;
  n_inliers: number | null;
  kkt_gap: number;
  degenerate: boolean;
  wall_ms: number;
}

export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

const INT_COLUMNS = new Set(["rep", "n_active", "n_inliers"]);
const NULLABLE = new Set(["lambda_star", "tau2_hat", "sigma2_hat", "n_active", "n_inliers"]);

function parseCell(column: string, raw: string): number | boolean | null {
  if (raw === "") {
    if (!NULLABLE.has(column)) {
      throw new SchemaMismatch(`empty value in required column '${column}'`);
    }
    return null;
  }
  if (column === "degenerate") {
    if (raw !== "true" && raw !== "false") {
      throw new SchemaMismatch(`column 'degenerate' holds '${raw}', expected true/false`);
    }
    return raw === "true";
  }
  if (raw === "nan") return Number.NaN;
  const value = Number(raw);
  if (Number.isNaN(value)) {
    throw new SchemaMismatch(`column '${column}' holds non-numeric value '${raw}'`);
  }
  return INT_COLUMNS.has(column) ? Math.trunc(value) : value;
}

/** Parse results CSV text; rejects missing columns and empty inputs. */
export function parseResultsCsv(text: string): ResultRow[] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaMismatch(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const records = parsed.data;
  if (records.length === 0) {
    throw new SchemaMismatch("empty CSV: no header row");
  }
  const header = records[0];
  for (const column of RESULT_COLUMNS) {
    if (!header.includes(column)) {
      throw new SchemaMismatch(`missing column '${column}' in CSV header`);
    }
  }
  if (records.length === 1) {
    throw new SchemaMismatch("empty CSV: header but no data rows");
  }
  const index = new Map(header.map((name, i) => [name, i] as const));
  const rows: ResultRow[] = [];
  for (const record of records.slice(1)) {
    const row: Record<string, number | boolean | null> = {};
    for (const column of RESULT_COLUMNS) {
      row[column] = parseCell(column, record[index.get(column)!] ?? "");
    }
    rows.push(row as unknown as ResultRow);
  }
  return rows;
}

/** Columns that may be plotted as values. */
export function assertValueColumn(column: string): ResultColumn {
  if (!(RESULT_COLUMNS as readonly string[]).includes(column)) {
    throw new SchemaMismatch(`unknown column '${column}'; expected one of ${RESULT_COLUMNS.join(", ")}`);
  }
  return column as ResultColumn;
}
