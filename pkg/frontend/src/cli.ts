#!/usr/bin/env node
/**
 * render --kind <boxplot_pair|relative_error_box|heatmap> --csv rows.csv
 *        --out fig.svg [--value <column> ...]
 *
 * Exit codes: 0 ok, 1 bad arguments or bad input file, 2 unexpected failure.
 */
import { readFileSync, writeFileSync } from "node:fs";

import { parseResultsCsv, SchemaMismatch } from "./csv.js";
import { FigureKind, renderFigure } from "./figures.js";

const KINDS: FigureKind[] = ["boxplot_pair", "relative_error_box", "heatmap"];

export interface CliOptions {
  kind: FigureKind;
  csv: string;
  out: string;
  valueColumns: string[];
}

export function parseArgs(argv: string[]): CliOptions {
  const args = argv[0] === "render" ? argv.slice(1) : [...argv];
  let kind: string | undefined;
  let csv: string | undefined;
  let out: string | undefined;
  const valueColumns: string[] = [];
  for (let i = 0; i < args.length; i++) {
    const flag = args[i];
    const value = args[i + 1];
    switch (flag) {
      case "--kind":
        kind = value;
        i++;
        break;
      case "--csv":
        csv = value;
        i++;
        break;
      case "--out":
        out = value;
        i++;
        break;
      case "--value":
        if (value === undefined) throw new UsageError("--value needs a column name");
        valueColumns.push(value);
        i++;
        break;
      default:
        throw new UsageError(`unknown argument '${flag}'`);
    }
  }
  if (!kind || !KINDS.includes(kind as FigureKind)) {
    throw new UsageError(`--kind must be one of ${KINDS.join(", ")}`);
  }
  if (!csv) throw new UsageError("--csv is required");
  if (!out) throw new UsageError("--out is required");
  if (!out.endsWith(".svg")) {
    throw new UsageError(
      `output is vector SVG; use a .svg path instead of '${out}'`,
    );
  }
  return { kind: kind as FigureKind, csv, out, valueColumns };
}

export class UsageError extends Error {}

export function main(argv: string[]): number {
  try {
    const options = parseArgs(argv);
    const rows = parseResultsCsv(readFileSync(options.csv, "utf-8"));
    const svg = renderFigure(rows, {
      kind: options.kind,
      valueColumns: options.valueColumns.length ? options.valueColumns : undefined,
    });
    writeFileSync(options.out, svg + "\n");
    return 0;
  } catch (err) {
    if (err instanceof UsageError || err instanceof SchemaMismatch
        || (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    console.error(`unexpected failure: ${(err as Error).stack ?? err}`);
    return 2;
  }
}

const isDirectRun = process.argv[1]?.endsWith("cli.js") || process.argv[1]?.endsWith("hdrisk-render");
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
