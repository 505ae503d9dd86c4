/**
 * Schema-checked reading of the solver's CSV outputs.
 *
 * Every file the pipeline writes has an exact header; a mismatch here means
 * the wrong file was wired into a plot spec, so it is a hard error that
 * names the offending columns.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export const SCHEMAS = {
  hysteresis: ["t", "F", "V", "branch", "jump_flag"],
  interface: ["t", "x", "V_est", "F"],
  phi_table: ["V", "phi", "phi_prime"],
  stability: ["V", "beta", "max_real", "stable", "phi_prime", "c0"],
  contour: ["t", "point_index", "x", "y"],
} as const;

export type SchemaId = keyof typeof SCHEMAS;

export class SchemaError extends Error {}

export interface Table {
  schema: SchemaId;
  columns: Record<string, number[]>;
  rowCount: number;
  sourcePath: string;
}

export function readTable(path: string, schema: SchemaId): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<string[]>(text.trimEnd(), { delimiter: "," });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  const header = rows[0];
  const expected = SCHEMAS[schema] as readonly string[];
  if (header.length !== expected.length ||
      expected.some((name, i) => header[i] !== name)) {
    const missing = expected.filter((c) => !header.includes(c));
    throw new SchemaError(
      `${path}: header [${header.join(",")}] does not match schema ` +
      `'${schema}' [${expected.join(",")}]` +
      (missing.length ? `; missing columns: ${missing.join(", ")}` : ""),
    );
  }
  const columns: Record<string, number[]> = {};
  for (const name of expected) columns[name] = [];
  for (let r = 1; r < rows.length; r++) {
    const row = rows[r];
    if (row.length === 1 && row[0] === "") continue;
    if (row.length !== expected.length) {
      throw new SchemaError(`${path}:${r + 1}: expected ${expected.length} fields`);
    }
    for (let c = 0; c < expected.length; c++) {
      const v = Number(row[c]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`${path}:${r + 1}: non-numeric ${expected[c]}=${row[c]}`);
      }
      columns[expected[c]].push(v);
    }
  }
  return { schema, columns, rowCount: rows.length - 1, sourcePath: path };
}
