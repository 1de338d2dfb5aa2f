/** CSV/JSON input parsing with named-column schema errors. */

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string, file: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${file}: file is empty (no header row)`);
  }
  const header = lines[0].split(",").map((s) => s.trim());
  const rows = lines.slice(1).map((l) => l.split(",").map((s) => s.trim()));
  if (rows.length === 0) {
    throw new SchemaError(`${file}: no data rows`);
  }
  for (let i = 0; i < rows.length; i++) {
    if (rows[i].length !== header.length) {
      throw new SchemaError(
        `${file}: row ${i + 1} has ${rows[i].length} cells, header has ${header.length}`
      );
    }
  }
  return { header, rows };
}

export function requireColumns(table: Table, required: string[], file: string): void {
  for (const c of required) {
    if (!table.header.includes(c)) {
      throw new SchemaError(`${file}: missing column '${c}'`);
    }
  }
}

function parseNumber(s: string): number {
  if (s === "inf") return Infinity;
  if (s === "-inf") return -Infinity;
  if (s === "nan") return NaN;
  if (s === "") return NaN;
  return Number(s);
}

/** Numeric column by name; `finite` demands every value be plottable. */
export function column(table: Table, name: string, file: string, finite = true): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${file}: missing column '${name}'`);
  }
  return table.rows.map((row, i) => {
    const v = parseNumber(row[idx]);
    if (Number.isNaN(v) && row[idx] !== "nan") {
      throw new SchemaError(`${file}: column '${name}' row ${i + 1}: not a number (${row[idx]})`);
    }
    if (finite && !Number.isFinite(v)) {
      throw new SchemaError(`${file}: column '${name}' row ${i + 1}: non-finite value ${row[idx]}`);
    }
    return v;
  });
}

export interface BoundRow {
  bound_id: string;
  instances: number;
  passes: number;
  worst_ratio: number;
  failures: number[];
}

export function parseBoundReport(text: string, file: string): BoundRow[] {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (e) {
    throw new SchemaError(`${file}: not valid JSON (${(e as Error).message})`);
  }
  if (!Array.isArray(data) || data.length === 0) {
    throw new SchemaError(`${file}: expected a nonempty JSON array of check summaries`);
  }
  return data.map((entry, i) => {
    const obj = entry as Record<string, unknown>;
    for (const key of ["bound_id", "instances", "passes", "worst_ratio", "failures"]) {
      if (!(key in obj)) {
        throw new SchemaError(`${file}: entry ${i}: missing field '${key}'`);
      }
    }
    return {
      bound_id: String(obj.bound_id),
      instances: Number(obj.instances),
      passes: Number(obj.passes),
      worst_ratio: Number(obj.worst_ratio),
      failures: obj.failures as number[],
    };
  });
}
