/** Minimal CSV reader for the artifact schemas (no quoting in our files). */

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV document");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(`CSV row has ${row.length} fields, expected ${header.length}`);
    }
  }
  return { header, rows };
}

export function requireColumns(table: CsvTable, expected: string[], source: string): void {
  for (const name of expected) {
    if (!table.header.includes(name)) {
      throw new Error(`${source}: missing column '${name}' (found: ${table.header.join(",")})`);
    }
  }
}

export function column(table: CsvTable, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`no column '${name}'`);
  }
  return table.rows.map((row) => row[idx]);
}

export function numericColumn(table: CsvTable, name: string): number[] {
  return column(table, name).map((value) => {
    const parsed = Number(value);
    if (!Number.isFinite(parsed)) {
      throw new Error(`column '${name}' holds non-numeric value '${value}'`);
    }
    return parsed;
  });
}
