import { NoDataError, SchemaError } from "./errors.js";

export interface CsvTable {
  /** first comment line of the file, without the leading "# " */
  header: string;
  /** key=value parameters parsed from the header line */
  params: Record<string, string>;
  columns: string[];
  rows: string[][];
}

/** Parse a reslab CSV: one "# ..." header line, a column row, data rows. */
export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  const comments = lines.filter((l) => l.startsWith("#"));
  const body = lines.filter((l) => !l.startsWith("#"));
  if (body.length === 0) throw new SchemaError("missing column row");
  const header = comments.length > 0 ? comments[0]!.replace(/^#\s*/, "") : "";
  const columns = body[0]!.split(",").map((c) => c.trim());
  const rows = body.slice(1).map((l) => l.split(",").map((c) => c.trim()));
  if (rows.length === 0) throw new NoDataError("no data rows");
  return { header, params: parseParams(header), columns, rows };
}

/** key=value pairs from a header line; values may be quoted or bracketed. */
export function parseParams(header: string): Record<string, string> {
  const out: Record<string, string> = {};
  for (const m of header.matchAll(/([\w-]+)=("[^"]*"|\[[^\]]*\]|\S+)/g)) {
    out[m[1]!] = m[2]!.replace(/^"|"$/g, "");
  }
  return out;
}

export function columnIndex(table: CsvTable, name: string): number {
  const i = table.columns.indexOf(name);
  if (i < 0) throw new SchemaError(`missing column ${name}`);
  return i;
}

export function numericParam(table: CsvTable, name: string): number {
  const raw = table.params[name];
  if (raw === undefined) throw new SchemaError(`missing header parameter ${name}`);
  const v = Number(raw);
  if (!Number.isFinite(v)) throw new SchemaError(`bad header parameter ${name}=${raw}`);
  return v;
}

export function numeric(row: string[], index: number, column: string): number {
  const v = Number(row[index]);
  if (!Number.isFinite(v)) throw new SchemaError(`non-numeric value in column ${column}`);
  return v;
}
