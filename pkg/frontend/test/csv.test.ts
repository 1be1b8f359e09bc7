import { describe, expect, it } from "vitest";
import { columnIndex, numericParam, parseCsv, parseParams } from "../src/csv.js";
import { NoDataError, SchemaError } from "../src/errors.js";

const sample = [
  '# reslab 0.1.0 map=03c2912c337a cmd=regions grid=120 mu_star=0.5 phi=["1", "x"]',
  "region,a,b",
  "A0,0.4,0.0",
  "A0,0.5,0.0",
].join("\n");

describe("parseCsv", () => {
  it("splits header, columns and rows", () => {
    const t = parseCsv(sample);
    expect(t.columns).toEqual(["region", "a", "b"]);
    expect(t.rows).toHaveLength(2);
    expect(t.rows[0]).toEqual(["A0", "0.4", "0.0"]);
  });

  it("parses header params including bracketed values", () => {
    const t = parseCsv(sample);
    expect(t.params["grid"]).toBe("120");
    expect(t.params["mu_star"]).toBe("0.5");
    expect(t.params["phi"]).toBe('["1", "x"]');
    expect(numericParam(t, "mu_star")).toBeCloseTo(0.5, 12);
  });

  it("rejects files with no data rows", () => {
    expect(() => parseCsv("# header\nregion,a,b\n")).toThrow(NoDataError);
    expect(() => parseCsv("# header\nregion,a,b\n")).toThrow("no data rows");
  });

  it("rejects files with no column row", () => {
    expect(() => parseCsv("# header only\n")).toThrow(SchemaError);
  });

  it("names the missing column", () => {
    const t = parseCsv(sample);
    expect(() => columnIndex(t, "absent")).toThrow(SchemaError);
    expect(() => columnIndex(t, "absent")).toThrow("missing column absent");
    expect(columnIndex(t, "b")).toBe(2);
  });

  it("names the missing header parameter", () => {
    const t = parseCsv(sample);
    expect(() => numericParam(t, "tau")).toThrow("missing header parameter tau");
  });
});

describe("parseParams", () => {
  it("strips quotes from quoted values", () => {
    const p = parseParams('cmd=correlate phi="x - 1/2" n=30');
    expect(p["phi"]).toBe("x - 1/2");
    expect(p["n"]).toBe("30");
  });
});
