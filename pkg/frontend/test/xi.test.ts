import { readFileSync } from "node:fs";
import { beforeAll, describe, expect, it } from "vitest";
import { checksumPoints } from "../src/checksum.js";
import { loadConfig } from "../src/config.js";
import { renderXi } from "../src/figures/xi.js";
import { SchemaError } from "../src/errors.js";
import { csvPoints, makeFixtures } from "./fixtures.js";

let csvText: string;

beforeAll(() => {
  csvText = readFileSync(makeFixtures().xiCsv, "utf-8");
});

describe("xi figure", () => {
  it("plots exactly the scanned values, checksum-verified against the CSV", () => {
    const { plotted } = renderXi(csvText, loadConfig());
    const direct = csvPoints(csvText, [["re", "xi_re"]]);
    expect(plotted.length).toBe(direct.length);
    expect(checksumPoints(plotted)).toBe(checksumPoints(direct));
  });

  it("includes the y = 1 reference guide", () => {
    const { svg } = renderXi(csvText, loadConfig());
    expect(svg).toContain('stroke-dasharray="4 3"');
  });

  it("aborts on a scan file missing the xi_re column", () => {
    const broken = csvText.replace("xi_re", "value");
    expect(() => renderXi(broken, loadConfig())).toThrow(SchemaError);
    expect(() => renderXi(broken, loadConfig())).toThrow("missing column xi_re");
  });
});
