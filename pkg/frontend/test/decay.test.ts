import { readFileSync } from "node:fs";
import { beforeAll, describe, expect, it } from "vitest";
import { checksumPoints } from "../src/checksum.js";
import { loadConfig } from "../src/config.js";
import { renderDecay } from "../src/figures/decay.js";
import { csvPoints, makeFixtures } from "./fixtures.js";

let csvText: string;

beforeAll(() => {
  csvText = readFileSync(makeFixtures().corrCsv, "utf-8");
});

describe("decay figure", () => {
  it("ledgers the correlation series then the bound overlay, matching the CSV", () => {
    const { plotted } = renderDecay(csvText, loadConfig());
    const direct = csvPoints(csvText, [["n", "abs"], ["n", "predicted_bound"]]);
    // every value in this fixture is positive, so nothing is dropped by the log axis
    expect(plotted.length).toBe(direct.length);
    expect(checksumPoints(plotted)).toBe(checksumPoints(direct));
  });

  it("draws one marker per correlation value and a dashed overlay", () => {
    const { svg, plotted } = renderDecay(csvText, loadConfig());
    const markers = [...svg.matchAll(/<circle /g)].length;
    expect(markers).toBe(plotted.length / 2);
    expect(svg).toContain('stroke-dasharray="5 3"');
  });

  it("carries a geometric bound through unchanged", () => {
    const { plotted } = renderDecay(csvText, loadConfig());
    const overlay = plotted.slice(plotted.length / 2);
    for (let i = 1; i < overlay.length; i++) {
      expect(overlay[i]![1] / overlay[i - 1]![1]).toBeCloseTo(0.5, 10);
    }
  });
});
