import { describe, expect, it } from "vitest";
import { checksumPoints } from "../src/checksum.js";
import { loadConfig } from "../src/config.js";
import { renderMap } from "../src/figures/map.js";
import { NoDataError, SchemaError } from "../src/errors.js";
import { DOUBLING_SPEC, QUAD_SPEC } from "./fixtures.js";

describe("map figure", () => {
  it("plots each affine branch by its endpoints", () => {
    const { plotted } = renderMap(DOUBLING_SPEC, loadConfig());
    expect(plotted).toEqual([[0, 0], [0.5, 1], [0.5, 0], [1, 1]]);
    expect(checksumPoints(plotted)).toBe(checksumPoints([[0, 0], [0.5, 1], [0.5, 0], [1, 1]]));
  });

  it("draws the diagonal reference", () => {
    const { svg } = renderMap(DOUBLING_SPEC, loadConfig());
    expect(svg).toContain('stroke-dasharray="4 3"');
  });

  it("rejects non-affine specs by name", () => {
    expect(() => renderMap(QUAD_SPEC, loadConfig())).toThrow(SchemaError);
    expect(() => renderMap(QUAD_SPEC, loadConfig())).toThrow("affine_markov");
  });

  it("rejects malformed JSON and empty branch lists", () => {
    expect(() => renderMap("{not json", loadConfig())).toThrow(SchemaError);
    const empty = JSON.stringify({ type: "affine_markov", partition: [0], branches: [] });
    expect(() => renderMap(empty, loadConfig())).toThrow(NoDataError);
  });
});
