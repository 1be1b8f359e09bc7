import { describe, expect, it } from "vitest";
import { checksumPoints } from "../src/checksum.js";

describe("checksumPoints", () => {
  it("is deterministic and 8 hex digits", () => {
    const pts: [number, number][] = [[0.5, 0.0], [1.0, -0.25]];
    const h = checksumPoints(pts);
    expect(h).toMatch(/^[0-9a-f]{8}$/);
    expect(checksumPoints(pts)).toBe(h);
  });

  it("is sensitive to order and to values", () => {
    const a = checksumPoints([[1, 2], [3, 4]]);
    expect(checksumPoints([[3, 4], [1, 2]])).not.toBe(a);
    expect(checksumPoints([[1, 2], [3, 4.0000001]])).not.toBe(a);
  });

  it("hashes the empty list stably", () => {
    expect(checksumPoints([])).toBe(checksumPoints([]));
  });
});
