import { execFileSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export const QUAD_SPEC = JSON.stringify({
  type: "smooth_full_branch",
  partition: [0.0, 0.2679491924311227, 0.5857864376269049, 1.0],
  branches: [{ expr: "4*x - x^2" }, { expr: "4*x - x^2 - 1" }, { expr: "4*x - x^2 - 2" }],
});

export const DOUBLING_SPEC = JSON.stringify({
  type: "affine_markov",
  partition: [0.0, 0.5, 1.0],
  branches: [{ slope: 2.0, offset: 0.0 }, { slope: 2.0, offset: -1.0 }],
});

export interface Fixtures {
  dir: string;
  regionsCsv: string;
  corrCsv: string;
  xiCsv: string;
}

let cached: Fixtures | undefined;

/** Produce real CLI outputs once per test run; figures consume only these files. */
export function makeFixtures(): Fixtures {
  if (cached) return cached;
  const dir = mkdtempSync(join(tmpdir(), "reslab-fig-"));
  const quad = join(dir, "quad.json");
  const doubling = join(dir, "doubling.json");
  writeFileSync(quad, QUAD_SPEC);
  writeFileSync(doubling, DOUBLING_SPEC);
  const run = (args: string[]) => execFileSync("reslab", args, { encoding: "utf-8" });
  run(["regions", "--map", quad, "--grid", "120", "--out", join(dir, "regions.csv")]);
  run(["correlate", "--map", doubling, "--phi", "x", "--psi", "x",
    "--measure", "srb", "--n", "30", "--out", join(dir, "corr.csv")]);
  run(["xi-scan", "--map", quad, "--re", "0.6:1.8:13", "--im", "0", "--out", join(dir, "xi.csv")]);
  cached = {
    dir,
    regionsCsv: join(dir, "regions.csv"),
    corrCsv: join(dir, "corr.csv"),
    xiCsv: join(dir, "xi.csv"),
  };
  return cached;
}

/** Independent point extraction straight from the CSV text, in file order. */
export function csvPoints(text: string, cols: [string, string][]): [number, number][] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0 && !l.startsWith("#"));
  const names = lines[0]!.split(",").map((s) => s.trim());
  const rows = lines.slice(1).map((l) => l.split(","));
  const out: [number, number][] = [];
  for (const [cx, cy] of cols) {
    const ix = names.indexOf(cx);
    const iy = names.indexOf(cy);
    for (const r of rows) out.push([Number(r[ix]), Number(r[iy])]);
  }
  return out;
}
