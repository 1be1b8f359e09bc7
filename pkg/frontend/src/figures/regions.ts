import { columnIndex, CsvTable, numeric, numericParam, parseCsv } from "../csv.js";
import { FigureConfig } from "../config.js";
import { Point } from "../checksum.js";
import { makeXY } from "../transform.js";
import { axes, circle, pathData, svgDocument, tag, text } from "../svg.js";

export interface Rendered {
  svg: string;
  plotted: Point[];
}

interface Group {
  name: string;
  points: Point[];
}

function groupRows(table: CsvTable): Group[] {
  const iName = columnIndex(table, "region");
  const iA = columnIndex(table, "a");
  const iB = columnIndex(table, "b");
  const groups: Group[] = [];
  for (const row of table.rows) {
    const name = row[iName] ?? "";
    const p: Point = [numeric(row, iA, "a"), numeric(row, iB, "b")];
    const last = groups[groups.length - 1];
    if (last && last.name === name) last.points.push(p);
    else groups.push({ name, points: [p] });
  }
  return groups;
}

/** Split a polyline where the gap between neighbours is far above typical. */
function splitRuns(points: readonly Point[]): Point[][] {
  if (points.length < 3) return [points.slice()];
  const gaps = points.slice(1).map((p, i) => {
    const q = points[i]!;
    return Math.hypot(p[0] - q[0], p[1] - q[1]);
  });
  const sorted = [...gaps].sort((x, y) => x - y);
  const median = sorted[Math.floor(sorted.length / 2)]!;
  const cut = Math.max(20 * median, 1e-9);
  const runs: Point[][] = [[points[0]!]];
  for (let i = 1; i < points.length; i++) {
    if (gaps[i - 1]! > cut) runs.push([]);
    runs[runs.length - 1]!.push(points[i]!);
  }
  return runs;
}

/** Closed outline for the area between an upper and a lower run. */
function betweenRuns(runs: Point[][]): Point[] {
  if (runs.length !== 2) return runs.flat();
  return [...runs[0]!, ...[...runs[1]!].reverse()];
}

/** Close one run against the top or bottom plot edge, away from the axis. */
function awayFromAxis(run: Point[], edge: number): Point[] {
  const first = run[0]!;
  const last = run[run.length - 1]!;
  return [...run, [last[0], edge], [first[0], edge]];
}

export function renderRegions(csvText: string, cfg: FigureConfig): Rendered {
  const table = parseCsv(csvText);
  const groups = groupRows(table);
  const muStar = numericParam(table, "mu_star");
  const tau = numericParam(table, "tau");
  const essential = numericParam(table, "essential_bound");
  const xy = makeXY(cfg.xRange, cfg.yRange, cfg.width, cfg.height, cfg.margin);
  const body: string[] = [];
  const plotted: Point[] = [];

  body.push(tag("rect", { x: 0, y: 0, width: cfg.width, height: cfg.height, fill: "white" }));
  body.push(...axes(xy, cfg.xRange, cfg.yRange));

  // reference circles and the shaded essential disk, all from header params
  body.push(circle(xy, 0, 0, essential, { fill: cfg.colors.essential, "fill-opacity": 0.8, stroke: "none" }));
  for (const [radius, dash] of [[1.0, ""], [tau, "6 4"], [muStar, "2 3"]] as const) {
    const attrs: Record<string, string | number> = { fill: "none", stroke: "#444", "stroke-width": 1 };
    if (dash) attrs["stroke-dasharray"] = dash;
    body.push(circle(xy, 0, 0, radius, attrs));
  }

  const names = [...new Set(groups.map((g) => g.name))];
  for (const group of groups) {
    const color = cfg.colors.regions[names.indexOf(group.name) % cfg.colors.regions.length]!;
    const runs = splitRuns(group.points);
    if (group.name === "A1" || group.name === "A2") {
      body.push(tag("path", {
        d: pathData(xy, betweenRuns(runs), true),
        fill: color, "fill-opacity": 0.25, stroke: color, "stroke-width": 1.5,
      }));
    } else if (group.name === "A3" || group.name === "A4") {
      for (const run of runs) {
        const up = run.reduce((s, p) => s + p[1], 0) >= 0;
        const edge = up ? cfg.yRange[1] : cfg.yRange[0];
        body.push(tag("path", {
          d: pathData(xy, awayFromAxis(run, edge), true),
          fill: color, "fill-opacity": 0.25, stroke: color, "stroke-width": 1.5,
        }));
      }
    } else {
      for (const run of runs) {
        body.push(tag("path", {
          d: pathData(xy, run, false),
          fill: "none", stroke: color, "stroke-width": 3, "stroke-linecap": "round",
        }));
      }
    }
    plotted.push(...group.points);
    const anchor = group.points[group.points.length - 1]!;
    body.push(text(xy, anchor[0], anchor[1], group.name, { fill: color, "text-anchor": "start" }));
  }

  // the persistent simple eigenvalue at z = 1
  body.push(circle(xy, 1, 0, 0.012, { fill: "#000", stroke: "none" }));

  return { svg: svgDocument(cfg.width, cfg.height, body), plotted };
}
