import { columnIndex, numeric, parseCsv } from "../csv.js";
import { FigureConfig } from "../config.js";
import { Point } from "../checksum.js";
import { apply, makeXY } from "../transform.js";
import { fmtCoord, pathData, svgDocument, tag, text } from "../svg.js";
import { Rendered } from "./regions.js";

/** Correlation moduli against n on a log10 axis, with the resonance bound overlaid. */
export function renderDecay(csvText: string, cfg: FigureConfig): Rendered {
  const table = parseCsv(csvText);
  const iN = columnIndex(table, "n");
  const iAbs = columnIndex(table, "abs");
  const iBound = columnIndex(table, "predicted_bound");

  // log scale drops non-positive values; kept rows define the ledger
  const series: Point[] = [];
  const overlay: Point[] = [];
  for (const row of table.rows) {
    const n = numeric(row, iN, "n");
    const c = numeric(row, iAbs, "abs");
    const b = numeric(row, iBound, "predicted_bound");
    if (c > 0) series.push([n, c]);
    if (b > 0) overlay.push([n, b]);
  }
  const logLo = Math.min(...series.map((p) => Math.log10(p[1])), ...overlay.map((p) => Math.log10(p[1])));
  const logHi = Math.max(...series.map((p) => Math.log10(p[1])), ...overlay.map((p) => Math.log10(p[1])));
  const nLo = Math.min(...series.map((p) => p[0]), ...overlay.map((p) => p[0]));
  const nHi = Math.max(...series.map((p) => p[0]), ...overlay.map((p) => p[0]));
  const pad = Math.max((logHi - logLo) * 0.05, 0.1);
  const xy = makeXY([nLo, Math.max(nHi, nLo + 1)], [logLo - pad, logHi + pad], cfg.width, cfg.height, cfg.margin);

  const toLog = (pts: Point[]): Point[] => pts.map(([n, v]) => [n, Math.log10(v)] as Point);
  const body: string[] = [];
  body.push(tag("rect", { x: 0, y: 0, width: cfg.width, height: cfg.height, fill: "white" }));
  body.push(tag("path", {
    d: pathData(xy, toLog(overlay), false),
    fill: "none", stroke: cfg.colors.overlay, "stroke-width": 1.5, "stroke-dasharray": "5 3",
  }));
  for (const [n, v] of toLog(series)) {
    body.push(tag("circle", {
      cx: fmtCoord(apply(xy.x, n)), cy: fmtCoord(apply(xy.y, v)), r: 3,
      fill: cfg.colors.series, stroke: "none",
    }));
  }
  body.push(text(xy, nHi, logLo - pad, "n", { "text-anchor": "end", fill: "#666" }));
  body.push(text(xy, nLo, logHi + pad, "log10 |C(n)|", { "text-anchor": "start", fill: "#666" }));

  return { svg: svgDocument(cfg.width, cfg.height, body), plotted: [...series, ...overlay] };
}
