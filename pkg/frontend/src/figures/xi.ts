import { columnIndex, numeric, parseCsv } from "../csv.js";
import { FigureConfig } from "../config.js";
import { Point } from "../checksum.js";
import { apply, makeXY } from "../transform.js";
import { fmtCoord, pathData, svgDocument, tag, text } from "../svg.js";
import { Rendered } from "./regions.js";

/** Real part of the normalized determinant along a scan, with the y = 1 guide. */
export function renderXi(csvText: string, cfg: FigureConfig): Rendered {
  const table = parseCsv(csvText);
  const iRe = columnIndex(table, "re");
  const iXi = columnIndex(table, "xi_re");

  const series: Point[] = table.rows.map((row) => [numeric(row, iRe, "re"), numeric(row, iXi, "xi_re")]);
  const xs = series.map((p) => p[0]);
  const ys = series.map((p) => p[1]);
  const yLo = Math.min(...ys, 1);
  const yHi = Math.max(...ys, 1);
  const padY = Math.max((yHi - yLo) * 0.08, 0.05);
  const padX = Math.max((Math.max(...xs) - Math.min(...xs)) * 0.05, 0.01);
  const xRange: [number, number] = [Math.min(...xs) - padX, Math.max(...xs) + padX];
  const yRange: [number, number] = [yLo - padY, yHi + padY];
  const xy = makeXY(xRange, yRange, cfg.width, cfg.height, cfg.margin);

  const body: string[] = [];
  body.push(tag("rect", { x: 0, y: 0, width: cfg.width, height: cfg.height, fill: "white" }));
  body.push(tag("path", {
    d: pathData(xy, [[xRange[0], 1], [xRange[1], 1]], false),
    fill: "none", stroke: cfg.colors.guide, "stroke-width": 1, "stroke-dasharray": "4 3",
  }));
  body.push(tag("path", {
    d: pathData(xy, series, false),
    fill: "none", stroke: cfg.colors.series, "stroke-width": 1.5,
  }));
  for (const [x, y] of series) {
    body.push(tag("circle", {
      cx: fmtCoord(apply(xy.x, x)), cy: fmtCoord(apply(xy.y, y)), r: 3,
      fill: cfg.colors.series, stroke: "none",
    }));
  }
  body.push(text(xy, xRange[1], yRange[0], "Re z", { "text-anchor": "end", fill: "#666" }));
  body.push(text(xy, xRange[0], yRange[1], "Re Xi(z)", { "text-anchor": "start", fill: "#666" }));

  return { svg: svgDocument(cfg.width, cfg.height, body), plotted: series };
}
