import { SchemaError, NoDataError } from "../errors.js";
import { FigureConfig } from "../config.js";
import { Point } from "../checksum.js";
import { makeXY } from "../transform.js";
import { pathData, svgDocument, tag, text } from "../svg.js";
import { Rendered } from "./regions.js";

interface Branch {
  slope: number;
  offset: number;
}

/** Branch graphs of a piecewise affine Markov map with the diagonal for reference. */
export function renderMap(jsonText: string, cfg: FigureConfig): Rendered {
  let spec: unknown;
  try {
    spec = JSON.parse(jsonText);
  } catch {
    throw new SchemaError("map input is not valid JSON");
  }
  const s = spec as { type?: unknown; partition?: unknown; branches?: unknown };
  if (s.type !== "affine_markov") {
    throw new SchemaError("map figure requires an affine_markov spec");
  }
  const partition = s.partition;
  const branches = s.branches;
  if (!Array.isArray(partition) || !partition.every((v) => typeof v === "number")) {
    throw new SchemaError("missing or non-numeric partition");
  }
  if (!Array.isArray(branches)) throw new SchemaError("missing branches");
  if (branches.length === 0) throw new NoDataError("no data rows");
  if (branches.length !== partition.length - 1) {
    throw new SchemaError("branch count does not match partition");
  }

  const xy = makeXY([-0.05, 1.05], [-0.05, 1.05], cfg.width, cfg.height, cfg.margin);
  const body: string[] = [];
  const plotted: Point[] = [];

  body.push(tag("rect", { x: 0, y: 0, width: cfg.width, height: cfg.height, fill: "white" }));
  body.push(tag("path", {
    d: pathData(xy, [[0, 0], [1, 0], [1, 1], [0, 1]], true),
    fill: "none", stroke: "#999", "stroke-width": 1,
  }));
  body.push(tag("path", {
    d: pathData(xy, [[0, 0], [1, 1]], false),
    fill: "none", stroke: cfg.colors.guide, "stroke-width": 1, "stroke-dasharray": "4 3",
  }));

  branches.forEach((raw, i) => {
    const br = raw as Partial<Branch>;
    if (typeof br.slope !== "number" || typeof br.offset !== "number") {
      throw new SchemaError(`branch ${i} missing slope or offset`);
    }
    const x0 = partition[i] as number;
    const x1 = partition[i + 1] as number;
    const seg: Point[] = [[x0, br.slope * x0 + br.offset], [x1, br.slope * x1 + br.offset]];
    body.push(tag("path", {
      d: pathData(xy, seg, false),
      fill: "none", stroke: cfg.colors.series, "stroke-width": 2,
    }));
    plotted.push(...seg);
  });
  body.push(text(xy, 1, -0.05, "x", { "text-anchor": "end", fill: "#666" }));
  body.push(text(xy, -0.05, 1.05, "f(x)", { "text-anchor": "start", fill: "#666" }));

  return { svg: svgDocument(cfg.width, cfg.height, body), plotted };
}
