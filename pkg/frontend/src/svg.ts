import { apply, XY } from "./transform.js";

export type Attrs = Record<string, string | number>;

function esc(v: string): string {
  return v.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");
}

export function tag(name: string, attrs: Attrs, body?: string): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${esc(String(v))}"`);
  const open = parts.length ? `<${name} ${parts.join(" ")}` : `<${name}`;
  return body === undefined ? `${open}/>` : `${open}>${body}</${name}>`;
}

export function fmtCoord(v: number): string {
  // two decimals is below a pixel at the sizes we emit
  return v.toFixed(2);
}

export function pathData(xy: XY, points: readonly (readonly [number, number])[], close: boolean): string {
  const cmds = points.map(([a, b], i) => {
    const px = fmtCoord(apply(xy.x, a));
    const py = fmtCoord(apply(xy.y, b));
    return `${i === 0 ? "M" : "L"}${px} ${py}`;
  });
  if (close) cmds.push("Z");
  return cmds.join(" ");
}

export function circle(xy: XY, ca: number, cb: number, radius: number, attrs: Attrs): string {
  // uniform scale is guaranteed by square axes; use |x scale| for r
  return tag("circle", {
    cx: fmtCoord(apply(xy.x, ca)),
    cy: fmtCoord(apply(xy.y, cb)),
    r: fmtCoord(Math.abs(xy.x.scale) * radius),
    ...attrs,
  });
}

export function text(xy: XY, a: number, b: number, label: string, attrs: Attrs): string {
  return tag(
    "text",
    { x: fmtCoord(apply(xy.x, a)), y: fmtCoord(apply(xy.y, b)), "font-size": 12, ...attrs },
    esc(label),
  );
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

/** Axis lines through the data origin plus tick labels at the range ends. */
export function axes(xy: XY, xRange: readonly [number, number], yRange: readonly [number, number]): string[] {
  const stroke = { stroke: "#999", "stroke-width": 1, fill: "none" };
  const out: string[] = [];
  if (yRange[0] < 0 && yRange[1] > 0) {
    out.push(tag("path", { d: pathData(xy, [[xRange[0], 0], [xRange[1], 0]], false), ...stroke }));
  }
  if (xRange[0] < 0 && xRange[1] > 0) {
    out.push(tag("path", { d: pathData(xy, [[0, yRange[0]], [0, yRange[1]]], false), ...stroke }));
  }
  out.push(text(xy, xRange[1], 0, fmtTick(xRange[1]), { "text-anchor": "end", fill: "#666" }));
  out.push(text(xy, 0, yRange[1], fmtTick(yRange[1]), { "text-anchor": "start", fill: "#666" }));
  return out;
}

function fmtTick(v: number): string {
  return Number.isInteger(v) ? String(v) : String(Math.round(v * 100) / 100);
}
