/** Affine data-to-viewport map for one axis. */
export interface LinearMap {
  scale: number;
  offset: number;
}

export function linearMap(d0: number, d1: number, v0: number, v1: number): LinearMap {
  const scale = (v1 - v0) / (d1 - d0);
  return { scale, offset: v0 - d0 * scale };
}

export function apply(m: LinearMap, x: number): number {
  return m.scale * x + m.offset;
}

export interface XY {
  x: LinearMap;
  y: LinearMap;
}

/** Map data ranges onto a plot rectangle; y inverted so data-up is screen-up. */
export function makeXY(
  xRange: readonly [number, number],
  yRange: readonly [number, number],
  width: number,
  height: number,
  margin: number,
): XY {
  return {
    x: linearMap(xRange[0], xRange[1], margin, width - margin),
    y: linearMap(yRange[0], yRange[1], height - margin, margin),
  };
}
