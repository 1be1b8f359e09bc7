export type Point = readonly [number, number];

/** FNV-1a over the canonical decimal form of each coordinate pair, in order. */
export function checksumPoints(points: readonly Point[]): string {
  let h = 0x811c9dc5;
  for (const [a, b] of points) {
    const s = `${a},${b};`;
    for (let i = 0; i < s.length; i++) {
      h ^= s.charCodeAt(i);
      h = Math.imul(h, 0x01000193) >>> 0;
    }
  }
  return h.toString(16).padStart(8, "0");
}
