import { readFileSync } from "node:fs";
import { z } from "zod";

const range = z.tuple([z.number(), z.number()]);

const schema = z.object({
  width: z.number().int().positive().default(640),
  height: z.number().int().positive().default(640),
  margin: z.number().nonnegative().default(48),
  xRange: range.default([-1.1, 1.1]),
  yRange: range.default([-1.1, 1.1]),
  colors: z
    .object({
      essential: z.string().default("#c7c7c7"),
      regions: z.array(z.string()).default(["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"]),
      series: z.string().default("#1f77b4"),
      overlay: z.string().default("#d62728"),
      guide: z.string().default("#888"),
    })
    .default({}),
});

export type FigureConfig = z.infer<typeof schema>;

export function loadConfig(path?: string): FigureConfig {
  if (path === undefined) return schema.parse({});
  const raw = JSON.parse(readFileSync(path, "utf-8"));
  return schema.parse(raw);
}
