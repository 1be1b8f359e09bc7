#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadConfig } from "./config.js";
import { checksumPoints } from "./checksum.js";
import { renderRegions, Rendered } from "./figures/regions.js";
import { renderDecay } from "./figures/decay.js";
import { renderXi } from "./figures/xi.js";
import { renderMap } from "./figures/map.js";

const renderers = {
  regions: renderRegions,
  decay: renderDecay,
  xi: renderXi,
  map: renderMap,
} as const;

type Kind = keyof typeof renderers;

export function render(kind: Kind, inputText: string, configPath?: string): Rendered {
  const cfg = loadConfig(configPath);
  return renderers[kind](inputText, cfg);
}

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .scriptName("reslab-figures")
    .option("kind", { choices: Object.keys(renderers) as Kind[], demandOption: true, describe: "figure type" })
    .option("in", { type: "string", demandOption: true, describe: "input CSV (or map spec JSON for --kind map)" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("config", { type: "string", describe: "optional JSON styling config" })
    .strict()
    .parse();

  const text = readFileSync(argv.in, "utf-8");
  const { svg, plotted } = render(argv.kind as Kind, text, argv.config);
  writeFileSync(argv.out, svg);
  process.stdout.write(JSON.stringify({
    out: argv.out,
    points: plotted.length,
    checksum: checksumPoints(plotted),
  }) + "\n");
}

main().catch((err: unknown) => {
  const e = err as { name?: string; message?: string };
  process.stderr.write(`${e.name ?? "Error"}: ${e.message ?? String(err)}\n`);
  process.exit(1);
});
