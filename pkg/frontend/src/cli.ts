#!/usr/bin/env node
/**
 * motility-sil-figures --spec plot.json
 * motility-sil-figures --figure hysteresis-sil --input runs/h/hysteresis.csv \
 *                      --output hyst.svg [--c0 0.11785 --beta 150]
 */

import { readFileSync } from "node:fs";
import { PlotSpecSchema, render, type PlotSpec } from "./plotspec.js";

function parseArgs(argv: string[]): PlotSpec {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`expected --flag value pairs, got '${key}'`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  if (flags.has("spec")) {
    const raw = JSON.parse(readFileSync(flags.get("spec")!, "utf8"));
    return PlotSpecSchema.parse(raw);
  }
  const options: Record<string, number> = {};
  if (flags.has("c0")) options.c0 = Number(flags.get("c0"));
  if (flags.has("beta")) options.beta = Number(flags.get("beta"));
  return PlotSpecSchema.parse({
    figure: flags.get("figure"),
    input_csvs: [flags.get("input")],
    output: flags.get("output"),
    options,
  });
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const written = render(spec);
    for (const path of written) console.log(path);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const isDirect = process.argv[1] &&
  import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
