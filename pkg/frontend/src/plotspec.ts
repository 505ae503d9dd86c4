/**
 * Plot specifications: which figure, from which CSVs, to which output file.
 * Rendering never touches the inputs (verified by checksum in the tests).
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { z } from "zod";
import {
  renderContourFrames,
  renderHysteresisPde,
  renderHysteresisSil,
  renderPhiCurve,
  renderStabilityMap,
} from "./figures.js";

export const PlotSpecSchema = z.object({
  figure: z.enum([
    "phi-curve",
    "hysteresis-sil",
    "hysteresis-pde",
    "stability-map",
    "contour-anim-frames",
  ]),
  input_csvs: z.array(z.string()).min(1),
  output: z.string(),
  options: z
    .object({
      c0: z.number().positive().optional(),
      beta: z.number().nonnegative().optional(),
    })
    .default({}),
});

export type PlotSpec = z.infer<typeof PlotSpecSchema>;

/** Render a spec; returns the list of files written. */
export function render(spec: PlotSpec): string[] {
  const input = spec.input_csvs[0];
  mkdirSync(dirname(spec.output) || ".", { recursive: true });
  switch (spec.figure) {
    case "hysteresis-sil": {
      writeFileSync(spec.output, renderHysteresisSil(input));
      return [spec.output];
    }
    case "hysteresis-pde": {
      writeFileSync(spec.output, renderHysteresisPde(input));
      return [spec.output];
    }
    case "phi-curve": {
      const { c0, beta } = spec.options;
      if (c0 === undefined || beta === undefined) {
        throw new Error("phi-curve needs options.c0 and options.beta");
      }
      writeFileSync(spec.output, renderPhiCurve(input, c0, beta));
      return [spec.output];
    }
    case "stability-map": {
      writeFileSync(spec.output, renderStabilityMap(input));
      return [spec.output];
    }
    case "contour-anim-frames": {
      const frames = renderContourFrames(input);
      const written: string[] = [];
      frames.forEach(([, svg], i) => {
        const path = spec.output.replace(/\.svg$/i, "") +
          `_${String(i).padStart(4, "0")}.svg`;
        writeFileSync(path, svg);
        written.push(path);
      });
      return written;
    }
  }
}
