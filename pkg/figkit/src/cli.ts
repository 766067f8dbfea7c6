/** figkit render --spec spec.yaml --out dir/ */

import { mkdirSync, writeFileSync } from "node:fs";
import { resolve } from "node:path";

import { readCsv, readDetectorImage, readPotentialTable, sha256 } from "./blocks.js";
import {
  angularCuts, detectorMap, dressedFigure, momentumCuts, timeSeries,
} from "./figures.js";
import { FigureSpec, loadSpec } from "./spec.js";

export function renderFigure(spec: FigureSpec): string {
  const digests = spec.inputs.map((i) => sha256(i.path));
  switch (spec.kind) {
    case "momentum_cuts": {
      const series = spec.inputs.map((i) => ({ label: i.label,
                                               table: readCsv(i.path) }));
      return momentumCuts(series, spec.overlays, digests, spec.title, spec.axes);
    }
    case "angular_cuts": {
      const series = spec.inputs.map((i) => ({ label: i.label,
                                               table: readCsv(i.path) }));
      return angularCuts(series, spec.overlays, digests, spec.title);
    }
    case "detector_map":
      return detectorMap(readDetectorImage(spec.inputs[0].path), digests,
                         spec.title);
    case "time_series": {
      const series = spec.inputs.map((i) => ({ label: i.label,
                                               table: readCsv(i.path) }));
      return timeSeries(series, spec.series ?? "internal_norm", digests,
                        spec.title);
    }
    case "dressed_curves": {
      if (!spec.intensity_w_cm2) {
        throw new Error(`figure '${spec.name}': dressed_curves needs intensity_w_cm2`);
      }
      const tab = readPotentialTable(spec.inputs[0].path);
      return dressedFigure(tab, spec.intensity_w_cm2, spec.wavelength_nm ?? 785,
                           spec.overlays, digests, spec.title,
                           spec.r_range ?? [1.0, 12.0]);
    }
  }
}

export function main(argv: string[]): number {
  const args = argv.slice(2);
  if (args[0] !== "render") {
    process.stderr.write("usage: figkit render --spec spec.yaml --out dir/\n");
    return 2;
  }
  let specPath = "";
  let outDir = "";
  for (let i = 1; i < args.length; i++) {
    if (args[i] === "--spec") specPath = args[++i];
    else if (args[i] === "--out") outDir = args[++i];
    else {
      process.stderr.write(`unknown argument: ${args[i]}\n`);
      return 2;
    }
  }
  if (!specPath || !outDir) {
    process.stderr.write("usage: figkit render --spec spec.yaml --out dir/\n");
    return 2;
  }
  try {
    const figures = loadSpec(specPath);
    mkdirSync(outDir, { recursive: true });
    for (const fig of figures) {
      const svg = renderFigure(fig);
      const target = resolve(outDir, `${fig.name}.svg`);
      writeFileSync(target, svg);
      process.stdout.write(`wrote ${target}\n`);
    }
    return 0;
  } catch (err) {
    process.stderr.write(`figkit: ${(err as Error).message}\n`);
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv));
}
