/**
 * Figure specification file: YAML with a `figures:` list.  Each entry names a
 * kind, its input files (relative to the spec file), optional axis ranges and
 * overlay lines, and the output file name.
 */

import { existsSync, readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { load as yamlLoad } from "js-yaml";

import { Overlay } from "./figures.js";

export type FigureKind =
  | "momentum_cuts" | "angular_cuts" | "detector_map"
  | "time_series" | "dressed_curves";

export interface InputRef {
  path: string;
  label: string;
}

export interface FigureSpec {
  name: string;
  kind: FigureKind;
  inputs: InputRef[];
  overlays: Overlay[];
  title: string;
  axes?: { x?: [number, number]; y?: [number, number] };
  series?: "internal_norm" | "cos2_expect";
  intensity_w_cm2?: number;
  wavelength_nm?: number;
  r_range?: [number, number];
}

const KINDS: FigureKind[] = ["momentum_cuts", "angular_cuts", "detector_map",
                             "time_series", "dressed_curves"];

export function loadSpec(path: string): FigureSpec[] {
  const raw = yamlLoad(readFileSync(path, "utf8")) as Record<string, unknown>;
  if (!raw || typeof raw !== "object" || !Array.isArray(raw.figures)) {
    throw new Error(`${path}: expected a top-level 'figures:' list`);
  }
  const base = dirname(resolve(path));
  return (raw.figures as Record<string, unknown>[]).map((f, i) => {
    const kind = f.kind as FigureKind;
    if (!KINDS.includes(kind)) {
      throw new Error(`${path}: figure ${i}: unknown kind '${f.kind}'`);
    }
    const name = (f.name as string) ?? `figure_${i}`;
    const inputsRaw = (f.inputs ?? []) as (string | Record<string, string>)[];
    const inputs: InputRef[] = inputsRaw.map((inp) => {
      const rec = typeof inp === "string" ? { path: inp } : inp;
      const full = resolve(base, rec.path);
      if (!existsSync(full)) {
        throw new Error(`${path}: figure '${name}': input not found: ${full}`);
      }
      return { path: full, label: rec.label ?? rec.path };
    });
    if (inputs.length === 0) {
      throw new Error(`${path}: figure '${name}': at least one input required`);
    }
    const overlays = ((f.overlays ?? []) as Record<string, unknown>[]).map((o) => {
      if (o.type !== "vline" && o.type !== "hline") {
        throw new Error(`${path}: figure '${name}': overlay type must be vline|hline`);
      }
      return { type: o.type, value: Number(o.value),
               label: o.label as string | undefined } as Overlay;
    });
    return {
      name, kind, inputs, overlays,
      title: (f.title as string) ?? name,
      axes: f.axes as FigureSpec["axes"],
      series: (f.series as FigureSpec["series"]) ?? "internal_norm",
      intensity_w_cm2: f.intensity_w_cm2 as number | undefined,
      wavelength_nm: (f.wavelength_nm as number | undefined) ?? 785,
      r_range: f.r_range as [number, number] | undefined,
    };
  });
}
