/**
 * Dressed adiabatic curves at theta = 0: eigenvalues of the one-photon 2x2
 * matrix [[V1 + omega, W], [W, V2]] with W(R) = mu(R) * E, the half-amplitude
 * coupling E = eps0 / 2 of a field with the given peak intensity.  The
 * avoided-crossing gap at the resonance radius (V1 + omega = V2) is exactly
 * 2 |mu E|.
 */

import { PotentialTable } from "./blocks.js";

export const AU_INTENSITY_W_CM2 = 3.50944758e16;
export const AU_LENGTH_NM = 0.0529177210903;
export const SPEED_OF_LIGHT_AU = 137.035999084;

export function omegaFromWavelength(lambdaNm: number): number {
  return (2 * Math.PI * SPEED_OF_LIGHT_AU * AU_LENGTH_NM) / lambdaNm;
}

export function couplingAmplitude(intensityWcm2: number): number {
  return Math.sqrt(intensityWcm2 / AU_INTENSITY_W_CM2) / 2;
}

export interface DressedCurves {
  r: number[];
  lower: number[];
  upper: number[];
  diabatic1: number[];   // V1 + omega
  diabatic2: number[];   // V2
  gap: number[];
}

export function dressedCurves(tab: PotentialTable, intensityWcm2: number,
                              lambdaNm: number): DressedCurves {
  const omega = omegaFromWavelength(lambdaNm);
  const eField = couplingAmplitude(intensityWcm2);
  const out: DressedCurves = { r: [], lower: [], upper: [], diabatic1: [],
                               diabatic2: [], gap: [] };
  for (let i = 0; i < tab.r.length; i++) {
    const a = tab.v1[i] + omega;
    const c = tab.v2[i];
    const w = tab.mu[i] * eField;
    const mean = (a + c) / 2;
    const half = Math.sqrt(((a - c) / 2) ** 2 + w * w);
    out.r.push(tab.r[i]);
    out.lower.push(mean - half);
    out.upper.push(mean + half);
    out.diabatic1.push(a);
    out.diabatic2.push(c);
    out.gap.push(2 * half);
  }
  return out;
}

/**
 * Crossing radius (root of V1 + omega - V2 by linear interpolation between
 * table rows) and the gap there, which equals 2 |mu E| exactly.
 */
export function crossing(tab: PotentialTable, intensityWcm2: number,
                         lambdaNm: number): { r: number; gap: number; mu: number } {
  const omega = omegaFromWavelength(lambdaNm);
  const eField = couplingAmplitude(intensityWcm2);
  const d = tab.r.map((_, i) => tab.v1[i] + omega - tab.v2[i]);
  for (let i = 1; i < d.length; i++) {
    if (d[i - 1] === 0 || d[i - 1] * d[i] < 0) {
      const f = d[i - 1] / (d[i - 1] - d[i]);
      const rc = tab.r[i - 1] + f * (tab.r[i] - tab.r[i - 1]);
      const muc = tab.mu[i - 1] + f * (tab.mu[i] - tab.mu[i - 1]);
      return { r: rc, gap: 2 * Math.abs(muc * eField), mu: muc };
    }
  }
  throw new Error("no one-photon crossing found in the table range");
}
