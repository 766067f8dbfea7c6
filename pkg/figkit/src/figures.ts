/**
 * The five figure kinds, each a pure function from parsed inputs to an SVG
 * string.  Figures never recompute physics: they plot the pipeline's
 * serialized outputs as-is (the dressed-curve sketch diagonalizes the 2x2
 * matrix from the potential table, which is presentation, not simulation).
 * Every figure carries a caption line with the SHA-256 digests of its inputs.
 */

import { DetectorImage, PotentialTable, Table, column } from "./blocks.js";
import { crossing, dressedCurves } from "./dressed.js";
import {
  PALETTE, Scale, colormap, document as svgDoc, linearScale, polyline, r,
  xAxis, yAxis,
} from "./svg.js";

export interface Overlay {
  type: "vline" | "hline";
  value: number;
  label?: string;
}

export interface SeriesInput {
  label: string;
  table: Table;
}

const W = 640;
const H = 420;
const MARGIN = { top: 28, right: 20, bottom: 52, left: 74 };

function frame(xlab: string, ylab: string, x0: number, x1: number,
               y0: number, y1: number): { sx: Scale; sy: Scale; axes: string } {
  const sx = linearScale(x0, x1, MARGIN.left, W - MARGIN.right);
  const sy = linearScale(y0, y1, H - MARGIN.bottom, MARGIN.top);
  const axes = [xAxis(sx, H - MARGIN.bottom, xlab), yAxis(sy, MARGIN.left, ylab)]
    .join("\n");
  return { sx, sy, axes };
}

function caption(title: string, digests: string[]): string {
  const text = digests.map((d) => d.slice(0, 12)).join(" ");
  return [
    `<text x="${MARGIN.left}" y="16" font-size="12" font-weight="bold">${title}</text>`,
    `<text x="${MARGIN.left}" y="${H - 6}" font-size="8" fill="#555">data digest: ${text}</text>`,
  ].join("\n");
}

function overlaysSvg(overlays: Overlay[], sx: Scale, sy: Scale): string {
  const parts: string[] = [];
  for (const ov of overlays) {
    if (ov.type === "vline") {
      const x = r(sx(ov.value));
      parts.push(`<line x1="${x}" y1="${r(sy.range[1])}" x2="${x}" y2="${r(sy.range[0])}" stroke="#999" stroke-width="0.8" stroke-dasharray="3,3"/>`);
      if (ov.label) parts.push(`<text x="${x}" y="${r(sy.range[1] + 10)}" font-size="9" text-anchor="middle" fill="#555">${ov.label}</text>`);
    } else {
      const y = r(sy(ov.value));
      parts.push(`<line x1="${r(sx.range[0])}" y1="${y}" x2="${r(sx.range[1])}" y2="${y}" stroke="#999" stroke-width="0.8" stroke-dasharray="3,3"/>`);
      if (ov.label) parts.push(`<text x="${r(sx.range[1] - 4)}" y="${r(sy(ov.value) - 3)}" font-size="9" text-anchor="end" fill="#555">${ov.label}</text>`);
    }
  }
  return parts.join("\n");
}

function legend(labels: string[]): string {
  return labels.map((lab, i) =>
    `<g><line x1="${W - MARGIN.right - 150}" y1="${MARGIN.top + 14 * i + 6}" x2="${W - MARGIN.right - 128}" y2="${MARGIN.top + 14 * i + 6}" stroke="${PALETTE[i % PALETTE.length]}" stroke-width="1.5"/>` +
    `<text x="${W - MARGIN.right - 122}" y="${MARGIN.top + 14 * i + 9}" font-size="10">${lab}</text></g>`,
  ).join("\n");
}

function extent(vals: number[], pad = 0.05): [number, number] {
  let lo = Infinity, hi = -Infinity;
  for (const v of vals) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi - lo || 1;
  return [lo - pad * span, hi + pad * span];
}

/** Fig. 10 style: P(k_rho, alpha=0) curves vs kinetic momentum. */
export function momentumCuts(inputs: SeriesInput[], overlays: Overlay[],
                             digests: string[], title: string,
                             axes?: { x?: [number, number]; y?: [number, number] }): string {
  const xs = inputs.map((s) => column(s.table, "krho"));
  const ys = inputs.map((s) => column(s.table, "P"));
  const [x0, x1] = axes?.x ?? extent(xs.flat(), 0);
  const [, y1] = axes?.y ?? extent(ys.flat());
  const { sx, sy, axes: ax } = frame("k_rho (a.u.)", "P(k_rho, alpha=0)", x0, x1, 0, y1);
  const body = [
    ax, overlaysSvg(overlays, sx, sy),
    ...inputs.map((s, i) => polyline(xs[i], ys[i], sx, sy, PALETTE[i % PALETTE.length])),
    legend(inputs.map((s) => s.label)),
    caption(title, digests),
  ].join("\n");
  return svgDoc(W, H, body);
}

/** Fig. 11 style: angular distributions at fixed k_rho. */
export function angularCuts(inputs: SeriesInput[], overlays: Overlay[],
                            digests: string[], title: string): string {
  const xs = inputs.map((s) => column(s.table, "alpha"));
  const ys = inputs.map((s) => {
    const y = column(s.table, "P");
    const m = Math.max(...y) || 1;
    return y.map((v) => v / m);
  });
  const { sx, sy, axes: ax } = frame("alpha (rad)", "P / P(max)",
                                     0, Math.PI / 2, 0, 1.08);
  const body = [
    ax, overlaysSvg(overlays, sx, sy),
    ...inputs.map((s, i) => polyline(xs[i], ys[i], sx, sy, PALETTE[i % PALETTE.length])),
    legend(inputs.map((s) => s.label)),
    caption(title, digests),
  ].join("\n");
  return svgDoc(W, H, body);
}

/** Fig. 3 style: polar detector map, k_rho as the radial axis. */
export function detectorMap(img: DetectorImage, digests: string[],
                            title: string): string {
  const cx = MARGIN.left + 10;
  const cy = H - MARGIN.bottom;
  const radius = Math.min(W - MARGIN.right - cx, cy - MARGIN.top);
  const kMax = img.krho[img.krho.length - 1];
  let peak = 0;
  for (const row of img.p) for (const v of row) peak = Math.max(peak, v);
  peak = peak || 1;
  const cells: string[] = [];
  for (let i = 0; i < img.krho.length - 1; i++) {
    const r0 = (img.krho[i] / kMax) * radius;
    const r1 = (img.krho[i + 1] / kMax) * radius;
    for (let j = 0; j < img.alpha.length - 1; j++) {
      const v = img.p[i][j] / peak;
      if (v <= 0) continue;
      const a0 = img.alpha[j];
      const a1 = img.alpha[j + 1];
      const p = (rr: number, aa: number) =>
        `${r(cx + rr * Math.cos(aa))},${r(cy - rr * Math.sin(aa))}`;
      cells.push(
        `<path d="M${p(r0, a0)} L${p(r1, a0)} A${r(r1)} ${r(r1)} 0 0 0 ${p(r1, a1)} ` +
        `L${p(r0, a1)} A${r(r0)} ${r(r0)} 0 0 1 ${p(r0, a0)} Z" ` +
        `fill="${colormap(Math.sqrt(v))}" stroke="none"/>`,
      );
    }
  }
  const ticksSvg: string[] = [];
  for (const frac of [0.25, 0.5, 0.75, 1.0]) {
    const rr = frac * radius;
    ticksSvg.push(`<path d="M${r(cx + rr)},${r(cy)} A${r(rr)} ${r(rr)} 0 0 0 ${r(cx)},${r(cy - rr)}" fill="none" stroke="#ccc" stroke-width="0.6"/>`);
    ticksSvg.push(`<text x="${r(cx + rr)}" y="${r(cy + 14)}" font-size="10" text-anchor="middle">${r(frac * kMax, 1)}</text>`);
  }
  const body = [
    cells.join("\n"), ticksSvg.join("\n"),
    `<text x="${r(cx + radius / 2)}" y="${r(cy + 34)}" font-size="11" text-anchor="middle">k_rho (a.u.)</text>`,
    `<text x="${r(cx - 10)}" y="${r(cy - radius / 2)}" font-size="11" text-anchor="middle" transform="rotate(-90 ${r(cx - 10)} ${r(cy - radius / 2)})">alpha</text>`,
    caption(title, digests),
  ].join("\n");
  return svgDoc(W, H, body);
}

/** Figs. 12-13 style: diagnostics time series over the pulse envelope. */
export function timeSeries(inputs: SeriesInput[], series: string,
                           digests: string[], title: string): string {
  const panelH = (H - MARGIN.top - MARGIN.bottom - 24) / 2;
  const tAll = inputs.map((s) => column(s.table, "t"));
  const ys = inputs.map((s) => column(s.table, series));
  const env = column(inputs[0].table, "envelope");
  const [t0, t1] = extent(tAll.flat(), 0);
  const [y0, y1] = series === "internal_norm" ? [0, 1.05] : extent(ys.flat());
  const sx = linearScale(t0, t1, MARGIN.left, W - MARGIN.right);
  const syTop = linearScale(y0, y1, MARGIN.top + panelH, MARGIN.top);
  const syBot = linearScale(0, 1.05, H - MARGIN.bottom, MARGIN.top + panelH + 24);
  const label = series === "internal_norm" ? "||Phi_I||^2" : "<cos^2 theta>";
  const body = [
    yAxis(syTop, MARGIN.left, label),
    ...inputs.map((s, i) => polyline(tAll[i], ys[i], sx, syTop,
                                     PALETTE[i % PALETTE.length])),
    legend(inputs.map((s) => s.label)),
    yAxis(syBot, MARGIN.left, "I(t)/I0"),
    xAxis(sx, H - MARGIN.bottom, "t (a.u.)"),
    polyline(tAll[0], env, sx, syBot, "#444"),
    caption(title, digests),
  ].join("\n");
  return svgDoc(W, H, body);
}

/** Fig. 4 style: dressed adiabatic curves with the diabatic pair dashed. */
export function dressedFigure(tab: PotentialTable, intensityWcm2: number,
                              lambdaNm: number, overlays: Overlay[],
                              digests: string[], title: string,
                              rRange: [number, number] = [1.0, 12.0]): string {
  const dc = dressedCurves(tab, intensityWcm2, lambdaNm);
  const sel = dc.r.map((_, i) => i).filter(
    (i) => dc.r[i] >= rRange[0] && dc.r[i] <= rRange[1]);
  const pick = (a: number[]) => sel.map((i) => a[i]);
  const rs = pick(dc.r);
  const all = [...pick(dc.lower), ...pick(dc.upper)];
  const [y0, y1] = extent(all);
  const { sx, sy, axes: ax } = frame("R (bohr)", "energy (hartree)",
                                     rRange[0], rRange[1], y0, y1);
  const cross = crossing(tab, intensityWcm2, lambdaNm);
  const body = [
    ax, overlaysSvg(overlays, sx, sy),
    polyline(rs, pick(dc.diabatic1), sx, sy, "#888", "4,3"),
    polyline(rs, pick(dc.diabatic2), sx, sy, "#888", "4,3"),
    polyline(rs, pick(dc.lower), sx, sy, PALETTE[0]),
    polyline(rs, pick(dc.upper), sx, sy, PALETTE[1]),
    `<text x="${r(sx(cross.r))}" y="${r(sy(dc.upper[sel[0]]) - 8)}" font-size="9" fill="#555">gap ${cross.gap.toExponential(3)} at R=${r(cross.r)}</text>`,
    legend(["lower dressed", "upper dressed"]),
    caption(title, digests),
  ].join("\n");
  return svgDoc(W, H, body);
}
