/**
 * Minimal deterministic SVG construction: fixed fonts and sizes, no
 * timestamps, no ids beyond content-derived ones, numbers printed with a
 * fixed precision so repeated renders are byte-identical.
 */

export const FONT = "11px sans-serif";

export function r(x: number, digits = 2): string {
  const s = x.toFixed(digits);
  return s === "-0.00" ? "0.00" : s;
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const f = ((v: number) =>
    r0 + ((v - d0) / (d1 - d0 || 1)) * (r1 - r0)) as Scale;
  f.domain = [d0, d1];
  f.range = [r0, r1];
  return f;
}

export function ticks(lo: number, hi: number, n = 6): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step0 = span / n;
  const mag = 10 ** Math.floor(Math.log10(step0));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? mag * 10;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) out.push(v);
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1e6) / 1e6);
}

export function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale,
                         stroke: string, dash = ""): string {
  const pts = xs.map((x, i) => `${r(sx(x))},${r(sy(ys[i]))}`).join(" ");
  const d = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline fill="none" stroke="${stroke}" stroke-width="1.3"${d} points="${pts}"/>`;
}

export function xAxis(sx: Scale, y: number, label: string): string {
  const [lo, hi] = sx.domain;
  const parts = [`<line x1="${r(sx.range[0])}" y1="${r(y)}" x2="${r(sx.range[1])}" y2="${r(y)}" stroke="black" stroke-width="1"/>`];
  for (const t of ticks(lo, hi)) {
    const x = r(sx(t));
    parts.push(`<line x1="${x}" y1="${r(y)}" x2="${x}" y2="${r(y + 4)}" stroke="black" stroke-width="1"/>`);
    parts.push(`<text x="${x}" y="${r(y + 16)}" font="${FONT}" font-size="11" text-anchor="middle">${fmtTick(t)}</text>`);
  }
  const xm = r((sx.range[0] + sx.range[1]) / 2);
  parts.push(`<text x="${xm}" y="${r(y + 32)}" font-size="11" text-anchor="middle">${label}</text>`);
  return parts.join("\n");
}

export function yAxis(sy: Scale, x: number, label: string): string {
  const [lo, hi] = sy.domain;
  const parts = [`<line x1="${r(x)}" y1="${r(sy.range[0])}" x2="${r(x)}" y2="${r(sy.range[1])}" stroke="black" stroke-width="1"/>`];
  for (const t of ticks(lo, hi, 5)) {
    const y = r(sy(t));
    parts.push(`<line x1="${r(x - 4)}" y1="${y}" x2="${r(x)}" y2="${y}" stroke="black" stroke-width="1"/>`);
    parts.push(`<text x="${r(x - 6)}" y="${r(sy(t) + 3.5)}" font-size="11" text-anchor="end">${fmtTick(t)}</text>`);
  }
  const ym = (sy.range[0] + sy.range[1]) / 2;
  parts.push(`<text x="${r(x - 42)}" y="${r(ym)}" font-size="11" text-anchor="middle" transform="rotate(-90 ${r(x - 42)} ${r(ym)})">${label}</text>`);
  return parts.join("\n");
}

// compact viridis-like lookup (16 anchors, linear interpolation)
const CMAP: [number, number, number][] = [
  [68, 1, 84], [71, 17, 100], [72, 31, 112], [71, 45, 123],
  [66, 59, 130], [60, 73, 135], [54, 86, 138], [48, 98, 139],
  [42, 111, 142], [37, 123, 142], [32, 135, 141], [29, 147, 139],
  [32, 159, 134], [46, 171, 124], [72, 182, 110], [253, 231, 37],
];

export function colormap(v: number): string {
  const t = Math.min(Math.max(v, 0), 1) * (CMAP.length - 1);
  const i = Math.min(Math.floor(t), CMAP.length - 2);
  const f = t - i;
  const c = CMAP[i].map((a, j) => Math.round(a + f * (CMAP[i + 1][j] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export function document(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                        "#ff7f0e", "#8c564b", "#17becf"];
