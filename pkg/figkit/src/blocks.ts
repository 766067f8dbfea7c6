/**
 * Readers for the simulation pipeline's on-disk formats.
 *
 * Binary block: 16-byte header ("FRAGSPEC" + u16 version + u16 kind + u32
 * reserved), little-endian u64 dims, payload, then the axis vectors as f64.
 * Kind 1 = momentum amplitude (two channels of interleaved re/im pairs),
 * kind 2 = detector image (one real f64 block, axes k_rho and alpha).
 * CSV files carry a single header line.
 */

import { readFileSync } from "node:fs";
import { createHash } from "node:crypto";

export interface DetectorImage {
  p: Float64Array[];      // [n_krho][n_alpha]
  krho: Float64Array;
  alpha: Float64Array;
  beamVelocity: number;
  driftLength: number;
}

export interface Table {
  columns: string[];
  rows: number[][];
}

const MAGIC = "FRAGSPEC";

export function sha256(path: string): string {
  return createHash("sha256").update(readFileSync(path)).digest("hex");
}

export function readDetectorImage(path: string): DetectorImage {
  const buf = readFileSync(path);
  if (buf.toString("latin1", 0, 8) !== MAGIC) {
    throw new Error(`${path}: bad magic, not a fragspec block`);
  }
  const version = buf.readUInt16LE(8);
  const kind = buf.readUInt16LE(10);
  if (version !== 1) throw new Error(`${path}: unsupported block version ${version}`);
  if (kind !== 2) throw new Error(`${path}: block kind ${kind} is not a detector image`);
  const nK = Number(buf.readBigUInt64LE(16));
  const nA = Number(buf.readBigUInt64LE(24));
  let off = 32;
  const p: Float64Array[] = [];
  for (let i = 0; i < nK; i++) {
    const row = new Float64Array(nA);
    for (let j = 0; j < nA; j++, off += 8) row[j] = buf.readDoubleLE(off);
    p.push(row);
  }
  const krho = new Float64Array(nK);
  for (let i = 0; i < nK; i++, off += 8) krho[i] = buf.readDoubleLE(off);
  const alpha = new Float64Array(nA);
  for (let j = 0; j < nA; j++, off += 8) alpha[j] = buf.readDoubleLE(off);
  const beamVelocity = buf.readDoubleLE(off);
  const driftLength = buf.readDoubleLE(off + 8);
  return { p, krho, alpha, beamVelocity, driftLength };
}

/** Comma-separated values with one header row; '#' lines are skipped. */
export function readCsv(path: string): Table {
  const lines = readFileSync(path, "utf8").split(/\r?\n/).filter(
    (l) => l.trim().length > 0 && !l.startsWith("#"),
  );
  if (lines.length < 2) throw new Error(`${path}: empty CSV`);
  const columns = lines[0].split(",").map((s) => s.trim());
  const rows = lines.slice(1).map((l) => l.split(",").map(Number));
  for (const r of rows) {
    if (r.length !== columns.length || r.some((x) => Number.isNaN(x))) {
      throw new Error(`${path}: malformed CSV row`);
    }
  }
  return { columns, rows };
}

export function column(t: Table, name: string): number[] {
  const i = t.columns.indexOf(name);
  if (i < 0) throw new Error(`CSV column '${name}' not found (have ${t.columns})`);
  return t.rows.map((r) => r[i]);
}

export interface PotentialTable {
  r: number[];
  v1: number[];
  v2: number[];
  mu: number[];
}

/** Whitespace-separated R V1 V2 MU table, '#' comments. */
export function readPotentialTable(path: string): PotentialTable {
  const out: PotentialTable = { r: [], v1: [], v2: [], mu: [] };
  for (const line of readFileSync(path, "utf8").split(/\r?\n/)) {
    const body = line.split("#")[0].trim();
    if (!body) continue;
    const parts = body.split(/\s+/).map(Number);
    if (parts.length !== 4 || parts.some((x) => Number.isNaN(x))) {
      throw new Error(`${path}: malformed table row '${body}'`);
    }
    out.r.push(parts[0]);
    out.v1.push(parts[1]);
    out.v2.push(parts[2]);
    out.mu.push(parts[3]);
  }
  if (out.r.length < 4) throw new Error(`${path}: too few rows`);
  return out;
}
