/**
 * Run-length codec over the row-major binary raster, matching the core
 * mask format: runs alternate background/foreground starting with
 * background, so a leading 0 marks a mask whose first pixel is set.
 * The encoder always emits the canonical form (no interior zero runs).
 */

import { LengthMismatchError } from "./errors.js";

export interface BBox {
  uMin: number;
  vMin: number;
  uMax: number;
  vMax: number;
}

export function encodeRle(mask: Uint8Array): number[] {
  if (mask.length === 0) return [];
  const runs: number[] = [];
  if (mask[0] !== 0) runs.push(0);
  let current = mask[0] !== 0 ? 1 : 0;
  let length = 0;
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] !== 0 ? 1 : 0;
    if (v === current) {
      length++;
    } else {
      runs.push(length);
      current = v;
      length = 1;
    }
  }
  runs.push(length);
  return runs;
}

export function decodeRle(runs: number[], width: number, height: number): Uint8Array {
  let total = 0;
  for (const r of runs) {
    if (r < 0 || !Number.isInteger(r)) {
      throw new LengthMismatchError(`invalid run length ${r}`);
    }
    total += r;
  }
  if (total !== width * height) {
    throw new LengthMismatchError(`runs sum to ${total}, expected ${width * height}`);
  }
  const out = new Uint8Array(width * height);
  let pos = 0;
  for (let i = 0; i < runs.length; i++) {
    const value = i % 2;
    if (value === 1) out.fill(1, pos, pos + runs[i]);
    pos += runs[i];
  }
  return out;
}

export function maskPixelCount(runs: number[]): number {
  let count = 0;
  for (let i = 1; i < runs.length; i += 2) count += runs[i];
  return count;
}

/** Tight box over set pixels of a flat raster, or null when empty. */
export function bboxFromFlat(mask: Uint8Array, width: number): BBox | null {
  let uMin = Infinity;
  let vMin = Infinity;
  let uMax = -Infinity;
  let vMax = -Infinity;
  for (let i = 0; i < mask.length; i++) {
    if (mask[i] === 0) continue;
    const u = i % width;
    const v = Math.floor(i / width);
    if (u < uMin) uMin = u;
    if (u > uMax) uMax = u;
    if (v < vMin) vMin = v;
    if (v > vMax) vMax = v;
  }
  if (uMin === Infinity) return null;
  return { uMin, vMin, uMax, vMax };
}

export function centroidFromFlat(mask: Uint8Array, width: number): { u: number; v: number } | null {
  let n = 0;
  let su = 0;
  let sv = 0;
  for (let i = 0; i < mask.length; i++) {
    if (mask[i] === 0) continue;
    n++;
    su += i % width;
    sv += Math.floor(i / width);
  }
  if (n === 0) return null;
  return { u: su / n, v: sv / n };
}
