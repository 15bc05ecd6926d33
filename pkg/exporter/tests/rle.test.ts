import * as fs from "node:fs";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { LengthMismatchError } from "../src/errors.js";
import { bboxFromFlat, decodeRle, encodeRle, maskPixelCount } from "../src/rle.js";

const FIXTURES = path.join(__dirname, "..", "fixtures");

describe("run-length codec", () => {
  it("decodes the 4x4 reference runs", () => {
    const mask = decodeRle([2, 2, 2, 2, 8], 4, 4);
    const expected = new Uint8Array(16);
    expected[2] = expected[3] = expected[6] = expected[7] = 1;
    expect(mask).toEqual(expected);
  });

  it("all-background and all-foreground forms", () => {
    expect(decodeRle([16], 4, 4).every((v) => v === 0)).toBe(true);
    expect(encodeRle(new Uint8Array(16).fill(1))).toEqual([0, 16]);
  });

  it("rejects length mismatch", () => {
    expect(() => decodeRle([15], 4, 4)).toThrow(LengthMismatchError);
    expect(() => decodeRle([17, -1], 4, 4)).toThrow(LengthMismatchError);
  });

  it("roundtrips randomly generated masks", () => {
    let state = 12345;
    const rand = () => {
      state = (state * 1103515245 + 12345) & 0x7fffffff;
      return state / 0x7fffffff;
    };
    for (let trial = 0; trial < 200; trial++) {
      const w = 1 + Math.floor(rand() * 14);
      const h = 1 + Math.floor(rand() * 14);
      const density = rand();
      const mask = new Uint8Array(w * h);
      for (let i = 0; i < mask.length; i++) mask[i] = rand() < density ? 1 : 0;
      const runs = encodeRle(mask);
      expect(decodeRle(runs, w, h)).toEqual(mask);
      expect(encodeRle(decodeRle(runs, w, h))).toEqual(runs);
    }
  });

  it("matches the core encoder on generated vectors", () => {
    const vectors = JSON.parse(
      fs.readFileSync(path.join(FIXTURES, "rle_vectors.json"), "utf8"),
    );
    for (const v of vectors) {
      const mask = Uint8Array.from(v.pixels as number[]);
      expect(encodeRle(mask)).toEqual(v.runs);
      expect(Array.from(decodeRle(v.runs, v.width, v.height))).toEqual(v.pixels);
      expect(maskPixelCount(v.runs)).toBe(
        (v.pixels as number[]).reduce((a, b) => a + b, 0),
      );
    }
  });

  it("computes tight boxes", () => {
    const mask = decodeRle([2, 2, 2, 2, 8], 4, 4);
    expect(bboxFromFlat(mask, 4)).toEqual({ uMin: 2, vMin: 0, uMax: 3, vMax: 1 });
    expect(bboxFromFlat(new Uint8Array(16), 4)).toBeNull();
  });
});
