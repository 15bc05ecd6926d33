import * as fs from "node:fs";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { EmptyMaskError } from "../src/errors.js";
import { boxesFromGt, parseMaskFile, serializeMaskFile } from "../src/maskfile.js";
import { decodeRle } from "../src/rle.js";

const FIXTURES = path.join(__dirname, "..", "fixtures");

describe("mask files and ground-truth boxes", () => {
  it("matches the core bbox on 100 generated masks", () => {
    const cases = JSON.parse(fs.readFileSync(path.join(FIXTURES, "bbox_cases.json"), "utf8"));
    expect(cases).toHaveLength(100);
    for (const c of cases) {
      const doc = {
        object_id: "o",
        width: c.width,
        height: c.height,
        fps: 30,
        frames: [c.runs],
      };
      const [prompt] = boxesFromGt([doc]);
      expect([prompt.box!.uMin, prompt.box!.vMin, prompt.box!.uMax, prompt.box!.vMax]).toEqual(
        c.bbox,
      );
    }
  });

  it("preserves object ids and order", () => {
    const mk = (id: string) => ({
      object_id: id,
      width: 4,
      height: 4,
      fps: 24,
      frames: [[2, 2, 2, 2, 8]],
    });
    const prompts = boxesFromGt([mk("zebra"), mk("aardvark")]);
    expect(prompts.map((p) => p.objectId)).toEqual(["zebra", "aardvark"]);
  });

  it("rejects an empty first frame", () => {
    const doc = { object_id: "o", width: 4, height: 4, fps: 24, frames: [[16]] };
    expect(() => boxesFromGt([doc])).toThrow(EmptyMaskError);
  });

  it("serialization parses back and stays canonical", () => {
    const doc = {
      object_id: "ball",
      width: 4,
      height: 4,
      fps: 240,
      frames: [[16], [2, 2, 2, 2, 8]],
    };
    const text = serializeMaskFile(doc);
    expect(text.endsWith("\n")).toBe(true);
    const back = parseMaskFile(text);
    expect(back).toEqual(doc);
    expect(serializeMaskFile(back)).toBe(text);
    // keys are emitted in sorted order
    expect(text.indexOf('"fps"')).toBeLessThan(text.indexOf('"frames"'));
    expect(text.indexOf('"frames"')).toBeLessThan(text.indexOf('"height"'));
    // frames decode against the declared dimensions
    for (const runs of back.frames) {
      expect(decodeRle(runs, back.width, back.height)).toHaveLength(16);
    }
  });
});
