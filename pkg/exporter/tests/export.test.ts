import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { PromptOutOfBoundsError } from "../src/errors.js";
import { runExport } from "../src/export.js";
import { parseMaskFile, serializeMaskFile } from "../src/maskfile.js";
import { centroidFromFlat, decodeRle, encodeRle, maskPixelCount } from "../src/rle.js";
import { ColorStubSegmenter } from "../src/segmenter.js";

const FIXTURES = path.join(__dirname, "..", "fixtures");
const SCENE = path.join(FIXTURES, "scene");

let outDir: string;

beforeAll(() => {
  outDir = fs.mkdtempSync(path.join(os.tmpdir(), "export-"));
});

afterAll(() => {
  fs.rmSync(outDir, { recursive: true, force: true });
});

describe("export job with the color stub", () => {
  it("exports core-compatible mask files from gt bbox prompts", () => {
    const gtPaths = fs
      .readdirSync(path.join(SCENE, "gt_masks"))
      .sort()
      .map((n) => path.join(SCENE, "gt_masks", n));
    const result = runExport({
      framesDir: path.join(SCENE, "frames"),
      outDir,
      gtMasksPaths: gtPaths,
      segmenter: new ColorStubSegmenter(),
    });
    expect(result.promptMode).toBe("bbox");
    expect(result.objectIds.sort()).toEqual(["disk_a", "square_b"]);
    const centers = JSON.parse(
      fs.readFileSync(path.join(SCENE, "true_centers.json"), "utf8"),
    );
    for (const file of result.files) {
      const doc = parseMaskFile(fs.readFileSync(file, "utf8"));
      // canonical re-serialization is byte-identical
      expect(serializeMaskFile(doc)).toBe(fs.readFileSync(file, "utf8"));
      expect(doc.frames).toHaveLength(result.frameCount);
      const truth = centers[doc.object_id];
      for (let i = 0; i < doc.frames.length; i++) {
        const runs = doc.frames[i];
        // runs decode and re-encode bit-exactly
        const flat = decodeRle(runs, doc.width, doc.height);
        expect(encodeRle(flat)).toEqual(runs);
        if (maskPixelCount(runs) > 0) {
          const c = centroidFromFlat(flat, doc.width)!;
          const [tu, tv] = truth[i];
          expect(Math.hypot(c.u - tu, c.v - tv)).toBeLessThan(2.0);
        }
      }
    }
    const manifest = JSON.parse(
      fs.readFileSync(path.join(outDir, "export_manifest.json"), "utf8"),
    );
    expect(manifest.prompt_mode).toBe("bbox");
    expect(manifest.segmenter).toBe("stub-color");
  });

  it("supports explicit prompt points and records the mode", () => {
    const pointOut = fs.mkdtempSync(path.join(os.tmpdir(), "export-pt-"));
    try {
      const result = runExport({
        framesDir: path.join(SCENE, "frames"),
        outDir: pointOut,
        promptPoints: [{ objectId: "disk_a", u: 60, v: 180 }],
        fps: 30,
        segmenter: new ColorStubSegmenter(),
      });
      expect(result.promptMode).toBe("point");
      const doc = parseMaskFile(
        fs.readFileSync(path.join(pointOut, "disk_a.json"), "utf8"),
      );
      expect(maskPixelCount(doc.frames[0])).toBeGreaterThan(0);
    } finally {
      fs.rmSync(pointOut, { recursive: true, force: true });
    }
  });

  it("rejects out-of-bounds prompt points", () => {
    expect(() =>
      runExport({
        framesDir: path.join(SCENE, "frames"),
        outDir,
        promptPoints: [{ objectId: "x", u: 5000, v: 10 }],
        segmenter: new ColorStubSegmenter(),
      }),
    ).toThrow(PromptOutOfBoundsError);
  });
});
