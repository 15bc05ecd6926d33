/**
 * Export job: frames in, prompts from ground-truth first-frame boxes (or
 * explicit points), segmenter output written as one core-format mask
 * file per object. A manifest records which prompting mode was used.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { boxesFromGt, MaskFileDoc, parseMaskFile, Prompt, serializeMaskFile } from "./maskfile.js";
import { Frame, readPpm } from "./ppm.js";
import { encodeRle } from "./rle.js";
import { Segmenter } from "./segmenter.js";

export interface ExportJob {
  framesDir: string;
  outDir: string;
  segmenter: Segmenter;
  gtMasksPaths?: string[];
  promptPoints?: { objectId: string; u: number; v: number }[];
  fps?: number;
}

export interface ExportResult {
  files: string[];
  objectIds: string[];
  frameCount: number;
  promptMode: "bbox" | "point";
}

export function listFrames(dir: string): string[] {
  const names = fs
    .readdirSync(dir)
    .filter((n) => /^frame_\d{6}\.ppm$/.test(n))
    .sort();
  return names.map((n) => path.join(dir, n));
}

export function loadFrames(dir: string): Frame[] {
  const paths = listFrames(dir);
  if (paths.length === 0) throw new Error(`no frame_*.ppm files in ${dir}`);
  return paths.map((p) => readPpm(fs.readFileSync(p)));
}

export function runExport(job: ExportJob): ExportResult {
  const frames = loadFrames(job.framesDir);
  let prompts: Prompt[];
  let promptMode: "bbox" | "point";
  let fps = job.fps ?? 0;
  if (job.promptPoints && job.promptPoints.length > 0) {
    prompts = job.promptPoints.map((p) => ({ objectId: p.objectId, point: { u: p.u, v: p.v } }));
    promptMode = "point";
  } else if (job.gtMasksPaths && job.gtMasksPaths.length > 0) {
    const docs: MaskFileDoc[] = job.gtMasksPaths.map((p) =>
      parseMaskFile(fs.readFileSync(p, "utf8")),
    );
    prompts = boxesFromGt(docs);
    promptMode = "bbox";
    if (fps === 0) fps = docs[0].fps;
  } else {
    throw new Error("export needs ground-truth masks or prompt points");
  }
  if (fps === 0) fps = 30;

  const perObject = job.segmenter.segment(frames, prompts);
  fs.mkdirSync(job.outDir, { recursive: true });
  const files: string[] = [];
  prompts.forEach((prompt, i) => {
    const doc: MaskFileDoc = {
      object_id: prompt.objectId,
      width: frames[0].width,
      height: frames[0].height,
      fps,
      frames: perObject[i].map((mask) => encodeRle(mask)),
    };
    const file = path.join(job.outDir, `${prompt.objectId}.json`);
    fs.writeFileSync(file, serializeMaskFile(doc));
    files.push(file);
  });
  const manifest = {
    fps,
    frame_count: frames.length,
    object_ids: prompts.map((p) => p.objectId),
    prompt_mode: promptMode,
    prompts: prompts.map((p) => ({
      object_id: p.objectId,
      box: p.box ? [p.box.uMin, p.box.vMin, p.box.uMax, p.box.vMax] : null,
      point: p.point ? [p.point.u, p.point.v] : null,
    })),
    segmenter: job.segmenter.name,
  };
  fs.writeFileSync(
    path.join(job.outDir, "export_manifest.json"),
    JSON.stringify(manifest, null, 1) + "\n",
  );
  return {
    files,
    objectIds: prompts.map((p) => p.objectId),
    frameCount: frames.length,
    promptMode,
  };
}
