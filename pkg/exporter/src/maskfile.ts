/** Mask-file interchange: the core's per-object JSON document. */

import { EmptyMaskError } from "./errors.js";
import { BBox, bboxFromFlat, decodeRle } from "./rle.js";

export interface MaskFileDoc {
  object_id: string;
  width: number;
  height: number;
  fps: number;
  frames: number[][];
}

export interface Prompt {
  objectId: string;
  box?: BBox;
  point?: { u: number; v: number };
}

/** Canonical serialization: keys sorted, one trailing newline. */
export function serializeMaskFile(doc: MaskFileDoc): string {
  const sorted = {
    fps: doc.fps,
    frames: doc.frames,
    height: doc.height,
    object_id: doc.object_id,
    width: doc.width,
  };
  return JSON.stringify(sorted) + "\n";
}

export function parseMaskFile(text: string): MaskFileDoc {
  const raw = JSON.parse(text);
  for (const key of ["object_id", "width", "height", "fps", "frames"]) {
    if (!(key in raw)) throw new Error(`mask file missing key ${key}`);
  }
  return {
    object_id: String(raw.object_id),
    width: Number(raw.width),
    height: Number(raw.height),
    fps: Number(raw.fps),
    frames: raw.frames.map((runs: unknown[]) => runs.map(Number)),
  };
}

/** First-frame tight boxes, one prompt per object id. */
export function boxesFromGt(docs: MaskFileDoc[]): Prompt[] {
  const prompts: Prompt[] = [];
  for (const doc of docs) {
    if (doc.frames.length === 0) {
      throw new EmptyMaskError(`${doc.object_id}: no frames`);
    }
    const flat = decodeRle(doc.frames[0], doc.width, doc.height);
    const box = bboxFromFlat(flat, doc.width);
    if (box === null) {
      throw new EmptyMaskError(`${doc.object_id}: empty first-frame mask`);
    }
    prompts.push({ objectId: doc.object_id, box });
  }
  return prompts;
}
