/**
 * Segmenter backends. The real promptable video segmenter is injected as
 * an external command; tests and synthetic runs use the color stub, which
 * keys each object on the color under its prompt in the first frame and
 * thresholds every frame against it. Flat-color synthetic videos make
 * that an exact tracker; occluders and frame exits yield empty masks the
 * same way a real tracker losing the object would.
 */

import { spawnSync } from "node:child_process";

import { PromptOutOfBoundsError, SegmenterUnavailableError } from "./errors.js";
import { Prompt } from "./maskfile.js";
import { Frame } from "./ppm.js";
import { decodeRle } from "./rle.js";

export interface Segmenter {
  /** Returns per-object, per-frame flat binary masks. */
  segment(frames: Frame[], prompts: Prompt[]): Uint8Array[][];
  readonly name: string;
}

function promptPixel(prompt: Prompt, frame: Frame): { u: number; v: number } {
  const loc = prompt.point ?? {
    u: Math.round((prompt.box!.uMin + prompt.box!.uMax) / 2),
    v: Math.round((prompt.box!.vMin + prompt.box!.vMax) / 2),
  };
  if (loc.u < 0 || loc.u >= frame.width || loc.v < 0 || loc.v >= frame.height) {
    throw new PromptOutOfBoundsError(
      `${prompt.objectId}: prompt (${loc.u}, ${loc.v}) outside ${frame.width}x${frame.height}`,
    );
  }
  return { u: Math.round(loc.u), v: Math.round(loc.v) };
}

export class ColorStubSegmenter implements Segmenter {
  readonly name = "stub-color";

  constructor(private tolerance: number = 12) {}

  segment(frames: Frame[], prompts: Prompt[]): Uint8Array[][] {
    if (frames.length === 0) throw new SegmenterUnavailableError("no frames");
    const first = frames[0];
    const refs = prompts.map((p) => {
      const { u, v } = promptPixel(p, first);
      const base = (v * first.width + u) * 3;
      return [first.data[base], first.data[base + 1], first.data[base + 2]];
    });
    return refs.map(([r0, g0, b0]) =>
      frames.map((frame) => {
        const n = frame.width * frame.height;
        const mask = new Uint8Array(n);
        const d = frame.data;
        for (let i = 0; i < n; i++) {
          const base = i * 3;
          const dist =
            Math.abs(d[base] - r0) + Math.abs(d[base + 1] - g0) + Math.abs(d[base + 2] - b0);
          if (dist <= this.tolerance) mask[i] = 1;
        }
        return mask;
      }),
    );
  }
}

/**
 * External command adapter. The command receives one JSON document on
 * stdin: {width, height, prompts: [{object_id, box?, point?}], frames:
 * [[r,g,b,...], ...]} and must print JSON {masks: {object_id: [runs per
 * frame]}} with the core's run-length convention.
 */
export class ExecSegmenter implements Segmenter {
  readonly name: string;

  constructor(private command: string) {
    this.name = `exec:${command}`;
  }

  segment(frames: Frame[], prompts: Prompt[]): Uint8Array[][] {
    const payload = JSON.stringify({
      width: frames[0].width,
      height: frames[0].height,
      prompts: prompts.map((p) => ({
        object_id: p.objectId,
        box: p.box ? [p.box.uMin, p.box.vMin, p.box.uMax, p.box.vMax] : null,
        point: p.point ? [p.point.u, p.point.v] : null,
      })),
      frames: frames.map((f) => Array.from(f.data)),
    });
    const result = spawnSync(this.command, { input: payload, shell: true, maxBuffer: 1 << 28 });
    if (result.error || result.status !== 0) {
      throw new SegmenterUnavailableError(
        `segmenter command failed: ${result.error ?? result.stderr?.toString()}`,
      );
    }
    const doc = JSON.parse(result.stdout.toString());
    return prompts.map((p) =>
      (doc.masks[p.objectId] as number[][]).map((runs) =>
        decodeRle(runs, frames[0].width, frames[0].height),
      ),
    );
  }
}
