#!/usr/bin/env node
/**
 * export-masks export --frames DIR --gt-masks FILE... --out DIR
 *                     [--prompt-point ID:U,V ...] [--fps N]
 *                     [--segmenter stub|exec:CMD] [--tolerance N]
 * export-masks boxes --gt-masks FILE...
 */

import * as fs from "node:fs";

import { runExport } from "./export.js";
import { boxesFromGt, parseMaskFile } from "./maskfile.js";
import { ColorStubSegmenter, ExecSegmenter, Segmenter } from "./segmenter.js";

interface Args {
  command: string;
  frames?: string;
  gtMasks: string[];
  out?: string;
  promptPoints: { objectId: string; u: number; v: number }[];
  fps?: number;
  segmenter: string;
  tolerance: number;
}

function parseArgs(argv: string[]): Args {
  const args: Args = {
    command: argv[0] ?? "",
    gtMasks: [],
    promptPoints: [],
    segmenter: "stub",
    tolerance: 12,
  };
  let i = 1;
  const next = (flag: string): string => {
    if (i + 1 >= argv.length) throw new Error(`missing value for ${flag}`);
    return argv[++i];
  };
  for (; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--frames") args.frames = next(a);
    else if (a === "--gt-masks") {
      args.gtMasks.push(next(a));
      while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        args.gtMasks.push(argv[++i]);
      }
    } else if (a === "--out") args.out = next(a);
    else if (a === "--fps") args.fps = parseFloat(next(a));
    else if (a === "--segmenter") args.segmenter = next(a);
    else if (a === "--tolerance") args.tolerance = parseFloat(next(a));
    else if (a === "--prompt-point") {
      const spec = next(a);
      const m = /^(?:([^:]+):)?([\d.+-]+),([\d.+-]+)$/.exec(spec);
      if (!m) throw new Error(`bad --prompt-point ${spec}, expected [ID:]U,V`);
      args.promptPoints.push({
        objectId: m[1] ?? `object_${args.promptPoints.length}`,
        u: parseFloat(m[2]),
        v: parseFloat(m[3]),
      });
    } else throw new Error(`unknown argument ${a}`);
  }
  return args;
}

function buildSegmenter(args: Args): Segmenter {
  if (args.segmenter === "stub") return new ColorStubSegmenter(args.tolerance);
  if (args.segmenter.startsWith("exec:")) return new ExecSegmenter(args.segmenter.slice(5));
  throw new Error(`unknown segmenter ${args.segmenter}`);
}

function main(): number {
  const argv = process.argv.slice(2);
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
  try {
    if (args.command === "export") {
      if (!args.frames || !args.out) {
        console.error("error: export needs --frames and --out");
        return 2;
      }
      const result = runExport({
        framesDir: args.frames,
        outDir: args.out,
        gtMasksPaths: args.gtMasks.length ? args.gtMasks : undefined,
        promptPoints: args.promptPoints.length ? args.promptPoints : undefined,
        fps: args.fps,
        segmenter: buildSegmenter(args),
      });
      console.log(
        `exported ${result.objectIds.length} object(s) x ${result.frameCount} frame(s) ` +
          `via ${args.segmenter} (${result.promptMode} prompts)`,
      );
      return 0;
    }
    if (args.command === "boxes") {
      const docs = args.gtMasks.map((p) => parseMaskFile(fs.readFileSync(p, "utf8")));
      const prompts = boxesFromGt(docs);
      console.log(
        JSON.stringify(
          prompts.map((p) => ({
            object_id: p.objectId,
            box: [p.box!.uMin, p.box!.vMin, p.box!.uMax, p.box!.vMax],
          })),
        ),
      );
      return 0;
    }
    console.error(`error: unknown command ${args.command || "(none)"}; use export or boxes`);
    return 2;
  } catch (e) {
    console.error(`error: ${(e as Error).constructor.name}: ${(e as Error).message}`);
    return 1;
  }
}

process.exit(main());
