#!/usr/bin/env python3
"""Regenerate exporter test fixtures from the core package.

Run from the repo root with the core installed:
    python exporter/scripts/gen_fixtures.py
"""

import dataclasses
import json
from pathlib import Path

import numpy as np

from physbench.masks import bbox_from_mask, encode_rle, save_mask_file, write_ppm, frame_filename
from physbench.synth import DEFAULT_INTRINSICS, ObjectSpec, ScenarioConfig, build_bundle, render_frames

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def gen_bbox_cases():
    rng = np.random.default_rng(2024)
    cases = []
    for _ in range(100):
        h, w = int(rng.integers(2, 24)), int(rng.integers(2, 24))
        mask = rng.random((h, w)) < 0.3
        if not mask.any():
            mask[int(rng.integers(h)), int(rng.integers(w))] = True
        box = bbox_from_mask(mask)
        cases.append(
            {
                "width": w,
                "height": h,
                "runs": encode_rle(mask),
                "bbox": [box.u_min, box.v_min, box.u_max, box.v_max],
            }
        )
    (FIXTURES / "bbox_cases.json").write_text(json.dumps(cases) + "\n")


def gen_rle_vectors():
    rng = np.random.default_rng(7)
    vectors = []
    for _ in range(50):
        h, w = int(rng.integers(1, 16)), int(rng.integers(1, 16))
        mask = rng.random((h, w)) < rng.random()
        vectors.append({"width": w, "height": h, "runs": encode_rle(mask),
                        "pixels": mask.astype(int).ravel().tolist()})
    (FIXTURES / "rle_vectors.json").write_text(json.dumps(vectors) + "\n")


def gen_scene():
    scene = FIXTURES / "scene"
    frames_dir = scene / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    base = ScenarioConfig(
        name="stub_scene",
        kind="translating_object",
        true_params={},
        width=320,
        height=240,
        fps=30.0,
        frame_count=10,
        depth_m=2.0,
        seed=5,
        objects=(ObjectSpec("placeholder", "disk", 0.01),),
        intrinsics=dataclasses.replace(DEFAULT_INTRINSICS, cx=160.0, cy=120.0),
    )
    x0, y0 = base.world_at_pixel(60.0, 180.0)
    x1, y1 = base.world_at_pixel(260.0, 60.0)
    cfg = dataclasses.replace(
        base,
        objects=(
            ObjectSpec("disk_a", "disk", 0.04, x0=x0, y0=y0,
                       vx0=base.speed_at_pixels_per_second(450.0), color=(200, 60, 40)),
            ObjectSpec("square_b", "square", 0.06, x0=x1, y0=y1,
                       vx0=-base.speed_at_pixels_per_second(300.0),
                       vy0=base.speed_at_pixels_per_second(150.0), color=(40, 90, 220)),
        ),
    )
    bundle = build_bundle(cfg, with_masks=True)
    for i, img in enumerate(render_frames(bundle)):
        write_ppm(frames_dir / frame_filename(i), img)
    gt_dir = scene / "gt_masks"
    gt_dir.mkdir(exist_ok=True)
    for oid, seq in bundle.masks.items():
        save_mask_file(seq, gt_dir / f"{oid}.json")
    # projected true centers per frame for the centroid tolerance check
    extr = cfg.extrinsics()
    centers = {}
    for oid, track in bundle.tracks_3d.items():
        rows = []
        for s in track.samples:
            pc = extr.rotation @ np.array([s.x, s.y, s.z]) + extr.translation
            rows.append([
                float(cfg.intrinsics.fx * pc[0] / pc[2] + cfg.intrinsics.cx),
                float(cfg.intrinsics.fy * pc[1] / pc[2] + cfg.intrinsics.cy),
            ])
        centers[oid] = rows
    (scene / "true_centers.json").write_text(json.dumps(centers, sort_keys=True) + "\n")


def gen_ppm_probe():
    rng = np.random.default_rng(11)
    img = rng.integers(0, 256, size=(7, 9, 3), dtype=np.uint8)
    write_ppm(FIXTURES / "probe.ppm", img)
    probes = [
        {"u": int(u), "v": int(v), "rgb": [int(c) for c in img[v, u]]}
        for v, u in [(0, 0), (3, 4), (6, 8)]
    ]
    (FIXTURES / "probe_expected.json").write_text(
        json.dumps({"width": 9, "height": 7, "probes": probes}) + "\n"
    )


if __name__ == "__main__":
    FIXTURES.mkdir(exist_ok=True)
    gen_bbox_cases()
    gen_rle_vectors()
    gen_scene()
    gen_ppm_probe()
    print(f"fixtures written under {FIXTURES}")
