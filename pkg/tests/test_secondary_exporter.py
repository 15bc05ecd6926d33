"""Format contract between the mask exporter and the core.

These tests drive the built exporter CLI (exporter/dist) with its stub
segmenter and parse everything back through the core. They are skipped
when node or the built exporter is absent; the primary suite is complete
without them.
"""

import dataclasses
import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from physbench.masks import (
    bbox_from_mask,
    bbox_from_runs,
    centroid_from_runs,
    decode_rle,
    encode_rle,
    frame_filename,
    load_mask_file,
    mask_pixel_count,
    save_mask_file,
    write_ppm,
)
from physbench.synth import (
    DEFAULT_INTRINSICS,
    ObjectSpec,
    ScenarioConfig,
    build_bundle,
    render_frames,
)

REPO = Path(__file__).resolve().parent.parent
CLI = REPO / "exporter" / "dist" / "cli.js"
MASK_SCHEMA = REPO / "schemas" / "mask_file.schema.json"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not CLI.exists(),
    reason="exporter not built (cd exporter && npm install && npm run build)",
)


def _node(*args, check=True):
    return subprocess.run(
        ["node", str(CLI), *args], capture_output=True, text=True, check=check
    )


@pytest.fixture(scope="module")
def scene(tmp_path_factory):
    root = tmp_path_factory.mktemp("scene")
    base = ScenarioConfig(
        name="export_scene",
        kind="translating_object",
        true_params={},
        width=320,
        height=240,
        fps=30.0,
        frame_count=9,
        depth_m=2.0,
        seed=17,
        objects=(ObjectSpec("placeholder", "disk", 0.01),),
        intrinsics=dataclasses.replace(DEFAULT_INTRINSICS, cx=160.0, cy=120.0),
    )
    x0, y0 = base.world_at_pixel(70.0, 180.0)
    x1, y1 = base.world_at_pixel(250.0, 60.0)
    cfg = dataclasses.replace(
        base,
        objects=(
            ObjectSpec("disk_a", "disk", 0.04, x0=x0, y0=y0,
                       vx0=base.speed_at_pixels_per_second(400.0), color=(200, 60, 40)),
            ObjectSpec("square_b", "square", 0.06, x0=x1, y0=y1,
                       vx0=-base.speed_at_pixels_per_second(280.0), color=(40, 90, 220)),
        ),
    )
    bundle = build_bundle(cfg, with_masks=True)
    frames_dir = root / "frames"
    frames_dir.mkdir()
    for i, img in enumerate(render_frames(bundle)):
        write_ppm(frames_dir / frame_filename(i), img)
    gt_dir = root / "gt"
    gt_dir.mkdir()
    for oid, seq in bundle.masks.items():
        save_mask_file(seq, gt_dir / f"{oid}.json")
    return root, bundle


def test_exported_masks_parse_bit_exactly(scene, tmp_path):
    root, bundle = scene
    out = tmp_path / "exported"
    gt_files = sorted((root / "gt").glob("*.json"))
    result = _node(
        "export", "--frames", str(root / "frames"),
        "--gt-masks", *[str(p) for p in gt_files],
        "--out", str(out),
    )
    assert "2 object(s)" in result.stdout
    exported = {p.stem: p for p in out.glob("*.json") if p.name != "export_manifest.json"}
    assert set(exported) == set(bundle.masks)
    import jsonschema

    schema = json.loads(MASK_SCHEMA.read_text())
    for oid, path in exported.items():
        doc = json.loads(path.read_text())
        jsonschema.validate(doc, schema)
        seq = load_mask_file(path)
        assert seq.object_id == oid
        assert (seq.width, seq.height) == (bundle.meta.width, bundle.meta.height)
        for i, runs in enumerate(seq.frames):
            decoded = decode_rle(runs, seq.width, seq.height)
            assert encode_rle(decoded) == list(runs)
            # the color stub on disjoint flat-color objects reproduces the
            # rasterized ground truth exactly
            assert tuple(runs) == bundle.masks[oid].frames[i]


def test_exported_centroids_within_two_pixels(scene, tmp_path):
    root, bundle = scene
    out = tmp_path / "exported"
    gt_files = sorted((root / "gt").glob("*.json"))
    _node(
        "export", "--frames", str(root / "frames"),
        "--gt-masks", *[str(p) for p in gt_files],
        "--out", str(out),
    )
    cfg = bundle.config
    extr = cfg.extrinsics()
    for oid, track in bundle.tracks_3d.items():
        seq = load_mask_file(out / f"{oid}.json")
        for i, s in enumerate(track.samples):
            runs = seq.frames[i]
            if mask_pixel_count(runs) == 0:
                continue
            pc = extr.rotation @ np.array([s.x, s.y, s.z]) + extr.translation
            u = cfg.intrinsics.fx * pc[0] / pc[2] + cfg.intrinsics.cx
            v = cfg.intrinsics.fy * pc[1] / pc[2] + cfg.intrinsics.cy
            cu, cv = centroid_from_runs(runs, seq.width, seq.height)
            assert np.hypot(cu - u, cv - v) < 2.0


def test_boxes_subcommand_matches_core(tmp_path):
    rng = np.random.default_rng(99)
    paths = []
    expected = []
    for k in range(100):
        h, w = int(rng.integers(2, 20)), int(rng.integers(2, 20))
        mask = rng.random((h, w)) < 0.3
        if not mask.any():
            mask[int(rng.integers(h)), int(rng.integers(w))] = True
        doc = {
            "object_id": f"obj_{k}",
            "width": w,
            "height": h,
            "fps": 30.0,
            "frames": [encode_rle(mask)],
        }
        p = tmp_path / f"m{k}.json"
        p.write_text(json.dumps(doc, sort_keys=True) + "\n")
        paths.append(str(p))
        box = bbox_from_mask(mask)
        expected.append({"object_id": f"obj_{k}",
                         "box": [box.u_min, box.v_min, box.u_max, box.v_max]})
    result = _node("boxes", "--gt-masks", *paths)
    assert json.loads(result.stdout) == expected


def test_point_prompt_mode_recorded(scene, tmp_path):
    root, bundle = scene
    out = tmp_path / "pt"
    result = _node(
        "export", "--frames", str(root / "frames"),
        "--out", str(out),
        "--prompt-point", "disk_a:70,180",
        "--fps", "30",
    )
    assert "point prompts" in result.stdout
    manifest = json.loads((out / "export_manifest.json").read_text())
    assert manifest["prompt_mode"] == "point"
    seq = load_mask_file(out / "disk_a.json")
    box = bbox_from_runs(seq.frames[0], seq.width, seq.height)
    gt_box = bbox_from_runs(bundle.masks["disk_a"].frames[0], seq.width, seq.height)
    assert box == gt_box


def test_exporter_output_scores_perfectly_in_metrics(scene, tmp_path):
    # full cross-component loop: rendered frames -> exporter -> metrics mode
    root, bundle = scene
    out = tmp_path / "pred"
    gt_files = sorted((root / "gt").glob("*.json"))
    _node(
        "export", "--frames", str(root / "frames"),
        "--gt-masks", *[str(p) for p in gt_files],
        "--out", str(out),
    )
    from physbench.pipeline import PipelineConfig, run

    doc = {
        "mode": "metrics",
        "pairs": [{"gt": str(root / "gt"), "pred": str(out), "scenario": "stub_scene"}],
    }
    report = run(PipelineConfig.from_dict(doc, base_dir=tmp_path))
    assert report.rows[0]["mean_miou"] == 1.0


def test_empty_first_frame_rejected(tmp_path, scene):
    root, _bundle = scene
    doc = {"object_id": "ghost", "width": 4, "height": 4, "fps": 30.0, "frames": [[16]]}
    p = tmp_path / "ghost.json"
    p.write_text(json.dumps(doc, sort_keys=True) + "\n")
    result = _node(
        "export", "--frames", str(root / "frames"),
        "--gt-masks", str(p), "--out", str(tmp_path / "o"),
        check=False,
    )
    assert result.returncode == 1
    assert "EmptyMaskError" in result.stderr
