"""Batch orchestration: config validation, pipeline wiring, and reports.

A single JSON config selects one of four modes. simulate writes synthetic
bundles; estimate recovers physical parameters from track or mask files;
metrics scores predicted bundles against ground truth; validate closes
the loop end to end (simulate, rasterize, re-track, re-pose, fit) and
produces benchmark-style rows against the material table.

Reports are deterministic for a fixed config and seed: rows follow config
order regardless of worker scheduling, and the only varying field is the
created_utc provenance timestamp, which byte-level comparisons exclude.
Exit codes are mapped by the CLI from the error classes raised here:
ConfigInvalid -> 2, InputMissing -> 3.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import __version__
from .camera import (
    estimate_pose,
    intrinsics_from_dict,
    extrinsics_from_dict,
    load_corner_set,
)
from .errors import (
    ConfigInvalid,
    EmptyReport,
    InputMissing,
    PhysbenchError,
)
from .masks import load_mask_file, read_ppm
from .metrics import sequence_metrics, summarize
from .params import (
    DEFAULT_MATERIALS,
    ExperimentSpec,
    MaterialTable,
    aggregate,
    friction_from_track,
    gravity_from_track,
    viscosity_from_track,
)
from .presets import (
    MATERIAL_ROWS,
    SCENARIO_NAMES,
    material_scenario,
    sample_scenario,
)
from .synth import (
    SyntheticBundle,
    build_bundle,
    rasterize_masks,
    scenario_from_dict,
    write_bundle,
)
from .tracks import (
    Track3D,
    VideoMeta,
    lift_track,
    load_track2d,
    load_tracks3d,
    track_from_masks,
)

_MATERIAL_KIND = {
    "free_fall": "gravity_freefall",
    "parabolic": "gravity_parabolic",
    "glycerine": "viscosity_settling",
    "corn_syrup": "viscosity_settling",
    "honey": "viscosity_settling",
    "wood": "friction_incline",
    "rubber": "friction_incline",
    "sandpaper_80": "friction_incline",
    "sandpaper_3000": "friction_incline",
    "plastic": "friction_incline",
}

# material-table row the estimate is judged against; gravity rows share one
_MATERIAL_GT = {"free_fall": "gravity", "parabolic": "gravity"}

DEFAULT_CASE_COUNTS = {
    "free_fall": 17,
    "parabolic": 6,
    "glycerine": 6,
    "corn_syrup": 4,
    "honey": 4,
    "wood": 6,
    "rubber": 4,
    "sandpaper_80": 4,
    "sandpaper_3000": 4,
    "plastic": 4,
}


def config_schema() -> dict:
    text = importlib.resources.files("physbench").joinpath("config_schema.json").read_text()
    return json.loads(text)


def validate_config(doc: dict) -> None:
    try:
        jsonschema.validate(doc, config_schema())
    except jsonschema.ValidationError as e:
        raise ConfigInvalid(e.message) from e


@dataclass(frozen=True)
class PipelineConfig:
    mode: str
    doc: dict
    seed: int = 0
    strict: bool = False
    jobs: int = 1
    label: str = "run"
    materials: MaterialTable = field(default_factory=lambda: DEFAULT_MATERIALS)
    base_dir: Path = field(default_factory=Path)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str | Path = ".") -> "PipelineConfig":
        validate_config(doc)
        base = Path(base_dir)
        materials = DEFAULT_MATERIALS
        if "materials" in doc:
            mpath = base / doc["materials"]
            if not mpath.exists():
                raise InputMissing(f"materials table not found: {mpath}")
            materials = MaterialTable.load(mpath)
        return cls(
            mode=doc["mode"],
            doc=doc,
            seed=int(doc.get("seed", 0)),
            strict=bool(doc.get("strict", False)),
            jobs=int(doc.get("jobs", 1)),
            label=str(doc.get("label", "run")),
            materials=materials,
            base_dir=base,
        )

    def tolerance(self, name: str, default):
        return self.doc.get("tolerances", {}).get(name, default)


@dataclass(frozen=True)
class Report:
    mode: str
    label: str
    rows: tuple[dict, ...]
    curves: tuple[dict, ...]
    failures: tuple[dict, ...]
    pass_rules: tuple[dict, ...]
    provenance: dict

    @property
    def all_rules_pass(self) -> bool:
        return all(r["passed"] for r in self.pass_rules)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "label": self.label,
            "rows": list(self.rows),
            "curves": list(self.curves),
            "failures": list(self.failures),
            "pass_rules": list(self.pass_rules),
            "provenance": dict(self.provenance),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _provenance(doc: dict) -> dict:
    blob = json.dumps(doc, sort_keys=True).encode()
    return {
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }


def _parallel_map(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# per-video parameter recovery


def experiment_spec_for(bundle: SyntheticBundle, terminal_threshold: float = 0.05) -> ExperimentSpec:
    """Build the estimation spec from the pre-measured scene constants.

    Angle, sphere radius and densities count as measured; the parameter
    under test (g, mu, eta) never leaks in.
    """
    cfg = bundle.config
    p = cfg.true_params
    if cfg.kind == "friction_incline":
        return ExperimentSpec(kind=cfg.kind, theta=float(p["theta"]))
    if cfg.kind == "viscosity_settling":
        return ExperimentSpec(
            kind=cfg.kind,
            r=float(p["r"]),
            rho_s=float(p["rho_s"]),
            rho_f=float(p["rho_f"]),
            terminal_threshold=terminal_threshold,
        )
    return ExperimentSpec(kind=cfg.kind)


def _estimate_value(track: Track3D, spec: ExperimentSpec, force_terminal: bool = False) -> float:
    if spec.kind in ("gravity_freefall", "gravity_parabolic"):
        return gravity_from_track(track, spec).g
    if spec.kind == "friction_incline":
        return friction_from_track(track, spec).mu
    return viscosity_from_track(track, spec, force=force_terminal).eta


def recover_parameter(
    bundle: SyntheticBundle,
    use_masks: bool = True,
    use_estimated_pose: bool = True,
    force_terminal: bool = False,
    terminal_threshold: float = 0.05,
) -> float:
    """Full recovery chain on one synthetic bundle; multi-object scenes
    average the per-object values."""
    cfg = bundle.config
    intr = cfg.intrinsics
    if use_estimated_pose:
        extr = estimate_pose(bundle.corners, cfg.board, intr).extrinsics
    else:
        extr = cfg.extrinsics()
    spec = experiment_spec_for(bundle, terminal_threshold)
    if use_masks:
        masks = bundle.masks or rasterize_masks(bundle, cfg)
        tracks2d = {oid: track_from_masks(seq, bundle.meta) for oid, seq in masks.items()}
    else:
        from .synth import noisy_track2d

        tracks2d = noisy_track2d(bundle, cfg)
    values = []
    for oid in sorted(tracks2d):
        track3d = lift_track(tracks2d[oid], bundle.meta, intr, extr)
        values.append(_estimate_value(track3d, spec, force_terminal))
    return float(np.mean(values))


# ---------------------------------------------------------------------------
# mode runners


def _run_validate(config: PipelineConfig) -> tuple[list, list, list]:
    cases = config.doc["cases"]
    threshold = config.tolerance("terminal_threshold", 0.05)
    rows, failures = [], []

    def run_case(indexed):
        idx, case = indexed
        material = case["material"]
        if material not in _MATERIAL_KIND:
            raise ConfigInvalid(f"unknown material {material!r}")
        n = int(case.get("n_videos", DEFAULT_CASE_COUNTS.get(material, 4)))
        noise = float(case.get("noise_px", 0.5))
        use_masks = bool(case.get("use_masks", True))
        values, sources, errs = [], [], []
        for k in range(n):
            seed = config.seed * 100003 + idx * 1009 + k
            cfg = material_scenario(material, seed=seed, noise_px=noise)
            sources.append(f"synthetic:{cfg.name}")
            try:
                bundle = build_bundle(cfg, with_masks=use_masks)
                values.append(
                    recover_parameter(
                        bundle,
                        use_masks=use_masks,
                        terminal_threshold=threshold,
                    )
                )
            except PhysbenchError as e:
                errs.append({"source": cfg.name, "error": type(e).__name__, "message": str(e)})
        return material, values, sources, errs

    results = _parallel_map(run_case, list(enumerate(cases)), config.jobs)
    for (idx, case), (material, values, sources, errs) in zip(enumerate(cases), results):
        failures.extend(errs)
        if not values:
            failures.append(
                {"source": material, "error": "EmptyInput", "message": "no successful videos"}
            )
            continue
        gt_name = _MATERIAL_GT.get(material, material)
        est = aggregate(values, gt_name, config.materials, kind=_MATERIAL_KIND[material])
        rows.append(_param_row(material, est, sources))
    pass_rules = _range_rules(config, rows)
    return rows, failures, pass_rules


def _range_rules(config: PipelineConfig, rows: list[dict]) -> list[dict]:
    """A row passes when its mean is in range, or within the configured
    relative margin of the nearest bound (noisy runs against point GTs)."""
    require = config.tolerance("require_in_range", True)
    margin = config.tolerance("pass_margin_rel", 0.05)
    rules = []
    for r in rows:
        if not require or r["in_range"] is None:
            passed = True
        elif r["in_range"]:
            passed = True
        else:
            scale = max(abs(r["gt_mid"]), 1e-12) if r["gt_mid"] is not None else 1e-12
            passed = r["deviation"] is not None and r["deviation"] <= margin * scale
        rules.append({"rule": "in_range", "row": r["material"], "passed": passed})
    return rules


def _param_row(material: str, est, sources: list[str]) -> dict:
    return {
        "material": material,
        "kind": est.kind,
        "n": est.n,
        "mean": est.mean,
        "std": est.std,
        "unit": est.unit,
        "gt_low": est.gt_low,
        "gt_high": est.gt_high,
        "gt_mid": est.gt_mid,
        "in_range": est.in_range,
        "deviation": est.deviation,
        "per_video": list(est.per_video),
        "sources": sources,
    }


def _resolve(config: PipelineConfig, rel: str) -> Path:
    p = Path(rel)
    if not p.is_absolute():
        p = config.base_dir / p
    if not p.exists():
        raise InputMissing(str(p))
    return p


def _video_track3d(config: PipelineConfig, video: dict, spec: ExperimentSpec) -> list[Track3D]:
    if "track3d" in video:
        tracks = load_tracks3d(_resolve(config, video["track3d"]))
        if "object_id" in video:
            return [tracks[video["object_id"]]]
        return [tracks[k] for k in sorted(tracks)]
    meta_doc = video.get("meta")
    if isinstance(meta_doc, str):
        meta_doc = json.loads(_resolve(config, meta_doc).read_text())
    if meta_doc is None:
        raise ConfigInvalid("video entry needs 'meta' when not using track3d")
    meta = VideoMeta(
        width=int(meta_doc["width"]),
        height=int(meta_doc["height"]),
        fps=float(meta_doc["fps"]),
        frame_count=int(meta_doc["frame_count"]),
        depth_m=float(meta_doc["depth_m"]),
        trim_offset=int(meta_doc.get("trim_offset", 0)),
    )
    if "intrinsics" not in video:
        raise ConfigInvalid("video entry needs 'intrinsics'")
    intr = intrinsics_from_dict(json.loads(_resolve(config, video["intrinsics"]).read_text()))
    extr = None
    if "extrinsics" in video:
        extr = extrinsics_from_dict(json.loads(_resolve(config, video["extrinsics"]).read_text()))
    elif "corners" in video:
        corners, board = load_corner_set(_resolve(config, video["corners"]))
        extr = estimate_pose(corners, board, intr).extrinsics
    if "track2d" in video:
        tracks2d = [load_track2d(_resolve(config, video["track2d"]))]
    elif "masks" in video:
        paths = video["masks"] if isinstance(video["masks"], list) else [video["masks"]]
        tracks2d = [
            track_from_masks(load_mask_file(_resolve(config, p)), meta) for p in paths
        ]
    else:
        raise ConfigInvalid("video entry needs one of track3d / track2d / masks")
    return [lift_track(t2, meta, intr, extr) for t2 in tracks2d]


def _run_estimate(config: PipelineConfig) -> tuple[list, list, list]:
    rows, failures = [], []
    threshold = config.tolerance("terminal_threshold", 0.05)
    for exp in config.doc["experiments"]:
        spec_doc = dict(exp.get("spec", {}))
        spec = ExperimentSpec(
            kind=exp["kind"],
            theta=spec_doc.get("theta"),
            r=spec_doc.get("r"),
            rho_s=spec_doc.get("rho_s"),
            rho_f=spec_doc.get("rho_f"),
            g_ref=float(spec_doc.get("g_ref", 9.81)),
            up_axis=spec_doc.get("up_axis", "-y"),
            terminal_threshold=float(spec_doc.get("terminal_threshold", threshold)),
        )
        material = exp.get("material", exp["kind"])
        values, sources = [], []
        for video in exp["videos"]:
            src = video.get("track3d") or video.get("track2d") or str(video.get("masks"))
            try:
                tracks = _video_track3d(config, video, spec)
                vals = [_estimate_value(t, spec) for t in tracks]
                values.append(float(np.mean(vals)))
                sources.append(src)
            except (ConfigInvalid, InputMissing):
                raise  # bad configuration aborts the whole run
            except PhysbenchError as e:
                failures.append(
                    {"source": src, "error": type(e).__name__, "message": str(e)}
                )
        if not values:
            failures.append(
                {"source": material, "error": "EmptyInput", "message": "no successful videos"}
            )
            continue
        gt_name = _MATERIAL_GT.get(material, material)
        est = aggregate(values, gt_name, config.materials, kind=exp["kind"])
        rows.append(_param_row(material, est, sources))
    if "tolerances" not in config.doc or "require_in_range" not in config.doc["tolerances"]:
        # estimate mode scores external data; range checks are opt-in
        return rows, failures, [
            {"rule": "in_range", "row": r["material"], "passed": True} for r in rows
        ]
    return rows, failures, _range_rules(config, rows)


def _load_eval_dir(config: PipelineConfig, rel: str):
    root = _resolve(config, rel)
    mask_dir = root / "masks" if (root / "masks").is_dir() else root
    masks = {}
    for f in sorted(mask_dir.glob("*.json")):
        try:
            seq = load_mask_file(f)
        except (KeyError, TypeError):
            continue
        masks[seq.object_id] = seq
    if not masks:
        raise InputMissing(f"no mask files under {root}")
    frames = None
    frame_dir = root / "frames"
    if frame_dir.is_dir():
        frames = [read_ppm(p) for p in sorted(frame_dir.glob("frame_*.ppm"))]
    return masks, frames


def _run_metrics(config: PipelineConfig) -> tuple[list, list, list]:
    pairs = config.doc["pairs"]
    by_scenario: dict[str, list] = {}
    order: list[str] = []
    failures = []
    for pair in pairs:
        scen = pair.get("scenario", "all")
        if scen not in by_scenario:
            by_scenario[scen] = []
            order.append(scen)
        try:
            gt_masks, gt_frames = _load_eval_dir(config, pair["gt"])
            pred_masks, pred_frames = _load_eval_dir(config, pair["pred"])
            if gt_frames is None or pred_frames is None:
                gt_frames = pred_frames = None
            series = sequence_metrics(gt_masks, pred_masks, gt_frames, pred_frames)
            by_scenario[scen].append((pair, series))
        except InputMissing:
            raise
        except PhysbenchError as e:
            failures.append(
                {"source": f"{pair['gt']} vs {pair['pred']}",
                 "error": type(e).__name__, "message": str(e)}
            )
    rows, curves = [], []
    for scen in order:
        entries = by_scenario[scen]
        if not entries:
            continue
        summary = summarize([s for _, s in entries], scen)
        rows.append(
            {
                "scenario": scen,
                "mean_miou": summary.mean_miou,
                "mean_bg_rmse": summary.mean_bg_rmse,
                "n_videos": summary.n_videos,
                "sources": [f"{p['gt']} vs {p['pred']}" for p, _ in entries],
            }
        )
        curves.append(
            {
                "scenario": scen,
                "curve": [
                    {"frame_index": i, "mean": m, "std": s, "n": n}
                    for i, (m, s, n) in enumerate(summary.miou_vs_frame)
                ],
            }
        )
    return rows, failures, [], curves


def _run_simulate(config: PipelineConfig, out_dir: Path | None) -> tuple[list, list, list]:
    if out_dir is None:
        raise ConfigInvalid("simulate mode needs an output directory")
    rows, failures = [], []
    entries = []
    for entry in config.doc["scenarios"]:
        count = int(entry.get("count", 1))
        base_seed = int(entry.get("seed", config.seed))
        for k in range(count):
            entries.append((entry, base_seed + k))
    for entry, seed in entries:
        if "scenario" in entry:
            cfg = scenario_from_dict(entry["scenario"])
        elif "preset" in entry:
            name = entry["preset"]
            if name not in SCENARIO_NAMES:
                raise ConfigInvalid(f"unknown preset {name!r}")
            cfg = replace(sample_scenario(name, seed), name=f"{name}_{seed}")
        elif "material" in entry:
            cfg = material_scenario(
                entry["material"], seed, noise_px=float(entry.get("noise_px", 0.5))
            )
        else:
            raise ConfigInvalid("scenario entry needs 'scenario', 'preset' or 'material'")
        try:
            bundle = build_bundle(cfg, with_masks=True)
            dest = write_bundle(bundle, out_dir / cfg.name, frames=bool(entry.get("frames", False)))
            rows.append(
                {
                    "name": cfg.name,
                    "kind": cfg.kind,
                    "path": str(dest),
                    "frame_count": cfg.frame_count,
                    "objects": [o.object_id for o in cfg.objects],
                    "sources": [str(dest)],
                }
            )
        except PhysbenchError as e:
            failures.append({"source": cfg.name, "error": type(e).__name__, "message": str(e)})
    return rows, failures, []


def run(config: PipelineConfig, out_dir: str | Path | None = None) -> Report:
    """Execute one pipeline mode and assemble the deterministic report."""
    out_path = Path(out_dir) if out_dir is not None else None
    curves: list[dict] = []
    if config.mode == "validate":
        rows, failures, pass_rules = _run_validate(config)
    elif config.mode == "estimate":
        rows, failures, pass_rules = _run_estimate(config)
    elif config.mode == "metrics":
        rows, failures, pass_rules, curves = _run_metrics(config)
    elif config.mode == "simulate":
        rows, failures, pass_rules = _run_simulate(config, out_path)
    else:  # unreachable behind schema validation
        raise ConfigInvalid(f"unknown mode {config.mode!r}")
    return Report(
        mode=config.mode,
        label=config.label,
        rows=tuple(rows),
        curves=tuple(curves),
        failures=tuple(failures),
        pass_rules=tuple(pass_rules),
        provenance=_provenance(config.doc),
    )


def default_validate_config(seed: int = 0, strict: bool = False) -> dict:
    """Benchmark-style validation over every material row."""
    return {
        "version": 1,
        "mode": "validate",
        "seed": seed,
        "strict": strict,
        "cases": [
            {"material": m, "n_videos": DEFAULT_CASE_COUNTS[m]} for m in MATERIAL_ROWS
        ],
    }


# ---------------------------------------------------------------------------
# table emission


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(rows: list[list]) -> str:
    return "".join(",".join(_fmt(c) for c in row) + "\n" for row in rows)


def metrics_summary_csv(report: Report) -> str:
    """One row per scenario: the MetricSummary serialization."""
    rows = [r for r in report.rows if "scenario" in r]
    if not rows:
        raise EmptyReport("no metric rows in report")
    out = [["scenario", "mean_miou", "mean_bg_rmse", "n_videos"]]
    for r in rows:
        out.append([r["scenario"], r["mean_miou"], r["mean_bg_rmse"], r["n_videos"]])
    return _csv(out)


def emit_table(report: Report, style: str, scenario: str | None = None) -> str:
    """Render a report section as CSV (comma, dot decimal, LF)."""
    if style == "param_table":
        rows = [r for r in report.rows if "material" in r]
        if not rows:
            raise EmptyReport("no parameter rows in report")
        out = [["material", "n", "mean", "std", "gt_low", "gt_high", "in_range"]]
        for r in rows:
            out.append(
                [r["material"], r["n"], r["mean"], r["std"], r["gt_low"], r["gt_high"], r["in_range"]]
            )
        return _csv(out)
    if style == "miou_table":
        rows = [r for r in report.rows if "scenario" in r]
        if not rows:
            raise EmptyReport("no metric rows in report")
        by_name = {r["scenario"]: r for r in rows}
        names = [n for n in SCENARIO_NAMES if n in by_name]
        names += [r["scenario"] for r in rows if r["scenario"] not in names]
        header = ["label"] + names + ["Avg."]
        mious = [by_name[n]["mean_miou"] for n in names]
        defined = [m for m in mious if m is not None]
        avg = float(np.mean(defined)) if defined else None
        return _csv([header, [report.label] + mious + [avg]])
    if style == "over_time":
        if not report.curves:
            raise EmptyReport("no over-time curves in report")
        if scenario is None:
            curve = report.curves[0]
        else:
            match = [c for c in report.curves if c["scenario"] == scenario]
            if not match:
                raise EmptyReport(f"no curve for scenario {scenario!r}")
            curve = match[0]
        out = [["frame_index", "mean", "std"]]
        for pt in curve["curve"]:
            if pt["n"] > 0:
                out.append([pt["frame_index"], pt["mean"], pt["std"]])
        return _csv(out)
    raise ConfigInvalid(f"unknown table style {style!r}")
