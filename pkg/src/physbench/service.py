"""HTTP service exposing the toolkit.

Every estimation and scoring operation is reachable as a JSON endpoint so
long-running deployments can serve many clients; the bundled CLI talks to
this app in-process by default. Handlers stay thin: they decode pydantic
payloads, call the core, and map domain errors onto HTTP statuses
(ConfigInvalid -> 400, InputMissing -> 404, other domain errors -> 422).
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .camera import (
    CameraExtrinsics,
    CameraIntrinsics,
    CheckerboardSpec,
    CornerSet,
    calibrate_intrinsics,
    estimate_pose,
    extrinsics_to_dict,
    lift_planar,
    project,
)
from .errors import ConfigInvalid, InputMissing, PhysbenchError
from .fitting import fit_poly
from .masks import decode_rle
from .metrics import frame_miou
from .params import ExperimentSpec, friction_from_track, gravity_from_track, viscosity_from_track
from .pipeline import PipelineConfig, Report, config_schema, emit_table, metrics_summary_csv, run
from .presets import SCENARIO_NAMES, material_scenario, sample_scenario
from .synth import build_bundle, scenario_from_dict, scenario_to_dict
from .tracks import Sample3D, Track3D

app = FastAPI(title="physbench", version=__version__)


@app.exception_handler(PhysbenchError)
async def _domain_error(request: Request, exc: PhysbenchError):
    status = 422
    if isinstance(exc, ConfigInvalid):
        status = 400
    elif isinstance(exc, InputMissing):
        status = 404
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "message": str(exc)},
    )


class BoardModel(BaseModel):
    inner_rows: int
    inner_cols: int
    square_size_m: float

    def to_core(self) -> CheckerboardSpec:
        return CheckerboardSpec(self.inner_rows, self.inner_cols, self.square_size_m)


class CornerSetModel(BaseModel):
    image_id: str
    points: list[tuple[float, float]]

    def to_core(self) -> CornerSet:
        return CornerSet(self.image_id, np.array(self.points, dtype=float))


class IntrinsicsModel(BaseModel):
    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0

    def to_core(self) -> CameraIntrinsics:
        return CameraIntrinsics(self.fx, self.fy, self.cx, self.cy, self.skew)

    @classmethod
    def from_core(cls, intr: CameraIntrinsics) -> "IntrinsicsModel":
        return cls(fx=intr.fx, fy=intr.fy, cx=intr.cx, cy=intr.cy, skew=intr.skew)


class ExtrinsicsModel(BaseModel):
    rotation: list[list[float]]
    translation: list[float]

    def to_core(self) -> CameraExtrinsics:
        return CameraExtrinsics(np.array(self.rotation), np.array(self.translation))

    @classmethod
    def from_core(cls, extr: CameraExtrinsics) -> "ExtrinsicsModel":
        d = extrinsics_to_dict(extr)
        return cls(rotation=d["rotation"], translation=d["translation"])


class HealthResponse(BaseModel):
    status: str
    version: str


@app.get("/healthz", response_model=HealthResponse)
def healthz() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/config/schema")
def get_config_schema() -> dict:
    return config_schema()


class CalibrateRequest(BaseModel):
    views: list[CornerSetModel]
    board: BoardModel


class CalibrateResponse(BaseModel):
    intrinsics: IntrinsicsModel
    mean_reproj_px: float
    init_mean_reproj_px: float
    n_views: int


@app.post("/calibrate", response_model=CalibrateResponse)
def post_calibrate(req: CalibrateRequest) -> CalibrateResponse:
    result = calibrate_intrinsics([v.to_core() for v in req.views], req.board.to_core())
    return CalibrateResponse(
        intrinsics=IntrinsicsModel.from_core(result.intrinsics),
        mean_reproj_px=result.mean_reproj_px,
        init_mean_reproj_px=result.init_mean_reproj_px,
        n_views=result.n_views,
    )


class PoseRequest(BaseModel):
    corners: CornerSetModel
    board: BoardModel
    intrinsics: IntrinsicsModel


class PoseResponse(BaseModel):
    extrinsics: ExtrinsicsModel
    reproj_rms_px: float


@app.post("/pose", response_model=PoseResponse)
def post_pose(req: PoseRequest) -> PoseResponse:
    result = estimate_pose(req.corners.to_core(), req.board.to_core(), req.intrinsics.to_core())
    return PoseResponse(
        extrinsics=ExtrinsicsModel.from_core(result.extrinsics),
        reproj_rms_px=result.reproj_rms_px,
    )


class ProjectRequest(BaseModel):
    point: tuple[float, float, float]
    intrinsics: IntrinsicsModel
    extrinsics: ExtrinsicsModel


@app.post("/project")
def post_project(req: ProjectRequest) -> dict:
    u, v = project(req.point, req.intrinsics.to_core(), req.extrinsics.to_core())
    return {"pixel": [u, v]}


class LiftRequest(BaseModel):
    pixel: tuple[float, float]
    depth_m: float
    intrinsics: IntrinsicsModel
    extrinsics: ExtrinsicsModel | None = None


@app.post("/lift")
def post_lift(req: LiftRequest) -> dict:
    extr = req.extrinsics.to_core() if req.extrinsics is not None else None
    p = lift_planar(req.pixel, req.depth_m, req.intrinsics.to_core(), extr)
    return {"point": [float(x) for x in p]}


class FitRequest(BaseModel):
    samples: list[tuple[float, float]]
    degree: Literal[1, 2]
    robust: bool = False


class FitResponse(BaseModel):
    degree: int
    coeffs: list[float]
    residual_rms: float
    n_samples: int
    t_span: float


@app.post("/fit", response_model=FitResponse)
def post_fit(req: FitRequest) -> FitResponse:
    fit = fit_poly(req.samples, degree=req.degree, robust=req.robust)
    return FitResponse(
        degree=fit.degree,
        coeffs=list(fit.coeffs),
        residual_rms=fit.residual_rms,
        n_samples=fit.n_samples,
        t_span=fit.t_span,
    )


class TrackModel(BaseModel):
    object_id: str = "object"
    samples: list[tuple[float, float, float, float]]  # (t, x, y, z)

    def to_core(self) -> Track3D:
        return Track3D(
            self.object_id,
            tuple(Sample3D(t, x, y, z) for t, x, y, z in self.samples),
        )


class EstimateRequest(BaseModel):
    kind: Literal[
        "gravity_freefall", "gravity_parabolic", "friction_incline", "viscosity_settling"
    ]
    track: TrackModel
    theta: float | None = None
    r: float | None = None
    rho_s: float | None = None
    rho_f: float | None = None
    g_ref: float = 9.81
    up_axis: str = "-y"
    terminal_threshold: float = 0.05
    force_terminal: bool = False


class EstimateResponse(BaseModel):
    kind: str
    value: float
    unit: str
    details: dict


@app.post("/estimate", response_model=EstimateResponse)
def post_estimate(req: EstimateRequest) -> EstimateResponse:
    spec = ExperimentSpec(
        kind=req.kind,
        theta=req.theta,
        r=req.r,
        rho_s=req.rho_s,
        rho_f=req.rho_f,
        g_ref=req.g_ref,
        up_axis=req.up_axis,
        terminal_threshold=req.terminal_threshold,
    )
    track = req.track.to_core()
    if req.kind in ("gravity_freefall", "gravity_parabolic"):
        est = gravity_from_track(track, spec)
        return EstimateResponse(
            kind=req.kind, value=est.g, unit="m/s^2",
            details={"horizontal_accel": est.horizontal_accel},
        )
    if req.kind == "friction_incline":
        est = friction_from_track(track, spec)
        return EstimateResponse(
            kind=req.kind, value=est.mu, unit="dimensionless",
            details={
                "accel_magnitude": est.accel_magnitude,
                "negative_friction": est.negative_friction,
            },
        )
    est = viscosity_from_track(track, spec, force=req.force_terminal)
    return EstimateResponse(
        kind=req.kind, value=est.eta, unit="Pa.s",
        details={
            "terminal_velocity": est.terminal_velocity,
            "quad_over_linear_gain": est.diagnostics.quad_over_linear_gain,
            "velocity_change_ratio": est.diagnostics.velocity_change_ratio,
        },
    )


class FrameMiouRequest(BaseModel):
    width: int
    height: int
    gt: dict[str, list[int]]
    pred: dict[str, list[int]]


@app.post("/metrics/frame")
def post_frame_miou(req: FrameMiouRequest) -> dict:
    gt = {k: decode_rle(v, req.width, req.height) for k, v in req.gt.items()}
    pred = {k: decode_rle(v, req.width, req.height) for k, v in req.pred.items()}
    result = frame_miou(gt, pred)
    return {"miou": result.miou, "per_object": result.per_object}


class SimulateRequest(BaseModel):
    scenario: dict | None = None
    preset: str | None = None
    material: str | None = None
    seed: int = 0
    noise_px: float = 0.5
    with_masks: bool = True


@app.post("/simulate")
def post_simulate(req: SimulateRequest) -> dict:
    if req.scenario is not None:
        cfg = scenario_from_dict(req.scenario)
    elif req.preset is not None:
        if req.preset not in SCENARIO_NAMES:
            raise ConfigInvalid(f"unknown preset {req.preset!r}")
        cfg = sample_scenario(req.preset, req.seed)
    elif req.material is not None:
        cfg = material_scenario(req.material, req.seed, noise_px=req.noise_px)
    else:
        raise ConfigInvalid("provide one of scenario / preset / material")
    bundle = build_bundle(cfg, with_masks=req.with_masks)
    doc = {
        "scenario": scenario_to_dict(cfg),
        "truth": bundle.truth,
        "meta": {
            "width": bundle.meta.width,
            "height": bundle.meta.height,
            "fps": bundle.meta.fps,
            "frame_count": bundle.meta.frame_count,
            "depth_m": bundle.meta.depth_m,
            "trim_offset": bundle.meta.trim_offset,
        },
        "corners": [[float(u), float(v)] for u, v in bundle.corners.points],
        "tracks_3d": {
            oid: [[s.t, s.x, s.y, s.z] for s in tr.samples]
            for oid, tr in bundle.tracks_3d.items()
        },
    }
    if bundle.masks is not None:
        doc["masks"] = {
            oid: [list(runs) for runs in seq.frames] for oid, seq in bundle.masks.items()
        }
    return doc


class RunRequest(BaseModel):
    config: dict
    base_dir: str = "."
    out_dir: str | None = None


class RunResponse(BaseModel):
    report: dict
    tables: dict[str, str]
    all_rules_pass: bool
    n_failures: int


def _tables_for(report: Report) -> dict[str, str]:
    tables: dict[str, str] = {}
    if report.mode in ("validate", "estimate") and report.rows:
        tables["param_table"] = emit_table(report, "param_table")
    if report.mode == "metrics" and report.rows:
        tables["miou_table"] = emit_table(report, "miou_table")
        tables["metrics_summary"] = metrics_summary_csv(report)
        for c in report.curves:
            tables[f"over_time_{c['scenario']}"] = emit_table(
                report, "over_time", scenario=c["scenario"]
            )
    return tables


@app.post("/run", response_model=RunResponse)
def post_run(req: RunRequest) -> RunResponse:
    config = PipelineConfig.from_dict(req.config, base_dir=req.base_dir)
    out_dir = Path(req.out_dir) if req.out_dir else None
    report = run(config, out_dir=out_dir)
    return RunResponse(
        report=report.to_dict(),
        tables=_tables_for(report),
        all_rules_pass=report.all_rules_pass,
        n_failures=len(report.failures),
    )


class TablesRequest(BaseModel):
    report: dict
    style: Literal["param_table", "miou_table", "over_time"]
    scenario: str | None = None


@app.post("/tables")
def post_tables(req: TablesRequest) -> dict:
    report = Report(
        mode=req.report.get("mode", ""),
        label=req.report.get("label", "run"),
        rows=tuple(req.report.get("rows", [])),
        curves=tuple(req.report.get("curves", [])),
        failures=tuple(req.report.get("failures", [])),
        pass_rules=tuple(req.report.get("pass_rules", [])),
        provenance=req.report.get("provenance", {}),
    )
    return {"csv": emit_table(report, req.style, scenario=req.scenario)}
