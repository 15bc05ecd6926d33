"""Closed-form kinematics oracle: simulated scenes with exact ground truth.

Trajectories are analytic (no integrator), so any disagreement between a
recovered parameter and the configured truth is attributable to the
estimation pipeline alone. Scenes carry a background checkerboard for
pose recovery, objects move in a plane parallel to the image plane at a
known constant depth, and masks are rasterized with pixel centers
strictly inside the projected shape.

All randomness (corner noise, mask jitter, preset sampling) flows through
the pinned PCG32 streams, so a config is bit-reproducible everywhere.

The settling model uses the linear-drag exponential solution
v(t) = v_t (1 - exp(-t/tau)) with tau = (v_t / g) * rho_s / (rho_s - rho_f);
buoyancy enters through the density difference in v_t and added-mass
effects are neglected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .camera import (
    CameraExtrinsics,
    CameraIntrinsics,
    CheckerboardSpec,
    CornerSet,
    corner_set_to_dict,
    corner_set_from_dict,
    extrinsics_to_dict,
    intrinsics_from_dict,
    intrinsics_to_dict,
)
from .errors import BoardClipped, NeverVisible, StaticBlock
from .masks import MaskSequence, save_mask_file, load_mask_file, write_ppm, frame_filename
from .params import stokes_terminal_velocity
from .rng import Pcg32
from .tracks import Sample3D, Track2D, Sample2D, Track3D, VideoMeta, load_tracks3d, save_tracks3d

EXPERIMENT_KINDS = (
    "gravity_freefall",
    "gravity_parabolic",
    "friction_incline",
    "viscosity_settling",
)
METRIC_DEMO_KINDS = ("translating_object", "occlusion_pass")
ALL_KINDS = EXPERIMENT_KINDS + METRIC_DEMO_KINDS

# capture-rig scale defaults: slow-motion phone camera two-ish meters out
DEFAULT_INTRINSICS = CameraIntrinsics(fx=1500.0, fy=1500.0, cx=960.0, cy=540.0)
DEFAULT_BOARD = CheckerboardSpec(inner_rows=7, inner_cols=10, square_size=0.02)

_CORNER_STREAM = 1
_OBJECT_STREAM_BASE = 16
_PRESET_STREAM = 0


@dataclass(frozen=True)
class ObjectSpec:
    object_id: str
    shape: str  # "disk" (size_m = radius) or "square" (size_m = side)
    size_m: float
    x0: float = 0.0
    y0: float = 0.0
    vx0: float = 0.0
    vy0: float = 0.0
    vz0: float = 0.0
    color: tuple[int, int, int] = (200, 60, 40)

    def __post_init__(self):
        if self.shape not in ("disk", "square"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.size_m <= 0:
            raise ValueError("size_m must be positive")


@dataclass(frozen=True)
class OccluderRect:
    u_min: int
    v_min: int
    u_max: int
    v_max: int
    color: tuple[int, int, int] = (40, 40, 40)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    kind: str
    true_params: dict
    width: int
    height: int
    fps: float
    frame_count: int
    depth_m: float
    seed: int
    objects: tuple[ObjectSpec, ...]
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS
    board: CheckerboardSpec = DEFAULT_BOARD
    board_depth_m: float | None = None  # defaults to depth_m + 0.5
    camera_roll_deg: float = 0.0
    noise_px: float = 0.0
    occluders: tuple[OccluderRect, ...] = ()
    trim_frames: int | None = None  # None = kind-specific default
    conditioning_frames: int = 9
    background_color: tuple[int, int, int] = (245, 245, 245)

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.noise_px < 0:
            raise ValueError("noise_px must be >= 0")
        if self.frame_count < 8:
            raise ValueError("frame_count must be >= 8")
        if self.depth_m <= 0:
            raise ValueError("depth_m must be positive")
        if not self.objects:
            raise ValueError("need at least one object")
        if self.kind == "friction_incline":
            mu, theta = self.true_params["mu"], self.true_params["theta"]
            if mu >= math.tan(theta):
                raise StaticBlock(f"mu={mu} >= tan(theta)={math.tan(theta):.4g}")
        if self.kind == "viscosity_settling":
            if self.true_params["rho_s"] <= self.true_params["rho_f"]:
                raise ValueError("settling needs rho_s > rho_f")

    @property
    def g(self) -> float:
        return float(self.true_params.get("g", 9.81))

    def board_depth(self) -> float:
        return self.board_depth_m if self.board_depth_m is not None else self.depth_m + 0.5

    def extrinsics(self) -> CameraExtrinsics:
        """World (board) to camera: roll about the optical axis, board centered."""
        phi = math.radians(self.camera_roll_deg)
        R = np.array(
            [
                [math.cos(phi), -math.sin(phi), 0.0],
                [math.sin(phi), math.cos(phi), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        bc = np.array(
            [
                (self.board.inner_cols - 1) * self.board.square_size / 2.0,
                (self.board.inner_rows - 1) * self.board.square_size / 2.0,
                0.0,
            ]
        )
        t = np.array([0.0, 0.0, self.board_depth()]) - R @ bc
        return CameraExtrinsics(R, t)

    def plane_world_z(self) -> float:
        # camera depth of a world point is z_w + board_depth under a roll-only pose
        return self.depth_m - self.board_depth()

    def default_trim(self) -> int:
        if self.trim_frames is not None:
            return self.trim_frames
        if self.kind == "viscosity_settling":
            tau = self._settling()[1]
            return int(math.ceil(5.0 * tau * self.fps))
        return 0

    def _settling(self) -> tuple[float, float]:
        p = self.true_params
        v_t = stokes_terminal_velocity(p["r"], p["rho_s"], p["rho_f"], self.g, p["eta"])
        tau = v_t / self.g * p["rho_s"] / (p["rho_s"] - p["rho_f"])
        return v_t, tau

    def world_at_pixel(self, u: float, v: float) -> tuple[float, float]:
        """World (x, y) on the motion plane whose projection is (u, v)."""
        intr = self.intrinsics
        pc = np.array(
            [
                (u - intr.cx) * self.depth_m / intr.fx,
                (v - intr.cy) * self.depth_m / intr.fy,
                self.depth_m,
            ]
        )
        extr = self.extrinsics()
        pw = extr.rotation.T @ (pc - extr.translation)
        return float(pw[0]), float(pw[1])

    def speed_at_pixels_per_second(self, px_per_s: float) -> float:
        return px_per_s * self.depth_m / self.intrinsics.fx


@dataclass(frozen=True)
class SyntheticBundle:
    config: ScenarioConfig
    tracks_3d: dict[str, Track3D]
    corners: CornerSet
    meta: VideoMeta
    truth: dict
    masks: dict[str, MaskSequence] | None = None


# ---------------------------------------------------------------------------
# kinematic laws (world frame, Y down, source time ts measured from release)


def _positions(cfg: ScenarioConfig, obj: ObjectSpec, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z = np.full_like(ts, cfg.plane_world_z()) + obj.vz0 * ts
    if cfg.kind in ("gravity_freefall", "gravity_parabolic"):
        x = obj.x0 + obj.vx0 * ts
        y = obj.y0 + obj.vy0 * ts + 0.5 * cfg.g * ts * ts
    elif cfg.kind == "friction_incline":
        theta = cfg.true_params["theta"]
        mu = cfg.true_params["mu"]
        direction = float(cfg.true_params.get("direction", 1.0))
        a = cfg.g * (math.sin(theta) - mu * math.cos(theta))
        s = 0.5 * a * ts * ts
        x = obj.x0 + direction * math.cos(theta) * s
        y = obj.y0 + math.sin(theta) * s
    elif cfg.kind == "viscosity_settling":
        v_t, tau = cfg._settling()
        x = obj.x0 + np.zeros_like(ts)
        y = obj.y0 + v_t * (ts - tau * (1.0 - np.exp(-ts / tau)))
    else:  # translating_object, occlusion_pass
        x = obj.x0 + obj.vx0 * ts
        y = obj.y0 + obj.vy0 * ts
    return x, y, z


def _simulate(cfg: ScenarioConfig) -> SyntheticBundle:
    trim = cfg.default_trim()
    idx = np.arange(cfg.frame_count)
    t = idx / cfg.fps
    ts = (idx + trim) / cfg.fps
    tracks: dict[str, Track3D] = {}
    for obj in cfg.objects:
        x, y, z = _positions(cfg, obj, ts)
        samples = tuple(
            Sample3D(float(t[i]), float(x[i]), float(y[i]), float(z[i]))
            for i in range(cfg.frame_count)
        )
        tracks[obj.object_id] = Track3D(obj.object_id, samples)
    meta = VideoMeta(
        width=cfg.width,
        height=cfg.height,
        fps=cfg.fps,
        frame_count=cfg.frame_count,
        depth_m=cfg.depth_m,
        trim_offset=trim,
    )
    truth = {
        "name": cfg.name,
        "kind": cfg.kind,
        "true_params": dict(cfg.true_params),
        "seed": cfg.seed,
        "noise_px": cfg.noise_px,
        "fps": cfg.fps,
        "depth_m": cfg.depth_m,
        "trim_offset": trim,
        "conditioning_frames": cfg.conditioning_frames,
        "plane_world_z": cfg.plane_world_z(),
        "objects": [
            {
                "object_id": o.object_id,
                "shape": o.shape,
                "size_m": o.size_m,
                "x0": o.x0,
                "y0": o.y0,
                "vx0": o.vx0,
                "vy0": o.vy0,
                "vz0": o.vz0,
            }
            for o in cfg.objects
        ],
        "camera": {
            "intrinsics": intrinsics_to_dict(cfg.intrinsics),
            "extrinsics": extrinsics_to_dict(cfg.extrinsics()),
        },
    }
    return SyntheticBundle(
        config=cfg, tracks_3d=tracks, corners=gen_corners(cfg), meta=meta, truth=truth
    )


def simulate(cfg: ScenarioConfig) -> SyntheticBundle:
    return _simulate(cfg)


def simulate_freefall(cfg: ScenarioConfig) -> SyntheticBundle:
    if cfg.kind != "gravity_freefall":
        raise ValueError("config kind must be gravity_freefall")
    return _simulate(cfg)


def simulate_parabolic(cfg: ScenarioConfig) -> SyntheticBundle:
    if cfg.kind != "gravity_parabolic":
        raise ValueError("config kind must be gravity_parabolic")
    return _simulate(cfg)


def simulate_incline(cfg: ScenarioConfig) -> SyntheticBundle:
    if cfg.kind != "friction_incline":
        raise ValueError("config kind must be friction_incline")
    return _simulate(cfg)


def simulate_settling(cfg: ScenarioConfig) -> SyntheticBundle:
    if cfg.kind != "viscosity_settling":
        raise ValueError("config kind must be viscosity_settling")
    return _simulate(cfg)


# ---------------------------------------------------------------------------
# corner generation


def gen_corners(cfg: ScenarioConfig) -> CornerSet:
    """Project the board's inner corners, with seeded Gaussian pixel noise."""
    extr = cfg.extrinsics()
    intr = cfg.intrinsics
    pts = cfg.board.object_points()
    pc = pts @ extr.rotation.T + extr.translation
    u = intr.fx * pc[:, 0] / pc[:, 2] + intr.cx
    v = intr.fy * pc[:, 1] / pc[:, 2] + intr.cy
    if u.min() < 0 or u.max() >= cfg.width or v.min() < 0 or v.max() >= cfg.height:
        raise BoardClipped(
            f"board corners span u [{u.min():.1f}, {u.max():.1f}], "
            f"v [{v.min():.1f}, {v.max():.1f}] outside {cfg.width}x{cfg.height}"
        )
    uv = np.column_stack([u, v])
    if cfg.noise_px > 0:
        rng = Pcg32(cfg.seed, stream=_CORNER_STREAM)
        noise = np.array(rng.normals(uv.size, 0.0, cfg.noise_px)).reshape(uv.shape)
        uv = uv + noise
    return CornerSet(f"{cfg.name}_board", uv)


# ---------------------------------------------------------------------------
# rasterization


def _merge_intervals(rows: np.ndarray, los: np.ndarray, his: np.ndarray, width: int):
    starts = rows.astype(np.int64) * width + los
    ends = rows.astype(np.int64) * width + his + 1
    if len(starts) > 1:
        keep = starts[1:] != ends[:-1]
        seg_start = np.concatenate(([True], keep))
        seg_end = np.concatenate((keep, [True]))
        starts = starts[seg_start]
        ends = ends[seg_end]
    return starts, ends


def _runs_from_intervals(starts: np.ndarray, ends: np.ndarray, total: int) -> tuple[int, ...]:
    if len(starts) == 0:
        return (total,)
    runs = [int(starts[0])]
    for i in range(len(starts)):
        runs.append(int(ends[i] - starts[i]))
        nxt = int(starts[i + 1]) if i + 1 < len(starts) else total
        gap = nxt - int(ends[i])
        if gap > 0 or i + 1 < len(starts):
            runs.append(gap)
    if runs[-1] == 0:
        runs.pop()
    return tuple(runs)


def _rasterize_shape(
    u0: float, v0: float, hu: float, hv: float, shape: str, width: int, height: int,
    occluders: tuple[OccluderRect, ...],
) -> tuple[tuple[int, ...], bool]:
    """Runs for one frame; second value reports in-frame visibility."""
    v_lo = int(math.floor(v0 - hv)) + 1
    v_hi = int(math.ceil(v0 + hv)) - 1
    visible = v_lo <= v_hi and v0 - hv < height and v0 + hv > 0 and u0 - hu < width and u0 + hu > 0
    v_lo_c = max(v_lo, 0)
    v_hi_c = min(v_hi, height - 1)
    total = width * height
    if v_lo_c > v_hi_c:
        return (total,), visible
    rows = np.arange(v_lo_c, v_hi_c + 1)
    if shape == "disk":
        dy = (rows - v0) / hv
        w = hu * np.sqrt(np.maximum(0.0, 1.0 - dy * dy))
    else:
        w = np.full(rows.shape, hu)
    c_lo = np.floor(u0 - w).astype(np.int64) + 1
    c_hi = np.ceil(u0 + w).astype(np.int64) - 1
    np.clip(c_lo, 0, width - 1, out=c_lo)
    np.clip(c_hi, 0, width - 1, out=c_hi)
    # disk rows at |dy| ~ 1 can produce inverted intervals; drop them
    ok = c_lo <= c_hi
    if shape == "disk":
        ok &= np.abs(rows - v0) < hv
    ok &= (u0 - w < width) & (u0 + w > 0)
    rows, c_lo, c_hi = rows[ok], c_lo[ok], c_hi[ok]
    if occluders:
        out_r, out_l, out_h = [], [], []
        for r, lo, hi in zip(rows.tolist(), c_lo.tolist(), c_hi.tolist()):
            pieces = [(lo, hi)]
            for occ in occluders:
                if not (occ.v_min <= r <= occ.v_max):
                    continue
                nxt = []
                for a, b in pieces:
                    if occ.u_max < a or occ.u_min > b:
                        nxt.append((a, b))
                        continue
                    if a < occ.u_min:
                        nxt.append((a, occ.u_min - 1))
                    if b > occ.u_max:
                        nxt.append((occ.u_max + 1, b))
                pieces = nxt
            for a, b in pieces:
                out_r.append(r)
                out_l.append(a)
                out_h.append(b)
        rows = np.array(out_r, dtype=np.int64)
        c_lo = np.array(out_l, dtype=np.int64)
        c_hi = np.array(out_h, dtype=np.int64)
    if len(rows) == 0:
        return (total,), visible
    starts, ends = _merge_intervals(rows, c_lo, c_hi, width)
    return _runs_from_intervals(starts, ends, total), visible


def _camera_points(cfg: ScenarioConfig, track: Track3D) -> np.ndarray:
    extr = cfg.extrinsics()
    pts = np.array([[s.x, s.y, s.z] for s in track.samples])
    return pts @ extr.rotation.T + extr.translation


def rasterize_masks(bundle: SyntheticBundle, cfg: ScenarioConfig | None = None) -> dict[str, MaskSequence]:
    """Per-frame masks for every object; pixel centers strictly inside count."""
    cfg = cfg or bundle.config
    intr = cfg.intrinsics
    out: dict[str, MaskSequence] = {}
    for k, obj in enumerate(cfg.objects):
        track = bundle.tracks_3d[obj.object_id]
        pc = _camera_points(cfg, track)
        rng = Pcg32(cfg.seed, stream=_OBJECT_STREAM_BASE + k) if cfg.noise_px > 0 else None
        frames = []
        visible_count = 0
        half = obj.size_m if obj.shape == "disk" else obj.size_m / 2.0
        for i in range(cfg.frame_count):
            z = pc[i, 2]
            u0 = intr.fx * pc[i, 0] / z + intr.cx
            v0 = intr.fy * pc[i, 1] / z + intr.cy
            if rng is not None:
                u0 += rng.normal(0.0, cfg.noise_px)
                v0 += rng.normal(0.0, cfg.noise_px)
            hu = intr.fx * half / z
            hv = intr.fy * half / z
            runs, visible = _rasterize_shape(
                u0, v0, hu, hv, obj.shape, cfg.width, cfg.height, cfg.occluders
            )
            visible_count += visible
            frames.append(runs)
        if visible_count < cfg.frame_count / 2:
            raise NeverVisible(
                f"{obj.object_id}: in frame for {visible_count}/{cfg.frame_count} frames"
            )
        out[obj.object_id] = MaskSequence(
            object_id=obj.object_id,
            width=cfg.width,
            height=cfg.height,
            fps=cfg.fps,
            frames=tuple(frames),
        )
    return out


def noisy_track2d(bundle: SyntheticBundle, cfg: ScenarioConfig | None = None) -> dict[str, Track2D]:
    """Projected centers with the same seeded jitter the rasterizer applies.

    Mask-free stand-in for centroid tracks when rasterization cost is not
    wanted; pixel quantization is absent, jitter statistics match.
    """
    cfg = cfg or bundle.config
    intr = cfg.intrinsics
    out: dict[str, Track2D] = {}
    for k, obj in enumerate(cfg.objects):
        track = bundle.tracks_3d[obj.object_id]
        pc = _camera_points(cfg, track)
        rng = Pcg32(cfg.seed, stream=_OBJECT_STREAM_BASE + k) if cfg.noise_px > 0 else None
        samples = []
        for i, s in enumerate(track.samples):
            z = pc[i, 2]
            u = intr.fx * pc[i, 0] / z + intr.cx
            v = intr.fy * pc[i, 1] / z + intr.cy
            if rng is not None:
                u += rng.normal(0.0, cfg.noise_px)
                v += rng.normal(0.0, cfg.noise_px)
            samples.append(Sample2D(s.t, float(u), float(v)))
        out[obj.object_id] = Track2D(obj.object_id, tuple(samples))
    return out


def build_bundle(cfg: ScenarioConfig, with_masks: bool = True) -> SyntheticBundle:
    bundle = _simulate(cfg)
    if with_masks:
        return replace(bundle, masks=rasterize_masks(bundle, cfg))
    return bundle


# ---------------------------------------------------------------------------
# flat-color frame rendering (for background RMSE and segmenter stubs)


def render_frames(bundle: SyntheticBundle) -> list[np.ndarray]:
    cfg = bundle.config
    if bundle.masks is None:
        raise ValueError("rasterize masks before rendering frames")
    from .masks import decode_rle

    frames = []
    for i in range(cfg.frame_count):
        img = np.empty((cfg.height, cfg.width, 3), dtype=np.uint8)
        img[:, :] = cfg.background_color
        for obj in cfg.objects:
            seq = bundle.masks[obj.object_id]
            m = decode_rle(seq.frames[i], seq.width, seq.height)
            img[m] = obj.color
        for occ in cfg.occluders:
            img[occ.v_min : occ.v_max + 1, occ.u_min : occ.u_max + 1] = occ.color
        frames.append(img)
    return frames


# ---------------------------------------------------------------------------
# bundle directory I/O


def _scenario_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "name": cfg.name,
        "kind": cfg.kind,
        "true_params": dict(cfg.true_params),
        "width": cfg.width,
        "height": cfg.height,
        "fps": cfg.fps,
        "frame_count": cfg.frame_count,
        "depth_m": cfg.depth_m,
        "seed": cfg.seed,
        "noise_px": cfg.noise_px,
        "intrinsics": intrinsics_to_dict(cfg.intrinsics),
        "board": {
            "inner_rows": cfg.board.inner_rows,
            "inner_cols": cfg.board.inner_cols,
            "square_size_m": cfg.board.square_size,
        },
        "board_depth_m": cfg.board_depth_m,
        "camera_roll_deg": cfg.camera_roll_deg,
        "objects": [
            {
                "object_id": o.object_id,
                "shape": o.shape,
                "size_m": o.size_m,
                "x0": o.x0,
                "y0": o.y0,
                "vx0": o.vx0,
                "vy0": o.vy0,
                "vz0": o.vz0,
                "color": list(o.color),
            }
            for o in cfg.objects
        ],
        "occluders": [
            {"u_min": o.u_min, "v_min": o.v_min, "u_max": o.u_max, "v_max": o.v_max,
             "color": list(o.color)}
            for o in cfg.occluders
        ],
        "trim_frames": cfg.trim_frames,
        "conditioning_frames": cfg.conditioning_frames,
        "background_color": list(cfg.background_color),
    }


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    return _scenario_to_dict(cfg)


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    return ScenarioConfig(
        name=str(doc["name"]),
        kind=str(doc["kind"]),
        true_params=dict(doc["true_params"]),
        width=int(doc["width"]),
        height=int(doc["height"]),
        fps=float(doc["fps"]),
        frame_count=int(doc["frame_count"]),
        depth_m=float(doc["depth_m"]),
        seed=int(doc["seed"]),
        noise_px=float(doc.get("noise_px", 0.0)),
        intrinsics=intrinsics_from_dict(doc["intrinsics"]) if "intrinsics" in doc else DEFAULT_INTRINSICS,
        board=CheckerboardSpec(
            inner_rows=int(doc["board"]["inner_rows"]),
            inner_cols=int(doc["board"]["inner_cols"]),
            square_size=float(doc["board"]["square_size_m"]),
        ) if "board" in doc else DEFAULT_BOARD,
        board_depth_m=doc.get("board_depth_m"),
        camera_roll_deg=float(doc.get("camera_roll_deg", 0.0)),
        objects=tuple(
            ObjectSpec(
                object_id=str(o["object_id"]),
                shape=str(o["shape"]),
                size_m=float(o["size_m"]),
                x0=float(o.get("x0", 0.0)),
                y0=float(o.get("y0", 0.0)),
                vx0=float(o.get("vx0", 0.0)),
                vy0=float(o.get("vy0", 0.0)),
                vz0=float(o.get("vz0", 0.0)),
                color=tuple(o.get("color", (200, 60, 40))),
            )
            for o in doc["objects"]
        ),
        occluders=tuple(
            OccluderRect(
                u_min=int(o["u_min"]), v_min=int(o["v_min"]),
                u_max=int(o["u_max"]), v_max=int(o["v_max"]),
                color=tuple(o.get("color", (40, 40, 40))),
            )
            for o in doc.get("occluders", [])
        ),
        trim_frames=doc.get("trim_frames"),
        conditioning_frames=int(doc.get("conditioning_frames", 9)),
        background_color=tuple(doc.get("background_color", (245, 245, 245))),
    )


def write_bundle(bundle: SyntheticBundle, out_dir: str | Path, frames: bool = False) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = bundle.config
    meta_doc = {
        "width": bundle.meta.width,
        "height": bundle.meta.height,
        "fps": bundle.meta.fps,
        "frame_count": bundle.meta.frame_count,
        "depth_m": bundle.meta.depth_m,
        "trim_offset": bundle.meta.trim_offset,
    }
    (out / "meta.json").write_text(json.dumps(meta_doc, sort_keys=True) + "\n")
    (out / "corners.json").write_text(
        json.dumps(corner_set_to_dict(bundle.corners, cfg.board), sort_keys=True) + "\n"
    )
    save_tracks3d(bundle.tracks_3d, out / "track3d.json")
    truth = dict(bundle.truth)
    truth["scenario"] = _scenario_to_dict(cfg)
    (out / "truth.json").write_text(json.dumps(truth, sort_keys=True) + "\n")
    if bundle.masks is not None:
        mask_dir = out / "masks"
        mask_dir.mkdir(exist_ok=True)
        for oid, seq in bundle.masks.items():
            save_mask_file(seq, mask_dir / f"{oid}.json")
    if frames:
        frame_dir = out / "frames"
        frame_dir.mkdir(exist_ok=True)
        for i, img in enumerate(render_frames(bundle)):
            write_ppm(frame_dir / frame_filename(i), img)
    return out


def read_bundle(path: str | Path) -> SyntheticBundle:
    root = Path(path)
    truth = json.loads((root / "truth.json").read_text())
    cfg = scenario_from_dict(truth["scenario"])
    meta_doc = json.loads((root / "meta.json").read_text())
    meta = VideoMeta(
        width=int(meta_doc["width"]),
        height=int(meta_doc["height"]),
        fps=float(meta_doc["fps"]),
        frame_count=int(meta_doc["frame_count"]),
        depth_m=float(meta_doc["depth_m"]),
        trim_offset=int(meta_doc["trim_offset"]),
    )
    corners, _board = corner_set_from_dict(json.loads((root / "corners.json").read_text()))
    tracks = load_tracks3d(root / "track3d.json")
    masks = None
    mask_dir = root / "masks"
    if mask_dir.is_dir():
        masks = {}
        for f in sorted(mask_dir.glob("*.json")):
            seq = load_mask_file(f)
            masks[seq.object_id] = seq
    truth_clean = {k: v for k, v in truth.items() if k != "scenario"}
    return SyntheticBundle(
        config=cfg, tracks_3d=tracks, corners=corners, meta=meta, truth=truth_clean, masks=masks
    )
