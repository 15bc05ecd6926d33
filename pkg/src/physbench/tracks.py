"""Time-stamped object tracks assembled from per-frame masks.

Timestamps are always frame_index / fps computed per index, never
accumulated, so long sequences cannot drift. Frames with empty masks
become invalid samples; they stay in the track (the object is occluded,
not missing) and are dropped only when fitting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrameCountMismatch
from .masks import MaskSequence, centroid_from_runs, mask_pixel_count


@dataclass(frozen=True)
class VideoMeta:
    width: int
    height: int
    fps: float
    frame_count: int
    depth_m: float
    trim_offset: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.frame_count < 1:
            raise ValueError("dimensions and frame_count must be >= 1")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.depth_m <= 0:
            raise ValueError("depth_m must be positive")
        if self.trim_offset < 0:
            raise ValueError("trim_offset must be >= 0")


@dataclass(frozen=True)
class Sample2D:
    t: float
    u: float
    v: float
    valid: bool = True


@dataclass(frozen=True)
class Sample3D:
    t: float
    x: float
    y: float
    z: float
    valid: bool = True


@dataclass(frozen=True)
class Track2D:
    object_id: str
    samples: tuple[Sample2D, ...]

    def __post_init__(self):
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("timestamps must be strictly increasing")

    def valid_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = [(s.t, s.u, s.v) for s in self.samples if s.valid]
        arr = np.asarray(rows, dtype=float).reshape(-1, 3)
        return arr[:, 0], arr[:, 1], arr[:, 2]


@dataclass(frozen=True)
class Track3D:
    object_id: str
    samples: tuple[Sample3D, ...]

    def valid_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        rows = [(s.t, s.x, s.y, s.z) for s in self.samples if s.valid]
        arr = np.asarray(rows, dtype=float).reshape(-1, 4)
        return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


def track_from_masks(seq: MaskSequence, meta: VideoMeta) -> Track2D:
    """Per-frame mask centroids with t = index / fps."""
    if seq.frame_count != meta.frame_count:
        raise FrameCountMismatch(
            f"{seq.frame_count} mask frames vs meta frame_count {meta.frame_count}"
        )
    samples = []
    for i, runs in enumerate(seq.frames):
        t = i / meta.fps
        if mask_pixel_count(runs) == 0:
            samples.append(Sample2D(t, math.nan, math.nan, valid=False))
        else:
            u, v = centroid_from_runs(runs, seq.width, seq.height)
            samples.append(Sample2D(t, u, v))
    return Track2D(seq.object_id, tuple(samples))


def lift_track(track: Track2D, meta: VideoMeta, intr, extr=None) -> Track3D:
    """Lift a pixel track to metric 3D at the constant motion-plane depth."""
    from .camera import lift_planar

    out = []
    for s in track.samples:
        if not s.valid:
            out.append(Sample3D(s.t, math.nan, math.nan, math.nan, valid=False))
            continue
        p = lift_planar((s.u, s.v), meta.depth_m, intr, extr)
        out.append(Sample3D(s.t, float(p[0]), float(p[1]), float(p[2])))
    return Track3D(track.object_id, tuple(out))


def save_track2d(track: Track2D, path: str | Path) -> None:
    doc = {
        "object_id": track.object_id,
        "samples": [[s.t, s.u, s.v] for s in track.samples if s.valid],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_track2d(path: str | Path) -> Track2D:
    doc = json.loads(Path(path).read_text())
    samples = tuple(Sample2D(float(t), float(u), float(v)) for t, u, v in doc["samples"])
    return Track2D(str(doc["object_id"]), samples)


def save_tracks3d(tracks: dict[str, Track3D], path: str | Path) -> None:
    doc = {
        "objects": [
            {
                "object_id": tr.object_id,
                "samples": [[s.t, s.x, s.y, s.z] for s in tr.samples if s.valid],
            }
            for tr in tracks.values()
        ]
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_tracks3d(path: str | Path) -> dict[str, Track3D]:
    doc = json.loads(Path(path).read_text())
    out: dict[str, Track3D] = {}
    for obj in doc["objects"]:
        samples = tuple(
            Sample3D(float(t), float(x), float(y), float(z))
            for t, x, y, z in obj["samples"]
        )
        out[str(obj["object_id"])] = Track3D(str(obj["object_id"]), samples)
    return out
