"""Foreground mIoU and background RMSE between ground truth and prediction.

Per frame, IoU is computed per object and averaged over objects; frames
where an object is empty in both sequences exclude that object, and a
frame with no remaining objects contributes no mIoU entry at all. This
keeps occluded stretches from rewarding or punishing a prediction.
Aggregation order is objects -> frames -> videos.

RGB frames are 8-bit and scaled to [0, 1] by dividing by 255 exactly; the
background is the complement of the union of ground-truth object masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyBackground, EmptyInput, FrameCountMismatch, IdMismatch
from .masks import MaskSequence, decode_rle


@dataclass(frozen=True)
class FrameMiou:
    miou: float | None
    per_object: dict[str, float | None]


@dataclass(frozen=True)
class MetricSeries:
    per_frame_miou: tuple[float | None, ...]
    per_frame_bg_rmse: tuple[float, ...] | None
    frame_count: int

    def mean_miou(self) -> float | None:
        vals = [v for v in self.per_frame_miou if v is not None]
        return float(np.mean(vals)) if vals else None

    def mean_bg_rmse(self) -> float | None:
        if self.per_frame_bg_rmse is None:
            return None
        return float(np.mean(self.per_frame_bg_rmse))


@dataclass(frozen=True)
class MetricSummary:
    scenario: str
    mean_miou: float | None
    mean_bg_rmse: float | None
    n_videos: int
    miou_vs_frame: tuple[tuple[float, float, int], ...]  # (mean, std, n) per frame index


def _iou(gt: np.ndarray, pred: np.ndarray) -> float | None:
    gt_any = bool(gt.any())
    pred_any = bool(pred.any())
    if not gt_any and not pred_any:
        return None  # excluded pair
    if not gt_any or not pred_any:
        return 0.0
    inter = np.count_nonzero(gt & pred)
    union = np.count_nonzero(gt | pred)
    return inter / union


def frame_miou(
    gt_masks: Mapping[str, np.ndarray], pred_masks: Mapping[str, np.ndarray]
) -> FrameMiou:
    """Mean IoU over matched objects for one frame."""
    if set(gt_masks) != set(pred_masks):
        raise IdMismatch(
            f"gt ids {sorted(gt_masks)} vs pred ids {sorted(pred_masks)}"
        )
    per_object: dict[str, float | None] = {}
    included = []
    for oid in sorted(gt_masks):
        g = np.asarray(gt_masks[oid], dtype=bool)
        p = np.asarray(pred_masks[oid], dtype=bool)
        if g.shape != p.shape:
            raise DimensionMismatch(f"object {oid}: {g.shape} vs {p.shape}")
        iou = _iou(g, p)
        per_object[oid] = iou
        if iou is not None:
            included.append(iou)
    miou = float(np.mean(included)) if included else None
    return FrameMiou(miou=miou, per_object=per_object)


def _to_unit_rgb(frame: np.ndarray) -> np.ndarray:
    arr = np.asarray(frame)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionMismatch(f"expected (H, W, 3) frame, got {arr.shape}")
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    arr = arr.astype(np.float64)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("float frames must already be scaled to [0, 1]")
    return arr


def background_rmse(
    gt_frame: np.ndarray,
    pred_frame: np.ndarray,
    gt_masks: Sequence[np.ndarray],
) -> float:
    """RMSE over all channels of pixels outside every ground-truth mask."""
    gt = _to_unit_rgb(gt_frame)
    pred = _to_unit_rgb(pred_frame)
    if gt.shape != pred.shape:
        raise DimensionMismatch(f"{gt.shape} vs {pred.shape}")
    fg = np.zeros(gt.shape[:2], dtype=bool)
    for m in gt_masks:
        m = np.asarray(m, dtype=bool)
        if m.shape != gt.shape[:2]:
            raise DimensionMismatch(f"mask {m.shape} vs frame {gt.shape[:2]}")
        fg |= m
    bg = ~fg
    if not bg.any():
        raise EmptyBackground("ground-truth masks cover every pixel")
    diff = gt[bg] - pred[bg]
    return float(np.sqrt(np.mean(diff**2)))


def sequence_metrics(
    gt_masks: Mapping[str, MaskSequence],
    pred_masks: Mapping[str, MaskSequence],
    gt_frames: Sequence[np.ndarray] | None = None,
    pred_frames: Sequence[np.ndarray] | None = None,
) -> MetricSeries:
    """Per-frame mIoU (and background RMSE when frames are supplied)."""
    if set(gt_masks) != set(pred_masks):
        raise IdMismatch(f"{sorted(gt_masks)} vs {sorted(pred_masks)}")
    counts = {s.frame_count for s in gt_masks.values()} | {
        s.frame_count for s in pred_masks.values()
    }
    if len(counts) != 1:
        raise FrameCountMismatch(f"mixed frame counts {sorted(counts)}")
    n_frames = counts.pop()
    if gt_frames is not None or pred_frames is not None:
        if gt_frames is None or pred_frames is None:
            raise ValueError("supply both gt_frames and pred_frames or neither")
        if len(gt_frames) != n_frames or len(pred_frames) != n_frames:
            raise FrameCountMismatch("frame image count does not match mask frames")
    mious: list[float | None] = []
    rmses: list[float] = []
    for i in range(n_frames):
        gt_decoded = {
            oid: decode_rle(seq.frames[i], seq.width, seq.height)
            for oid, seq in gt_masks.items()
        }
        pred_decoded = {
            oid: decode_rle(seq.frames[i], seq.width, seq.height)
            for oid, seq in pred_masks.items()
        }
        mious.append(frame_miou(gt_decoded, pred_decoded).miou)
        if gt_frames is not None:
            rmses.append(
                background_rmse(gt_frames[i], pred_frames[i], list(gt_decoded.values()))
            )
    return MetricSeries(
        per_frame_miou=tuple(mious),
        per_frame_bg_rmse=tuple(rmses) if gt_frames is not None else None,
        frame_count=n_frames,
    )


def summarize(series: Sequence[MetricSeries], scenario: str) -> MetricSummary:
    """Video-level means averaged frames-then-videos, plus the per-frame curve."""
    if not series:
        raise EmptyInput("no series to summarize")
    video_mious = [s.mean_miou() for s in series]
    video_mious = [v for v in video_mious if v is not None]
    video_rmses = [s.mean_bg_rmse() for s in series]
    video_rmses = [v for v in video_rmses if v is not None]
    max_frames = max(s.frame_count for s in series)
    curve = []
    for i in range(max_frames):
        vals = [
            s.per_frame_miou[i]
            for s in series
            if i < s.frame_count and s.per_frame_miou[i] is not None
        ]
        if vals:
            arr = np.asarray(vals, dtype=float)
            curve.append((float(arr.mean()), float(arr.std()), len(vals)))
        else:
            curve.append((math.nan, math.nan, 0))
    return MetricSummary(
        scenario=scenario,
        mean_miou=float(np.mean(video_mious)) if video_mious else None,
        mean_bg_rmse=float(np.mean(video_rmses)) if video_rmses else None,
        n_videos=len(series),
        miou_vs_frame=tuple(curve),
    )
