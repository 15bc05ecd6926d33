"""Binary mask codecs and mask-derived geometry.

Masks travel as uncompressed run-length counts over the row-major raster,
alternating background/foreground and always starting with background (a
leading 0 marks a mask whose first pixel is set). Raster frames for
background comparisons are binary PPM (P6, maxval 255) and both codecs are
bit-exact. Pixel (row, col) has its center at integer coordinates
(col, row); centroids and boxes are reported as (u, v) = (col, row).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyMask, LengthMismatch


@dataclass(frozen=True)
class BBox:
    """Tight axis-aligned box over set pixels, inclusive bounds."""

    u_min: int
    v_min: int
    u_max: int
    v_max: int

    def area(self) -> int:
        return (self.u_max - self.u_min + 1) * (self.v_max - self.v_min + 1)


@dataclass(frozen=True)
class MaskSequence:
    """Per-frame RLE masks for one tracked object."""

    object_id: str
    width: int
    height: int
    fps: float
    frames: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("mask dimensions must be >= 1")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        size = self.width * self.height
        for i, runs in enumerate(self.frames):
            total = sum(runs)
            if total != size or any(r < 0 for r in runs):
                raise LengthMismatch(
                    f"frame {i}: runs sum to {total}, expected {size}"
                )

    @property
    def frame_count(self) -> int:
        return len(self.frames)


def decode_rle(runs: Sequence[int], width: int, height: int) -> np.ndarray:
    """Decode alternating background/foreground runs to a bool raster."""
    runs = np.asarray(runs, dtype=np.int64)
    if runs.size and runs.min() < 0:
        raise LengthMismatch("negative run length")
    total = int(runs.sum())
    if total != width * height:
        raise LengthMismatch(f"runs sum to {total}, expected {width * height}")
    values = np.zeros(runs.size, dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, runs)
    return flat.reshape(height, width)


def encode_rle(mask: np.ndarray) -> list[int]:
    """Encode a bool raster to canonical runs (no interior zero-length runs)."""
    flat = np.asarray(mask, dtype=bool).ravel()
    if flat.size == 0:
        return []
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def centroid(mask: np.ndarray) -> tuple[float, float]:
    """Mean (u, v) of set-pixel centers.

    Computed relative to the bounding box so that integer translations of
    the mask shift the result exactly.
    """
    rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
    if rows.size == 0:
        raise EmptyMask("centroid of empty mask")
    r0, c0 = int(rows.min()), int(cols.min())
    n = rows.size
    u = c0 + int((cols - c0).sum()) / n
    v = r0 + int((rows - r0).sum()) / n
    return float(u), float(v)


def bbox_from_mask(mask: np.ndarray) -> BBox:
    rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
    if rows.size == 0:
        raise EmptyMask("bbox of empty mask")
    return BBox(int(cols.min()), int(rows.min()), int(cols.max()), int(rows.max()))


def _prefix_div_mod(n: np.ndarray, width: int) -> tuple[np.ndarray, np.ndarray]:
    # sum_{p < n} p // width and sum_{p < n} p % width, exact in int64
    q, r = np.divmod(n, width)
    sdiv = width * (q * (q - 1)) // 2 + q * r
    smod = q * (width * (width - 1) // 2) + (r * (r - 1)) // 2
    return sdiv, smod


def _foreground_segments(runs: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    # run i covers [bounds[i], bounds[i+1]); foreground runs sit at odd i
    bounds = np.concatenate(([0], np.cumsum(np.asarray(runs, dtype=np.int64))))
    starts = bounds[1:-1:2]
    ends = bounds[2::2]
    keep = ends > starts
    return starts[keep], ends[keep]


def centroid_from_runs(
    runs: Sequence[int], width: int, height: int
) -> tuple[float, float]:
    """Centroid straight from runs; bit-identical to centroid(decode_rle(runs))."""
    if sum(runs) != width * height or any(r < 0 for r in runs):
        raise LengthMismatch("runs do not tile the raster")
    starts, ends = _foreground_segments(runs)
    count = int((ends - starts).sum())
    if count == 0:
        raise EmptyMask("centroid of empty mask")
    dv_e, sm_e = _prefix_div_mod(ends, width)
    dv_s, sm_s = _prefix_div_mod(starts, width)
    sum_rows = int((dv_e - dv_s).sum())
    sum_cols = int((sm_e - sm_s).sum())
    box = bbox_from_runs(runs, width, height)
    u = box.u_min + (sum_cols - count * box.u_min) / count
    v = box.v_min + (sum_rows - count * box.v_min) / count
    return float(u), float(v)


def bbox_from_runs(runs: Sequence[int], width: int, height: int) -> BBox:
    if sum(runs) != width * height or any(r < 0 for r in runs):
        raise LengthMismatch("runs do not tile the raster")
    starts, ends = _foreground_segments(runs)
    if starts.size == 0:
        raise EmptyMask("bbox of empty mask")
    r0 = starts // width
    r1 = (ends - 1) // width
    c_start = starts % width
    c_end = (ends - 1) % width
    multi = r1 > r0
    u_min = int(np.where(multi, 0, c_start).min())
    u_max = int(np.where(multi, width - 1, c_end).max())
    return BBox(u_min, int(r0.min()), u_max, int(r1.max()))


def mask_pixel_count(runs: Sequence[int]) -> int:
    starts, ends = _foreground_segments(runs)
    return int((ends - starts).sum())


def save_mask_file(seq: MaskSequence, path: str | Path) -> None:
    doc = {
        "object_id": seq.object_id,
        "width": seq.width,
        "height": seq.height,
        "fps": seq.fps,
        "frames": [list(runs) for runs in seq.frames],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_mask_file(path: str | Path) -> MaskSequence:
    doc = json.loads(Path(path).read_text())
    return MaskSequence(
        object_id=str(doc["object_id"]),
        width=int(doc["width"]),
        height=int(doc["height"]),
        fps=float(doc["fps"]),
        frames=tuple(tuple(int(r) for r in runs) for runs in doc["frames"]),
    )


_PPM_TOKEN = re.compile(rb"^(?:\s|#[^\n]*\n)*(\S+)")


def write_ppm(path: str | Path, image: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 array as binary PPM (P6, maxval 255)."""
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("expected (H, W, 3) uint8 image")
    h, w, _ = img.shape
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = _PPM_TOKEN.match(data[pos:])
        if not m:
            raise ValueError(f"{path}: truncated PPM header")
        tokens.append(m.group(1))
        pos += m.end(1)
    if tokens[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    raw = data[pos : pos + w * h * 3]
    if len(raw) != w * h * 3:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy()


def frame_filename(index: int) -> str:
    return f"frame_{index:06d}.ppm"
