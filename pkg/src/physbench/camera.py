"""Pinhole camera model, planar checkerboard calibration, and pose recovery.

Intrinsics come from the classic planar-target recipe: a normalized DLT
homography per view, closed-form initialization from the absolute-conic
constraints the homographies impose, then damped least squares over all
views on the reprojection error. Per-video extrinsics decompose a single
homography (two rotation columns from the normalized homography, third by
cross product, projected to the nearest rotation via SVD) and are refined
the same way.

Conventions: pixels are (u, v) with u along columns; the world frame is
the board frame with X along board columns, Y along board rows, and the
identity pose placing the board square-on in front of the camera (board
normal along the optical axis). Lens distortion is assumed zero; corner
coordinates must be pre-undistorted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BehindCamera,
    DegenerateHomography,
    DegenerateViews,
    TooFewViews,
)

_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if self.skew != 0.0:
            raise ValueError("skew is fixed at zero")
        for v in (self.fx, self.fy, self.cx, self.cy):
            if not math.isfinite(v):
                raise ValueError("intrinsics must be finite")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, self.skew, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


class CameraExtrinsics:
    """World-to-camera rigid transform; rotation is checked orthonormal."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation: np.ndarray, translation: np.ndarray):
        R = np.array(rotation, dtype=float).reshape(3, 3)
        t = np.array(translation, dtype=float).reshape(3)
        if np.linalg.norm(R.T @ R - np.eye(3)) > _ORTHO_TOL:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation must have determinant +1")
        R.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    def __setattr__(self, name, value):
        raise AttributeError("CameraExtrinsics is immutable")

    def __repr__(self):
        return f"CameraExtrinsics(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


@dataclass(frozen=True)
class CheckerboardSpec:
    inner_rows: int
    inner_cols: int
    square_size: float

    def __post_init__(self):
        if self.inner_rows < 3 or self.inner_cols < 3:
            raise ValueError("need at least 3x3 inner corners")
        if self.square_size <= 0:
            raise ValueError("square_size must be positive")

    def corner_count(self) -> int:
        return self.inner_rows * self.inner_cols

    def object_points(self) -> np.ndarray:
        """Inner-corner world coordinates, row-major, Z = 0."""
        cols = np.arange(self.inner_cols) * self.square_size
        rows = np.arange(self.inner_rows) * self.square_size
        cc, rr = np.meshgrid(cols, rows)
        pts = np.column_stack([cc.ravel(), rr.ravel(), np.zeros(cc.size)])
        return pts


class CornerSet:
    """Ordered 2D corner observations for one image."""

    __slots__ = ("image_id", "points")

    def __init__(self, image_id: str, points: np.ndarray):
        pts = np.array(points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise ValueError("corner coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "image_id", image_id)
        object.__setattr__(self, "points", pts)

    def __setattr__(self, name, value):
        raise AttributeError("CornerSet is immutable")

    def validate_for(self, board: CheckerboardSpec) -> None:
        if len(self.points) != board.corner_count():
            raise ValueError(
                f"{self.image_id}: {len(self.points)} corners, "
                f"expected {board.corner_count()}"
            )


# ---------------------------------------------------------------------------
# forward model


def project(point, intr: CameraIntrinsics, extr: CameraExtrinsics) -> tuple[float, float]:
    """Project a world point to pixel coordinates."""
    p = np.asarray(point, dtype=float).reshape(3)
    pc = extr.rotation @ p + extr.translation
    if pc[2] <= 0:
        raise BehindCamera(f"camera-frame depth {pc[2]:.6g} <= 0")
    u = intr.fx * pc[0] / pc[2] + intr.cx
    v = intr.fy * pc[1] / pc[2] + intr.cy
    return float(u), float(v)


def lift_planar(
    pixel, depth: float, intr: CameraIntrinsics, extr: CameraExtrinsics | None = None
) -> np.ndarray:
    """Back-project a pixel at known camera-frame depth.

    With extrinsics the point is returned in the world (board) frame, where
    the vertical is the board's -Y; without them it stays in the camera
    frame (level camera assumed, vertical -Yc).
    """
    if depth <= 0:
        raise ValueError("depth must be positive")
    u, v = float(pixel[0]), float(pixel[1])
    pc = np.array(
        [(u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth]
    )
    if extr is None:
        return pc
    return extr.rotation.T @ (pc - extr.translation)


def _project_many(
    obj_pts: np.ndarray, intr_vec: np.ndarray, rvec: np.ndarray, tvec: np.ndarray
) -> np.ndarray:
    fx, fy, cx, cy = intr_vec
    R = rodrigues_to_matrix(rvec)
    pc = obj_pts @ R.T + tvec
    z = pc[:, 2]
    return np.column_stack([fx * pc[:, 0] / z + cx, fy * pc[:, 1] / z + cy])


# ---------------------------------------------------------------------------
# rotation parametrization


def rodrigues_to_matrix(rvec: np.ndarray) -> np.ndarray:
    theta = float(np.linalg.norm(rvec))
    if theta < 1e-14:
        return np.eye(3)
    k = np.asarray(rvec, dtype=float) / theta
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(theta) * K + (1 - math.cos(theta)) * (K @ K)


def matrix_to_rodrigues(R: np.ndarray) -> np.ndarray:
    tr = float(np.trace(R))
    cos_theta = min(1.0, max(-1.0, (tr - 1.0) / 2.0))
    theta = math.acos(cos_theta)
    if theta < 1e-12:
        return np.zeros(3)
    if math.pi - theta < 1e-6:
        # near 180 degrees: axis from the dominant diagonal of R + I
        M = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(M), 0.0))
        i = int(np.argmax(axis))
        if axis[i] > 0:
            axis = M[:, i] / axis[i]
            axis /= np.linalg.norm(axis)
        return axis * theta
    axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return axis / (2.0 * math.sin(theta)) * theta


def nearest_rotation(M: np.ndarray) -> np.ndarray:
    """Orthonormal factor of the polar decomposition, via SVD."""
    U, _, Vt = np.linalg.svd(M)
    D = np.diag([1.0, 1.0, float(np.sign(np.linalg.det(U @ Vt)))])
    return U @ D @ Vt


# ---------------------------------------------------------------------------
# homography estimation (normalized DLT)


def _normalize_points(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = pts.mean(axis=0)
    d = np.sqrt(((pts - mean) ** 2).sum(axis=1)).mean()
    s = math.sqrt(2.0) / d if d > 1e-12 else 1.0
    T = np.array([[s, 0, -s * mean[0]], [0, s, -s * mean[1]], [0, 0, 1]])
    return (pts - mean) * s, T


def homography_dlt(src: np.ndarray, dst: np.ndarray, rank_tol: float = 1e-9) -> np.ndarray:
    """Planar homography mapping src (board XY) to dst (pixels)."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    n = len(src)
    if n < 4:
        raise DegenerateHomography("need at least 4 correspondences")
    # a rank-2 homography (all corners on a line) solves the DLT cleanly,
    # so collinearity has to be caught on the points themselves
    spread = np.linalg.svd(dst - dst.mean(axis=0), compute_uv=False)
    if spread[1] / max(spread[0], 1e-300) < 1e-8:
        raise DegenerateHomography("corner configuration is (near-)collinear")
    sn, Ts = _normalize_points(src)
    dn, Td = _normalize_points(dst)
    A = np.zeros((2 * n, 9))
    A[0::2, 0] = -sn[:, 0]
    A[0::2, 1] = -sn[:, 1]
    A[0::2, 2] = -1.0
    A[0::2, 6] = dn[:, 0] * sn[:, 0]
    A[0::2, 7] = dn[:, 0] * sn[:, 1]
    A[0::2, 8] = dn[:, 0]
    A[1::2, 3] = -sn[:, 0]
    A[1::2, 4] = -sn[:, 1]
    A[1::2, 5] = -1.0
    A[1::2, 6] = dn[:, 1] * sn[:, 0]
    A[1::2, 7] = dn[:, 1] * sn[:, 1]
    A[1::2, 8] = dn[:, 1]
    _, S, Vt = np.linalg.svd(A)
    if S[7] / S[0] < rank_tol:
        raise DegenerateHomography("corner configuration is (near-)collinear")
    Hn = Vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ Hn @ Ts
    hs = np.linalg.svd(H, compute_uv=False)
    if hs[2] / hs[0] < 1e-12:
        raise DegenerateHomography("homography is rank-deficient")
    if abs(H[2, 2]) > 1e-12:
        H = H / H[2, 2]
    return H


# ---------------------------------------------------------------------------
# damped least squares (Levenberg-Marquardt schedule)

_LM_LAMBDA0 = 1e-3
_LM_MAX_ITER = 100
_LM_STOP_REL = 1e-12


def _lm_refine(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    jacobian_fn: Callable[[np.ndarray], np.ndarray],
    p0: np.ndarray,
) -> np.ndarray:
    p = p0.copy()
    r = residual_fn(p)
    cost = float(r @ r)
    lam = _LM_LAMBDA0
    for _ in range(_LM_MAX_ITER):
        J = jacobian_fn(p)
        JtJ = J.T @ J
        g = J.T @ r
        improved = False
        while lam <= 1e12:
            A = JtJ + lam * np.eye(len(p))
            try:
                dp = np.linalg.solve(A, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = p + dp
            r_new = residual_fn(p_new)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                rel = (cost - cost_new) / max(cost, 1e-300)
                p, r, cost = p_new, r_new, cost_new
                lam = max(lam / 10.0, 1e-15)
                improved = True
                if rel < _LM_STOP_REL:
                    return p
                break
            lam *= 10.0
        if not improved:
            return p
    return p


def _numeric_jacobian(
    residual_fn: Callable[[np.ndarray], np.ndarray], p: np.ndarray
) -> np.ndarray:
    r0 = residual_fn(p)
    J = np.zeros((len(r0), len(p)))
    for j in range(len(p)):
        h = 1e-6 * max(1.0, abs(float(p[j])))
        pp = p.copy()
        pp[j] += h
        rp = residual_fn(pp)
        pp[j] -= 2 * h
        rm = residual_fn(pp)
        J[:, j] = (rp - rm) / (2 * h)
    return J


# ---------------------------------------------------------------------------
# intrinsic calibration


@dataclass(frozen=True)
class CalibrationResult:
    intrinsics: CameraIntrinsics
    mean_reproj_px: float
    init_mean_reproj_px: float
    n_views: int


def _vij(H: np.ndarray, i: int, j: int) -> np.ndarray:
    return np.array(
        [
            H[0, i] * H[0, j],
            H[0, i] * H[1, j] + H[1, i] * H[0, j],
            H[1, i] * H[1, j],
            H[2, i] * H[0, j] + H[0, i] * H[2, j],
            H[2, i] * H[1, j] + H[1, i] * H[2, j],
            H[2, i] * H[2, j],
        ]
    )


def _intrinsics_from_homographies(Hs: Sequence[np.ndarray]) -> CameraIntrinsics:
    V = np.zeros((2 * len(Hs), 6))
    for k, H in enumerate(Hs):
        V[2 * k] = _vij(H, 0, 1)
        V[2 * k + 1] = _vij(H, 0, 0) - _vij(H, 1, 1)
    _, S, Vt = np.linalg.svd(V)
    if S[4] / S[0] < 1e-8:
        raise DegenerateViews(
            "board poses leave the absolute-conic constraints rank-deficient"
        )
    b = Vt[-1]
    B11, B12, B22, B13, B23, B33 = b
    denom = B11 * B22 - B12 * B12
    if abs(denom) < 1e-30 or abs(B11) < 1e-30:
        raise DegenerateViews("conic solution is singular")
    v0 = (B12 * B13 - B11 * B23) / denom
    lam = B33 - (B13 * B13 + v0 * (B12 * B13 - B11 * B23)) / B11
    fx2 = lam / B11
    fy2 = lam * B11 / denom
    if not (fx2 > 0 and fy2 > 0) or not np.isfinite(fx2 + fy2):
        raise DegenerateViews("closed-form focal lengths are not positive")
    fx = math.sqrt(fx2)
    fy = math.sqrt(fy2)
    skew = -B12 * fx * fx * fy / lam
    u0 = skew * v0 / fy - B13 * fx * fx / lam
    # skew is modeled as exactly zero; the DLT estimate of it is discarded
    return CameraIntrinsics(fx=fx, fy=fy, cx=float(u0), cy=float(v0))


def _pose_from_homography(K: np.ndarray, H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Kinv = np.linalg.inv(K)
    h1 = Kinv @ H[:, 0]
    h2 = Kinv @ H[:, 1]
    h3 = Kinv @ H[:, 2]
    s = 2.0 / (np.linalg.norm(h1) + np.linalg.norm(h2))
    if h3[2] * s < 0:
        s = -s
    r1, r2, t = s * h1, s * h2, s * h3
    R = nearest_rotation(np.column_stack([r1, r2, np.cross(r1, r2)]))
    return R, t


def calibrate_intrinsics(
    views: Sequence[CornerSet], board: CheckerboardSpec
) -> CalibrationResult:
    """Recover shared intrinsics from several views of the same board."""
    if len(views) < 3:
        raise TooFewViews(f"need >= 3 views, got {len(views)}")
    for v in views:
        v.validate_for(board)
    obj = board.object_points()
    obj_xy = obj[:, :2]
    try:
        Hs = [homography_dlt(obj_xy, v.points) for v in views]
    except DegenerateHomography as e:
        raise DegenerateViews(str(e)) from e
    intr0 = _intrinsics_from_homographies(Hs)
    poses0 = [_pose_from_homography(intr0.matrix, H) for H in Hs]

    n_views = len(views)
    img_pts = [v.points for v in views]

    def unpack(p):
        intr_vec = p[:4]
        poses = [(p[4 + 6 * i : 7 + 6 * i], p[7 + 6 * i : 10 + 6 * i]) for i in range(n_views)]
        return intr_vec, poses

    def view_residual(intr_vec, rvec, tvec, i):
        return (_project_many(obj, intr_vec, rvec, tvec) - img_pts[i]).ravel()

    def residual_fn(p):
        intr_vec, poses = unpack(p)
        return np.concatenate(
            [view_residual(intr_vec, rv, tv, i) for i, (rv, tv) in enumerate(poses)]
        )

    n_res_per_view = 2 * len(obj)

    def jacobian_fn(p):
        # central differences; pose parameters only touch their own view's block
        intr_vec, poses = unpack(p)
        J = np.zeros((n_res_per_view * n_views, len(p)))
        for j in range(4):
            h = 1e-6 * max(1.0, abs(float(p[j])))
            vp, vm = intr_vec.copy(), intr_vec.copy()
            vp[j] += h
            vm[j] -= h
            for i, (rv, tv) in enumerate(poses):
                row = slice(i * n_res_per_view, (i + 1) * n_res_per_view)
                J[row, j] = (
                    view_residual(vp, rv, tv, i) - view_residual(vm, rv, tv, i)
                ) / (2 * h)
        for i, (rv, tv) in enumerate(poses):
            row = slice(i * n_res_per_view, (i + 1) * n_res_per_view)
            block = np.concatenate([rv, tv])
            for k in range(6):
                h = 1e-6 * max(1.0, abs(float(block[k])))
                bp, bm = block.copy(), block.copy()
                bp[k] += h
                bm[k] -= h
                J[row, 4 + 6 * i + k] = (
                    view_residual(intr_vec, bp[:3], bp[3:], i)
                    - view_residual(intr_vec, bm[:3], bm[3:], i)
                ) / (2 * h)
        return J

    p0 = np.concatenate(
        [np.array([intr0.fx, intr0.fy, intr0.cx, intr0.cy])]
        + [np.concatenate([matrix_to_rodrigues(R), t]) for R, t in poses0]
    )
    init_err = _mean_pixel_error(residual_fn(p0))
    p_opt = _lm_refine(residual_fn, jacobian_fn, p0)
    final_err = _mean_pixel_error(residual_fn(p_opt))
    if final_err > init_err:
        p_opt, final_err = p0, init_err
    fx, fy, cx, cy = p_opt[:4]
    return CalibrationResult(
        intrinsics=CameraIntrinsics(fx=float(fx), fy=float(fy), cx=float(cx), cy=float(cy)),
        mean_reproj_px=final_err,
        init_mean_reproj_px=init_err,
        n_views=n_views,
    )


def _mean_pixel_error(residuals: np.ndarray) -> float:
    d = residuals.reshape(-1, 2)
    return float(np.sqrt((d**2).sum(axis=1)).mean())


def _rms_pixel_error(residuals: np.ndarray) -> float:
    d = residuals.reshape(-1, 2)
    return float(np.sqrt((d**2).sum(axis=1).mean()))


# ---------------------------------------------------------------------------
# per-view pose


@dataclass(frozen=True)
class PoseResult:
    extrinsics: CameraExtrinsics
    reproj_rms_px: float


def estimate_pose(
    corners: CornerSet, board: CheckerboardSpec, intr: CameraIntrinsics
) -> PoseResult:
    """Board pose from one view given intrinsics."""
    corners.validate_for(board)
    obj = board.object_points()
    H = homography_dlt(obj[:, :2], corners.points)
    R0, t0 = _pose_from_homography(intr.matrix, H)
    if t0[2] <= 0:
        raise BehindCamera("board origin has non-positive camera-frame depth")

    intr_vec = np.array([intr.fx, intr.fy, intr.cx, intr.cy])
    target = corners.points

    def residual_fn(p):
        return (_project_many(obj, intr_vec, p[:3], p[3:]) - target).ravel()

    p0 = np.concatenate([matrix_to_rodrigues(R0), t0])
    p_opt = _lm_refine(residual_fn, lambda p: _numeric_jacobian(residual_fn, p), p0)
    if p_opt[5] <= 0:
        raise BehindCamera("refined board origin has non-positive depth")
    R = rodrigues_to_matrix(p_opt[:3])
    extr = CameraExtrinsics(nearest_rotation(R), p_opt[3:])
    return PoseResult(extrinsics=extr, reproj_rms_px=_rms_pixel_error(residual_fn(p_opt)))


# ---------------------------------------------------------------------------
# JSON interchange


def intrinsics_to_dict(intr: CameraIntrinsics) -> dict:
    return {"fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy, "skew": intr.skew}


def intrinsics_from_dict(doc: dict) -> CameraIntrinsics:
    return CameraIntrinsics(
        fx=float(doc["fx"]),
        fy=float(doc["fy"]),
        cx=float(doc["cx"]),
        cy=float(doc["cy"]),
        skew=float(doc.get("skew", 0.0)),
    )


def extrinsics_to_dict(extr: CameraExtrinsics) -> dict:
    return {
        "rotation": [[float(x) for x in row] for row in extr.rotation],
        "translation": [float(x) for x in extr.translation],
    }


def extrinsics_from_dict(doc: dict) -> CameraExtrinsics:
    return CameraExtrinsics(np.array(doc["rotation"]), np.array(doc["translation"]))


def corner_set_to_dict(corners: CornerSet, board: CheckerboardSpec) -> dict:
    return {
        "image_id": corners.image_id,
        "board": {
            "inner_rows": board.inner_rows,
            "inner_cols": board.inner_cols,
            "square_size_m": board.square_size,
        },
        "points": [[float(u), float(v)] for u, v in corners.points],
    }


def corner_set_from_dict(doc: dict) -> tuple[CornerSet, CheckerboardSpec]:
    b = doc["board"]
    board = CheckerboardSpec(
        inner_rows=int(b["inner_rows"]),
        inner_cols=int(b["inner_cols"]),
        square_size=float(b["square_size_m"]),
    )
    corners = CornerSet(str(doc["image_id"]), np.array(doc["points"], dtype=float))
    corners.validate_for(board)
    return corners, board


def save_corner_set(corners: CornerSet, board: CheckerboardSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(corner_set_to_dict(corners, board), sort_keys=True) + "\n")


def load_corner_set(path: str | Path) -> tuple[CornerSet, CheckerboardSpec]:
    return corner_set_from_dict(json.loads(Path(path).read_text()))
