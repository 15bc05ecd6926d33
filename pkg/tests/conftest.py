import math

import numpy as np
import pytest

from physbench.camera import CameraIntrinsics, CheckerboardSpec, CornerSet
from physbench.rng import Pcg32


@pytest.fixture
def board():
    return CheckerboardSpec(inner_rows=7, inner_cols=10, square_size=0.025)


@pytest.fixture
def calib_board():
    # larger squares give the strong perspective focal estimation wants
    return CheckerboardSpec(inner_rows=7, inner_cols=10, square_size=0.04)


@pytest.fixture
def intr():
    return CameraIntrinsics(fx=1500.0, fy=1500.0, cx=960.0, cy=540.0)


def rotation(axis: str, degrees: float) -> np.ndarray:
    a = math.radians(degrees)
    c, s = math.cos(a), math.sin(a)
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float)
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=float)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=float)


def project_board(board: CheckerboardSpec, intr: CameraIntrinsics, R, t,
                  noise_px: float = 0.0, rng: Pcg32 | None = None) -> np.ndarray:
    """Reference projector used as the oracle for calibration tests."""
    pts = board.object_points()
    pc = pts @ np.asarray(R, dtype=float).T + np.asarray(t, dtype=float)
    u = intr.fx * pc[:, 0] / pc[:, 2] + intr.cx
    v = intr.fy * pc[:, 1] / pc[:, 2] + intr.cy
    uv = np.column_stack([u, v])
    if noise_px > 0.0:
        assert rng is not None
        uv = uv + np.array(rng.normals(uv.size, 0.0, noise_px)).reshape(uv.shape)
    return uv


def centered_pose(board: CheckerboardSpec, R, depth: float,
                  offset=(0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
    """Translation that puts the board centre on the optical axis at depth."""
    R = np.asarray(R, dtype=float)
    bc = np.array(
        [
            (board.inner_cols - 1) * board.square_size / 2.0,
            (board.inner_rows - 1) * board.square_size / 2.0,
            0.0,
        ]
    )
    t = np.array([offset[0], offset[1], depth]) - R @ bc
    return R, t


def random_views(board, intr, n, seed, noise_px=0.0, depth=(0.8, 1.4), tilt=35.0):
    """n well-spread synthetic views with strong perspective."""
    rng = Pcg32(seed, stream=9)
    noise_rng = Pcg32(seed, stream=10)
    views, poses = [], []
    while len(views) < n:
        R = (
            rotation("x", rng.uniform(-tilt, tilt))
            @ rotation("y", rng.uniform(-tilt, tilt))
            @ rotation("z", rng.uniform(-15, 15))
        )
        R, t = centered_pose(
            board, R, rng.uniform(*depth),
            offset=(rng.uniform(-0.08, 0.08), rng.uniform(-0.05, 0.05)),
        )
        uv = project_board(board, intr, R, t)
        if uv[:, 0].min() < 5 or uv[:, 0].max() > 1915 or uv[:, 1].min() < 5 or uv[:, 1].max() > 1075:
            continue
        if noise_px > 0:
            uv = uv + np.array(noise_rng.normals(uv.size, 0.0, noise_px)).reshape(uv.shape)
        views.append(CornerSet(f"view_{len(views)}", uv))
        poses.append((R, t))
    return views, poses
