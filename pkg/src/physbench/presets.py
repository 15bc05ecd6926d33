"""Named scenario presets and validation suites.

Two families live here. The intuitive-scene presets sample randomized
configs for the fifteen benchmark scenarios (metric demos; kinematics
only, no contact dynamics, so bounce-style scenes carry the pre-impact
segment). The validation presets build the closed-loop estimation suite:
noiseless high-resolution scenes for exactness checks and noisy
default-camera scenes per material for the benchmark-style rows.

The noiseless scenes run at 3000 px/m and 480-600 fps with in-flight
trimming; at that sampling the rasterization quantization left in a
fitted acceleration is below 1e-6 relative, which the acceptance suite
relies on.
"""

from __future__ import annotations

import math

from .camera import CameraIntrinsics
from .params import STANDARD_GRAVITY
from .rng import Pcg32
from .synth import (
    DEFAULT_BOARD,
    DEFAULT_INTRINSICS,
    ObjectSpec,
    OccluderRect,
    ScenarioConfig,
)

SCENARIO_NAMES = (
    "ball_bounce",
    "two_object_fall",
    "two_object_parabolic",
    "block_object",
    "columns",
    "raised_block",
    "walls",
    "two_ball",
    "object_towards",
    "object_away",
    "sphere_towards",
    "sphere_away",
    "dominoes",
    "ramp",
    "table",
)

_G = STANDARD_GRAVITY
_PXM = DEFAULT_INTRINSICS.fx / 2.0  # px per meter at the default 2 m depth


def _base(name, seed, kind, true_params, objects, **kw):
    defaults = dict(
        name=name,
        kind=kind,
        true_params=true_params,
        width=1920,
        height=1080,
        fps=24.0,
        frame_count=132,
        depth_m=2.0,
        seed=seed,
        objects=objects,
        intrinsics=DEFAULT_INTRINSICS,
        board=DEFAULT_BOARD,
    )
    defaults.update(kw)
    return ScenarioConfig(**defaults)


def _obj_at_pixel(cfg_kw, u, v, **obj_kw):
    # world coordinates of a pixel on the motion plane, board-centred pose
    depth = cfg_kw.get("depth_m", 2.0)
    intr = cfg_kw.get("intrinsics", DEFAULT_INTRINSICS)
    board = cfg_kw.get("board", DEFAULT_BOARD)
    board_depth = cfg_kw.get("board_depth_m") or depth + 0.5
    bx = (board.inner_cols - 1) * board.square_size / 2.0
    by = (board.inner_rows - 1) * board.square_size / 2.0
    x = (u - intr.cx) * depth / intr.fx + bx
    y = (v - intr.cy) * depth / intr.fy + by
    return ObjectSpec(x0=x, y0=y, **obj_kw)


def _mps(px_per_s: float, depth: float = 2.0, fx: float = DEFAULT_INTRINSICS.fx) -> float:
    return px_per_s * depth / fx


def sample_scenario(name: str, seed: int) -> ScenarioConfig:
    """Randomized config for one of the fifteen intuitive scenarios."""
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}")
    rng = Pcg32(seed, stream=0)
    kw: dict = {}

    if name == "ball_bounce":
        kw = dict(fps=240.0, frame_count=120)
        obj = _obj_at_pixel(
            kw, rng.uniform(400, 1500), rng.uniform(60, 110),
            object_id="ball", shape="disk", size_m=rng.uniform(0.04, 0.09),
        )
        return _base(name, seed, "gravity_freefall", {"g": _G}, (obj,), **kw)

    if name == "two_object_fall":
        kw = dict(fps=240.0, frame_count=96)
        a = _obj_at_pixel(kw, rng.uniform(400, 800), rng.uniform(60, 100),
                          object_id="obj_a", shape="disk", size_m=rng.uniform(0.04, 0.08))
        b = _obj_at_pixel(kw, rng.uniform(1100, 1500), rng.uniform(120, 180),
                          object_id="obj_b", shape="square", size_m=rng.uniform(0.06, 0.10),
                          color=(60, 90, 200))
        return _base(name, seed, "gravity_freefall", {"g": _G}, (a, b), **kw)

    if name == "two_object_parabolic":
        kw = dict(fps=240.0, frame_count=144)
        a = _obj_at_pixel(kw, rng.uniform(300, 500), rng.uniform(600, 700),
                          object_id="obj_a", shape="disk", size_m=rng.uniform(0.04, 0.07),
                          vx0=rng.uniform(1.0, 1.8), vy0=-rng.uniform(2.6, 3.2))
        b = _obj_at_pixel(kw, rng.uniform(1420, 1620), rng.uniform(600, 700),
                          object_id="obj_b", shape="square", size_m=rng.uniform(0.05, 0.09),
                          vx0=-rng.uniform(1.0, 1.8), vy0=-rng.uniform(2.6, 3.2),
                          color=(60, 90, 200))
        return _base(name, seed, "gravity_parabolic", {"g": _G}, (a, b), **kw)

    if name in ("block_object", "columns", "walls"):
        speed = rng.uniform(250, 320)  # px/s
        obj = _obj_at_pixel(kw, rng.uniform(120, 220), rng.uniform(420, 660),
                            object_id="mover", shape="disk" if rng.random() < 0.5 else "square",
                            size_m=rng.uniform(0.10, 0.16), vx0=_mps(speed))
        if name == "block_object":
            occ = (OccluderRect(860, 0, 1060, 1079),)
        elif name == "columns":
            n = 3 + rng.randint(3)
            occ = tuple(
                OccluderRect(500 + k * 280, 0, 500 + k * 280 + 50, 1079) for k in range(n)
            )
        else:
            occ = (OccluderRect(700, 150, 1220, 930),)
        return _base(name, seed, "occlusion_pass", {"speed_px_s": speed}, (obj,),
                     occluders=occ, **kw)

    if name == "raised_block":
        speed = rng.uniform(120, 170)
        obj = _obj_at_pixel(kw, rng.uniform(700, 1200), rng.uniform(80, 160),
                            object_id="bouncer", shape="disk", size_m=rng.uniform(0.08, 0.14),
                            vy0=_mps(speed))
        occ = (OccluderRect(0, 430, 1919, 620),)
        return _base(name, seed, "occlusion_pass", {"speed_px_s": speed}, (obj,),
                     occluders=occ, **kw)

    if name == "two_ball":
        big = _obj_at_pixel(kw, rng.uniform(850, 1050), rng.uniform(160, 260),
                            object_id="big", shape="disk", size_m=rng.uniform(0.14, 0.2),
                            vy0=_mps(rng.uniform(90, 130)))
        small = _obj_at_pixel(kw, rng.uniform(850, 1050), rng.uniform(760, 900),
                              object_id="small", shape="disk", size_m=rng.uniform(0.05, 0.08),
                              vy0=-_mps(rng.uniform(90, 130)), color=(60, 90, 200))
        return _base(name, seed, "translating_object", {}, (big, small), **kw)

    if name in ("object_towards", "object_away", "sphere_towards", "sphere_away"):
        shape = "disk" if name.startswith("sphere") else "square"
        towards = name.endswith("towards")
        z0 = rng.uniform(2.3, 2.7) if towards else rng.uniform(1.2, 1.5)
        vz = -rng.uniform(0.18, 0.23) if towards else rng.uniform(0.18, 0.23)
        kw = dict(depth_m=z0, board_depth_m=max(z0, 1.5) + 1.0)
        obj = _obj_at_pixel(kw, rng.uniform(810, 1110), rng.uniform(440, 640),
                            object_id="traveller", shape=shape,
                            size_m=rng.uniform(0.12, 0.2), vz0=vz)
        return _base(name, seed, "translating_object", {"vz_m_s": vz}, (obj,), **kw)

    if name == "dominoes":
        speed = rng.uniform(260, 340)
        obj = _obj_at_pixel(kw, rng.uniform(150, 280), rng.uniform(600, 760),
                            object_id="striker", shape="square", size_m=rng.uniform(0.08, 0.12),
                            vx0=_mps(speed))
        return _base(name, seed, "translating_object", {"speed_px_s": speed}, (obj,), **kw)

    if name == "ramp":
        theta = math.radians(rng.uniform(25, 35))
        mu = rng.uniform(0.2, min(0.5, 0.9 * math.tan(theta)))
        kw = dict(fps=240.0, frame_count=240)
        obj = _obj_at_pixel(kw, rng.uniform(150, 300), rng.uniform(120, 220),
                            object_id="slider", shape="disk", size_m=rng.uniform(0.04, 0.07))
        return _base(name, seed, "friction_incline",
                     {"g": _G, "mu": mu, "theta": theta}, (obj,), **kw)

    # table: object tips off an edge and drops
    kw = dict(fps=240.0, frame_count=120)
    obj = _obj_at_pixel(kw, rng.uniform(300, 700), rng.uniform(60, 120),
                        object_id="faller", shape="square", size_m=rng.uniform(0.06, 0.10))
    return _base("table", seed, "gravity_freefall", {"g": _G}, (obj,), **kw)


# ---------------------------------------------------------------------------
# estimation validation presets

# friction materials: ramp angle paired with the ground-truth midpoint so the
# block slides (mu < tan(theta)) at a comfortable margin
FRICTION_SETUPS = {
    "wood": (0.35, math.radians(25.0)),
    "rubber": (1.25, math.radians(55.0)),
    "sandpaper_80": (0.9, math.radians(48.0)),
    "sandpaper_3000": (0.35, math.radians(30.0)),
    "plastic": (0.125, math.radians(20.0)),
}

VISCOSITY_SETUPS = {
    "glycerine": (1.2, 1260.0),
    "corn_syrup": (6.0, 1380.0),
    "honey": (14.1, 1420.0),
}

MATERIAL_ROWS = (
    "free_fall",
    "parabolic",
    "glycerine",
    "corn_syrup",
    "honey",
    "wood",
    "rubber",
    "sandpaper_80",
    "sandpaper_3000",
    "plastic",
)

_SPHERE_RADIUS = 0.005
_STEEL = 7850.0


def material_scenario(material: str, seed: int, noise_px: float = 0.5) -> ScenarioConfig:
    """Default-camera noisy scene for one benchmark-table row."""
    rng = Pcg32(seed, stream=0)
    if material == "free_fall":
        kw = dict(fps=240.0, frame_count=108, trim_frames=12, noise_px=noise_px)
        obj = _obj_at_pixel(kw, rng.uniform(500, 1400), rng.uniform(40, 70),
                            object_id="drop", shape="disk", size_m=rng.uniform(0.03, 0.05))
        return _base(f"free_fall_{seed}", seed, "gravity_freefall", {"g": _G}, (obj,), **kw)
    if material == "parabolic":
        kw = dict(fps=240.0, frame_count=144, trim_frames=8, noise_px=noise_px)
        going_right = rng.random() < 0.5
        vx = rng.uniform(0.5, 1.5) * (1 if going_right else -1)
        u0 = rng.uniform(300, 700) if going_right else rng.uniform(1220, 1620)
        obj = _obj_at_pixel(kw, u0, rng.uniform(640, 720),
                            object_id="lob", shape="disk", size_m=rng.uniform(0.03, 0.05),
                            vx0=vx, vy0=-rng.uniform(2.5, 3.2))
        return _base(f"parabolic_{seed}", seed, "gravity_parabolic", {"g": _G}, (obj,), **kw)
    if material in VISCOSITY_SETUPS:
        eta, rho_f = VISCOSITY_SETUPS[material]
        kw = dict(fps=240.0, frame_count=360, depth_m=1.0, noise_px=noise_px)
        v_start = 150 if material == "glycerine" else 300
        obj = _obj_at_pixel(kw, rng.uniform(700, 1200), v_start + rng.uniform(0, 30),
                            object_id="ball", shape="disk", size_m=_SPHERE_RADIUS)
        params = {"g": _G, "eta": eta, "r": _SPHERE_RADIUS, "rho_s": _STEEL, "rho_f": rho_f}
        return _base(f"{material}_{seed}", seed, "viscosity_settling", params, (obj,), **kw)
    if material in FRICTION_SETUPS:
        mu, theta = FRICTION_SETUPS[material]
        kw = dict(fps=240.0, frame_count=288, trim_frames=36, noise_px=noise_px)
        obj = _obj_at_pixel(kw, 120 + rng.uniform(0, 40), 120 + rng.uniform(0, 40),
                            object_id="block", shape="disk", size_m=rng.uniform(0.025, 0.04))
        params = {"g": _G, "mu": mu, "theta": theta}
        return _base(f"{material}_{seed}", seed, "friction_incline", params, (obj,), **kw)
    raise ValueError(f"unknown material {material!r}")


# noiseless exactness scenes: 3000 px/m, high fps, generous trims


def _hires_cfg(name, kind, params, obj, width, height, fps, frame_count, trim, seed):
    intr = CameraIntrinsics(fx=1500.0, fy=1500.0, cx=width / 2.0, cy=height / 2.0)
    return ScenarioConfig(
        name=name,
        kind=kind,
        true_params=params,
        width=width,
        height=height,
        fps=fps,
        frame_count=frame_count,
        depth_m=0.5,
        seed=seed,
        objects=(obj,),
        intrinsics=intr,
        board=DEFAULT_BOARD,
        board_depth_m=1.0,
        trim_frames=trim,
    )


def _hires_obj(intr_w, intr_h, u, v, r, depth=0.5, **kw):
    intr = CameraIntrinsics(fx=1500.0, fy=1500.0, cx=intr_w / 2.0, cy=intr_h / 2.0)
    board = DEFAULT_BOARD
    bx = (board.inner_cols - 1) * board.square_size / 2.0
    by = (board.inner_rows - 1) * board.square_size / 2.0
    x = (u - intr.cx) * depth / intr.fx + bx
    y = (v - intr.cy) * depth / intr.fy + by
    return ObjectSpec(object_id="marker", shape="disk", size_m=r, x0=x, y0=y, **kw)


def noiseless_validation_configs() -> list[ScenarioConfig]:
    """Twelve exact scenes, three per experiment kind."""
    g = {"g": _G}
    cfgs = [
        _hires_cfg("ff_exact_1", "gravity_freefall", g,
                   _hires_obj(520, 24600, 260.3, 130.7, 80.0 / 3000.0),
                   520, 24600, 480.0, 576, 38, seed=101),
        _hires_cfg("ff_exact_2", "gravity_freefall", g,
                   _hires_obj(520, 18400, 247.7, 130.3, 90.0 / 3000.0),
                   520, 18400, 480.0, 480, 48, seed=102),
        _hires_cfg("ff_exact_3", "gravity_freefall", g,
                   _hires_obj(520, 19900, 213.3, 140.13, 75.0 / 3000.0),
                   520, 19900, 600.0, 660, 30, seed=103),
        _hires_cfg("pb_exact_1", "gravity_parabolic", g,
                   _hires_obj(1200, 21600, 300.3, 250.7, 80.0 / 3000.0, vx0=0.12, vy0=-0.8),
                   1200, 21600, 480.0, 576, 38, seed=111),
        _hires_cfg("pb_exact_2", "gravity_parabolic", g,
                   _hires_obj(1200, 22700, 800.7, 180.3, 96.0 / 3000.0, vx0=-0.10, vy0=-0.5),
                   1200, 22700, 480.0, 576, 38, seed=112),
        _hires_cfg("pb_exact_3", "gravity_parabolic", g,
                   _hires_obj(1200, 20900, 250.13, 280.13, 80.0 / 3000.0, vx0=0.15, vy0=-1.0),
                   1200, 20900, 480.0, 576, 38, seed=113),
        _hires_cfg("in_exact_1", "friction_incline",
                   {"g": _G, "mu": 0.342, "theta": math.radians(30.0)},
                   _hires_obj(12500, 7500, 180.3, 190.7, 80.0 / 3000.0),
                   12500, 7500, 480.0, 960, 72, seed=121),
        _hires_cfg("in_exact_2", "friction_incline",
                   {"g": _G, "mu": 0.2, "theta": math.radians(25.0)},
                   _hires_obj(15400, 7600, 170.13, 200.3, 80.0 / 3000.0),
                   15400, 7600, 480.0, 960, 72, seed=122),
        _hires_cfg("in_exact_3", "friction_incline",
                   {"g": _G, "mu": 0.45, "theta": math.radians(35.0)},
                   _hires_obj(11900, 8600, 160.7, 170.17, 80.0 / 3000.0),
                   11900, 8600, 480.0, 960, 72, seed=123),
    ]
    for i, (mat, (eta, rho_f)) in enumerate(VISCOSITY_SETUPS.items()):
        params = {"g": _G, "eta": eta, "r": _SPHERE_RADIUS, "rho_s": _STEEL, "rho_f": rho_f}
        v0 = 150.3 if mat == "glycerine" else 300.3
        cfg = ScenarioConfig(
            name=f"vs_exact_{mat}",
            kind="viscosity_settling",
            true_params=params,
            width=1920,
            height=1080,
            fps=240.0,
            frame_count=360,
            depth_m=1.0,
            seed=131 + i,
            objects=(
                _obj_at_pixel(dict(depth_m=1.0), 960.3 + 13 * i, v0,
                              object_id="marker", shape="disk", size_m=_SPHERE_RADIUS),
            ),
        )
        cfgs.append(cfg)
    return cfgs
