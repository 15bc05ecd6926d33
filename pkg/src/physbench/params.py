"""Physical parameters from fitted kinematics.

Gravity comes from the quadratic coefficient of the world-vertical
coordinate (up-positive, so free fall yields +9.81). Kinetic friction
uses mu = (g*sin(theta) - a) / (g*cos(theta)) with a the magnitude of the
in-plane acceleration vector. Viscosity uses the Stokes relation
eta = 2 r^2 (rho_s - rho_f) g / (9 v_t) on the terminal-velocity slope.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyInput, NotTerminal, ZeroVelocity
from .fitting import (
    FitDiagnostics,
    acceleration_of,
    fit_poly,
    terminal_regime_check,
    velocity_of,
)
from .tracks import Track3D

STANDARD_GRAVITY = 9.81

KINDS = ("gravity_freefall", "gravity_parabolic", "friction_incline", "viscosity_settling")

# vertical world axis; the board hangs with rows running downward, so up is -Y
_UP_AXES = {
    "-y": (1, -1.0),
    "+y": (1, 1.0),
    "-x": (0, -1.0),
    "+x": (0, 1.0),
}


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    theta: float | None = None
    r: float | None = None
    rho_s: float | None = None
    rho_f: float | None = None
    g_ref: float = STANDARD_GRAVITY
    up_axis: str = "-y"
    terminal_threshold: float = 0.05

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.up_axis not in _UP_AXES:
            raise ValueError(f"unknown up_axis {self.up_axis!r}")
        if self.kind == "friction_incline":
            if self.theta is None or not 0 < self.theta < math.pi / 2:
                raise ValueError("friction_incline needs 0 < theta < pi/2")
        if self.kind == "viscosity_settling":
            if self.r is None or self.r <= 0:
                raise ValueError("viscosity_settling needs sphere radius r > 0")
            if self.rho_s is None or self.rho_f is None or self.rho_s <= self.rho_f:
                raise ValueError("viscosity_settling needs rho_s > rho_f")


def _vertical_coordinate(track: Track3D, spec: ExperimentSpec) -> tuple[np.ndarray, np.ndarray]:
    t, x, y, z = track.valid_arrays()
    axis, sign = _UP_AXES[spec.up_axis]
    coord = (x, y, z)[axis] * sign
    return t, coord


def _inplane_coordinates(track: Track3D, spec: ExperimentSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t, x, y, z = track.valid_arrays()
    axis, _ = _UP_AXES[spec.up_axis]
    other = y if axis == 0 else x
    vert = (x, y)[axis]
    return t, other, vert


@dataclass(frozen=True)
class GravityEstimate:
    g: float
    horizontal_accel: float | None = None


@dataclass(frozen=True)
class FrictionEstimate:
    mu: float
    accel_magnitude: float
    negative_friction: bool


@dataclass(frozen=True)
class ViscosityEstimate:
    eta: float
    terminal_velocity: float
    diagnostics: FitDiagnostics


def gravity_from_track(track: Track3D, spec: ExperimentSpec) -> GravityEstimate:
    if spec.kind not in ("gravity_freefall", "gravity_parabolic"):
        raise ValueError(f"not a gravity experiment: {spec.kind}")
    t, h = _vertical_coordinate(track, spec)
    fit = fit_poly(np.column_stack([t, h]), degree=2)
    g = -acceleration_of(fit)
    horizontal = None
    if spec.kind == "gravity_parabolic":
        t2, other, _ = _inplane_coordinates(track, spec)
        hfit = fit_poly(np.column_stack([t2, other]), degree=2)
        horizontal = acceleration_of(hfit)
    return GravityEstimate(g=g, horizontal_accel=horizontal)


def friction_from_track(track: Track3D, spec: ExperimentSpec) -> FrictionEstimate:
    if spec.kind != "friction_incline":
        raise ValueError(f"not a friction experiment: {spec.kind}")
    t, x, y, z = track.valid_arrays()
    ax = acceleration_of(fit_poly(np.column_stack([t, x]), degree=2))
    ay = acceleration_of(fit_poly(np.column_stack([t, y]), degree=2))
    a = math.hypot(ax, ay)
    g = spec.g_ref
    mu = (g * math.sin(spec.theta) - a) / (g * math.cos(spec.theta))
    # negative mu means the fitted acceleration exceeds the frictionless
    # limit; report it flagged instead of clamping so failures stay visible
    return FrictionEstimate(mu=mu, accel_magnitude=a, negative_friction=mu < 0)


def viscosity_from_track(
    track: Track3D, spec: ExperimentSpec, force: bool = False
) -> ViscosityEstimate:
    if spec.kind != "viscosity_settling":
        raise ValueError(f"not a viscosity experiment: {spec.kind}")
    t, h = _vertical_coordinate(track, spec)
    samples = np.column_stack([t, h])
    diag, ok = terminal_regime_check(samples, threshold=spec.terminal_threshold)
    if not ok and not force:
        raise NotTerminal(
            f"velocity_change_ratio={diag.velocity_change_ratio:.4g}, "
            f"quad_over_linear_gain={diag.quad_over_linear_gain:.4g} "
            f"exceed threshold {spec.terminal_threshold}"
        )
    v_t = abs(velocity_of(fit_poly(samples, degree=1)))
    if v_t < 1e-6:
        raise ZeroVelocity(f"terminal velocity {v_t:.3g} m/s below 1e-6")
    eta = stokes_viscosity(spec.r, spec.rho_s, spec.rho_f, spec.g_ref, v_t)
    return ViscosityEstimate(eta=eta, terminal_velocity=v_t, diagnostics=diag)


def stokes_viscosity(r: float, rho_s: float, rho_f: float, g: float, v_t: float) -> float:
    return 2.0 * r * r * (rho_s - rho_f) * g / (9.0 * v_t)


def stokes_terminal_velocity(r: float, rho_s: float, rho_f: float, g: float, eta: float) -> float:
    return 2.0 * r * r * (rho_s - rho_f) * g / (9.0 * eta)


# ---------------------------------------------------------------------------
# material ground truth and aggregation


@dataclass(frozen=True)
class MaterialRange:
    """Ground-truth interval; point values carry a quote-precision tolerance.

    gt_tol is the absolute half-width the quoted value is trusted to
    (half a unit of its last printed digit); interval bounds are taken
    as-is.
    """

    gt_low: float
    gt_high: float
    gt_mid: float | None = None
    gt_tol: float | None = None
    unit: str = "dimensionless"

    def __post_init__(self):
        if self.gt_low > self.gt_high:
            raise ValueError("gt_low must be <= gt_high")

    @property
    def midpoint(self) -> float:
        if self.gt_mid is not None:
            return self.gt_mid
        return 0.5 * (self.gt_low + self.gt_high)


@dataclass(frozen=True)
class MaterialTable:
    ranges: dict[str, MaterialRange]
    fluid_densities: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, name: str) -> MaterialRange:
        return self.ranges[name]

    def to_dict(self) -> dict:
        return {
            "materials": {
                name: {
                    "gt_low": r.gt_low,
                    "gt_high": r.gt_high,
                    "gt_mid": r.gt_mid,
                    "gt_tol": r.gt_tol,
                    "unit": r.unit,
                }
                for name, r in self.ranges.items()
            },
            "fluid_densities_kg_m3": dict(self.fluid_densities),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MaterialTable":
        ranges = {
            name: MaterialRange(
                gt_low=float(r["gt_low"]),
                gt_high=float(r["gt_high"]),
                gt_mid=None if r.get("gt_mid") is None else float(r["gt_mid"]),
                gt_tol=None if r.get("gt_tol") is None else float(r["gt_tol"]),
                unit=str(r.get("unit", "dimensionless")),
            )
            for name, r in doc["materials"].items()
        }
        return cls(ranges=ranges, fluid_densities={
            k: float(v) for k, v in doc.get("fluid_densities_kg_m3", {}).items()
        })

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MaterialTable":
        return cls.from_dict(json.loads(Path(path).read_text()))


# Benchmark ground-truth ranges; viscosities in Pa*s at room temperature,
# friction coefficients dimensionless. Densities are handbook values.
DEFAULT_MATERIALS = MaterialTable(
    ranges={
        "gravity": MaterialRange(9.81, 9.81, gt_tol=0.005, unit="m/s^2"),
        "glycerine": MaterialRange(1.2, 1.2, gt_tol=0.05, unit="Pa.s"),
        "corn_syrup": MaterialRange(5.0, 7.0, gt_mid=6.0, unit="Pa.s"),
        "honey": MaterialRange(14.1, 14.1, gt_tol=0.05, unit="Pa.s"),
        "wood": MaterialRange(0.2, 0.5),
        "rubber": MaterialRange(0.5, 2.0),
        "sandpaper_80": MaterialRange(0.7, 1.1),
        "sandpaper_3000": MaterialRange(0.2, 0.5),
        "plastic": MaterialRange(0.05, 0.2),
    },
    fluid_densities={
        "glycerine": 1260.0,
        "corn_syrup": 1380.0,
        "honey": 1420.0,
    },
)

STEEL_DENSITY = 7850.0

_UNITS = {
    "gravity_freefall": "m/s^2",
    "gravity_parabolic": "m/s^2",
    "friction_incline": "dimensionless",
    "viscosity_settling": "Pa.s",
}


@dataclass(frozen=True)
class ParamEstimate:
    kind: str
    material: str
    per_video: tuple[float, ...]
    mean: float
    std: float
    unit: str
    gt_low: float | None
    gt_high: float | None
    gt_mid: float | None
    in_range: bool | None
    deviation: float | None

    @property
    def n(self) -> int:
        return len(self.per_video)


def aggregate(
    values: Sequence[float],
    material: str,
    table: MaterialTable | None = None,
    kind: str = "",
    sample_std: bool = False,
) -> ParamEstimate:
    """Mean +/- std summary of per-video estimates against ground truth.

    std is the population value (divide by N) unless sample_std is set.
    deviation is the distance from the mean to the nearest range bound,
    zero when inside.
    """
    vals = tuple(float(v) for v in values)
    if not vals:
        raise EmptyInput("no values to aggregate")
    arr = np.asarray(vals)
    mean = float(arr.mean())
    ddof = 1 if (sample_std and len(vals) > 1) else 0
    std = float(arr.std(ddof=ddof))
    gt_low = gt_high = gt_mid = None
    in_range = None
    deviation = None
    if table is not None and material in table.ranges:
        rng = table[material]
        gt_low, gt_high, gt_mid = rng.gt_low, rng.gt_high, rng.midpoint
        if rng.gt_tol is not None:
            tol = rng.gt_tol
        else:
            # bare bounds still get a small guard so noiseless recovery
            # error (quantization, settling transient tail) cannot push a
            # nominally exact estimate out of range
            tol = 1e-4 * max(abs(gt_low), abs(gt_high), 1.0)
        in_range = (gt_low - tol) <= mean <= (gt_high + tol)
        # deviation is always measured against the raw bounds
        if gt_low <= mean <= gt_high:
            deviation = 0.0
        else:
            deviation = min(abs(mean - gt_low), abs(mean - gt_high))
    return ParamEstimate(
        kind=kind,
        material=material,
        per_video=vals,
        mean=mean,
        std=std,
        unit=_UNITS.get(kind, "dimensionless"),
        gt_low=gt_low,
        gt_high=gt_high,
        gt_mid=gt_mid,
        in_range=in_range,
        deviation=deviation,
    )
