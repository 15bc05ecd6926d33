"""Least-squares polynomial fits of coordinate-vs-time data.

Times are centered at their mean before solving so the design stays well
conditioned on narrow windows, then coefficients are shifted back to the
raw time origin. The default estimator is ordinary least squares; a Huber
IRLS mode is available for outlier-heavy real tracks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularDesign, TooFewSamples, WrongDegree

_HUBER_TUNING = 1.345
_IRLS_ITERS = 20


@dataclass(frozen=True)
class PolyFit:
    """coeffs are (c0, c1[, c2]) for x(t) = c0 + c1*t + c2*t**2."""

    degree: int
    coeffs: tuple[float, ...]
    residual_rms: float
    n_samples: int
    t_span: float

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ValueError("degree must be 1 or 2")
        if len(self.coeffs) != self.degree + 1:
            raise ValueError("coefficient count does not match degree")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("coefficients must be finite")

    def predict(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t) + self.coeffs[0]
        for k, c in enumerate(self.coeffs[1:], start=1):
            out = out + c * t**k
        return out


@dataclass(frozen=True)
class FitDiagnostics:
    quad_over_linear_gain: float
    max_gap_s: float
    velocity_change_ratio: float


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (t, x) pairs")
    return arr[:, 0], arr[:, 1]


def _shift_coeffs(centered: np.ndarray, mean_t: float) -> tuple[float, ...]:
    # expand a0 + a1*(t - m) + a2*(t - m)^2 back to powers of t
    if len(centered) == 2:
        a0, a1 = centered
        return (float(a0 - a1 * mean_t), float(a1))
    a0, a1, a2 = centered
    return (
        float(a0 - a1 * mean_t + a2 * mean_t * mean_t),
        float(a1 - 2.0 * a2 * mean_t),
        float(a2),
    )


def fit_poly(samples: Sequence, degree: int, robust: bool = False) -> PolyFit:
    """Fit x(t) with a degree-1 or degree-2 polynomial."""
    if degree not in (1, 2):
        raise WrongDegree(f"degree must be 1 or 2, got {degree}")
    t, x = _as_arrays(samples)
    n = len(t)
    if n < degree + 2:
        raise TooFewSamples(f"need >= {degree + 2} samples for degree {degree}, got {n}")
    if len(np.unique(t)) != n:
        raise SingularDesign("duplicate timestamps")
    mean_t = float(t.mean())
    tc = t - mean_t
    cols = [np.ones_like(tc), tc]
    if degree == 2:
        cols.append(tc * tc)
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    if robust:
        resid = x - A @ coef
        for _ in range(_IRLS_ITERS):
            scale = np.median(np.abs(resid)) / 0.6745
            if scale < 1e-300:
                break
            c = _HUBER_TUNING * scale
            w = np.minimum(1.0, c / np.maximum(np.abs(resid), 1e-300))
            sw = np.sqrt(w)
            coef, *_ = np.linalg.lstsq(A * sw[:, None], x * sw, rcond=None)
            resid = x - A @ coef
    resid = x - A @ coef
    return PolyFit(
        degree=degree,
        coeffs=_shift_coeffs(coef, mean_t),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        n_samples=n,
        t_span=float(t.max() - t.min()),
    )


def acceleration_of(fit: PolyFit) -> float:
    """Signed constant acceleration, 2 * c2."""
    if fit.degree != 2:
        raise WrongDegree("acceleration needs a degree-2 fit")
    return 2.0 * fit.coeffs[2]


def velocity_of(fit: PolyFit) -> float:
    """Slope of a linear fit."""
    if fit.degree != 1:
        raise WrongDegree("velocity needs a degree-1 fit")
    return fit.coeffs[1]


def terminal_regime_check(
    samples: Sequence, threshold: float = 0.05
) -> tuple[FitDiagnostics, bool]:
    """Decide whether a track is already in the constant-velocity regime.

    Passes when the quadratic term implies a relative velocity change below
    the threshold over the window and adding it barely improves the fit.
    """
    t, x = _as_arrays(samples)
    if len(t) < 4:
        raise TooFewSamples(f"need >= 4 samples, got {len(t)}")
    lin = fit_poly(samples, degree=1)
    quad = fit_poly(samples, degree=2)
    # residuals at machine-rounding scale are an exact line, not a transient
    floor = 1e-12 * max(float(np.abs(x).max()), abs(lin.coeffs[1]) * lin.t_span)
    gain = 0.0
    if lin.residual_rms > floor:
        gain = max(0.0, (lin.residual_rms - quad.residual_rms) / lin.residual_rms)
    accel = 2.0 * quad.coeffs[2]
    slope = lin.coeffs[1]
    delta_v = abs(accel) * lin.t_span
    if delta_v * lin.t_span <= floor:
        ratio = 0.0
    elif slope == 0.0:
        ratio = math.inf
    else:
        ratio = delta_v / abs(slope)
    order = np.sort(t)
    max_gap = float(np.max(np.diff(order))) if len(order) > 1 else 0.0
    diag = FitDiagnostics(
        quad_over_linear_gain=gain, max_gap_s=max_gap, velocity_change_ratio=ratio
    )
    return diag, (ratio < threshold and gain < threshold)
