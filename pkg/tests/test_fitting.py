import numpy as np
import pytest

from physbench.errors import SingularDesign, TooFewSamples, WrongDegree
from physbench.fitting import (
    PolyFit,
    acceleration_of,
    fit_poly,
    terminal_regime_check,
    velocity_of,
)
from physbench.rng import Pcg32


def _samples(t, x):
    return np.column_stack([t, x])


def test_exact_quadratic_recovery():
    t = np.arange(0, 0.6, 0.1)
    x = 1 + 2 * t + 3 * t**2
    fit = fit_poly(_samples(t, x), degree=2)
    assert fit.coeffs == pytest.approx((1.0, 2.0, 3.0), abs=1e-10)
    assert fit.residual_rms < 1e-12


def test_constant_data_linear_fit():
    t = np.linspace(0, 1, 7)
    fit = fit_poly(_samples(t, np.full_like(t, 5.0)), degree=1)
    assert velocity_of(fit) == pytest.approx(0.0, abs=1e-12)
    assert fit.coeffs[0] == pytest.approx(5.0, abs=1e-12)


def test_exact_linear_slope():
    t = np.linspace(0, 2, 40)
    x = 1.0 - 0.2993 * t
    fit = fit_poly(_samples(t, x), degree=1)
    assert velocity_of(fit) == pytest.approx(-0.2993, abs=1e-12)


def test_noisy_freefall_montecarlo():
    # 60 samples over 0.25 s, sigma = 1 mm; 2*c2 stays within 0.4 of -9.81
    t = np.linspace(0, 0.25, 60)
    devs = []
    for seed in range(50):
        rng = Pcg32(seed, stream=2)
        x = -0.5 * 9.81 * t**2 + np.array(rng.normals(len(t), 0.0, 1e-3))
        fit = fit_poly(_samples(t, x), degree=2)
        devs.append(abs(acceleration_of(fit) + 9.81))
    assert max(devs) < 0.4


def test_acceleration_examples():
    fit = PolyFit(2, (0.0, 0.0, -4.905), 0.0, 10, 1.0)
    assert acceleration_of(fit) == pytest.approx(-9.81)
    fit = PolyFit(2, (3.0, 7.0, 0.0), 0.0, 10, 1.0)
    assert acceleration_of(fit) == 0.0


def test_velocity_example():
    fit = PolyFit(1, (2.0, -0.3), 0.0, 10, 1.0)
    assert velocity_of(fit) == pytest.approx(-0.3)


def test_wrong_degree_errors():
    lin = PolyFit(1, (0.0, 1.0), 0.0, 5, 1.0)
    quad = PolyFit(2, (0.0, 1.0, 1.0), 0.0, 5, 1.0)
    with pytest.raises(WrongDegree):
        acceleration_of(lin)
    with pytest.raises(WrongDegree):
        velocity_of(quad)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        fit_poly([(0.0, 1.0), (0.1, 2.0), (0.2, 3.0)], degree=2)


def test_duplicate_times_singular():
    with pytest.raises(SingularDesign):
        fit_poly([(0.0, 1.0), (0.0, 2.0), (0.1, 3.0), (0.2, 4.0)], degree=1)


def test_residual_invariant_under_time_translation():
    rng = Pcg32(3, stream=2)
    t = np.linspace(0, 1, 30)
    x = 0.3 - 1.2 * t + 4.5 * t**2 + np.array(rng.normals(30, 0.0, 0.01))
    a = fit_poly(_samples(t, x), degree=2)
    b = fit_poly(_samples(t + 1234.5, x), degree=2)
    assert b.residual_rms == pytest.approx(a.residual_rms, rel=1e-9)


def test_conditioning_irregular_spacing():
    # exact quadratic on clustered, irregular samples away from t = 0
    rng = Pcg32(6, stream=2)
    t = np.sort(np.array([100.0 + rng.uniform(0, 0.05) ** 2 * 200 for _ in range(40)]))
    t = np.unique(t)
    x = 2.0 - 3.0 * t + 0.25 * t**2
    fit = fit_poly(_samples(t, x), degree=2)
    assert fit.coeffs[2] == pytest.approx(0.25, rel=1e-9)
    assert acceleration_of(fit) == pytest.approx(0.5, rel=1e-9)


def test_acceleration_linear_in_data():
    rng = Pcg32(4, stream=2)
    t = np.linspace(0, 1, 40)
    x1 = np.array(rng.normals(40))
    x2 = np.array(rng.normals(40))
    a, b = 2.5, -1.25
    acc1 = acceleration_of(fit_poly(_samples(t, x1), 2))
    acc2 = acceleration_of(fit_poly(_samples(t, x2), 2))
    acc = acceleration_of(fit_poly(_samples(t, a * x1 + b * x2), 2))
    assert acc == pytest.approx(a * acc1 + b * acc2, rel=1e-9, abs=1e-12)


def test_quadratic_never_increases_residual():
    rng = Pcg32(5, stream=2)
    for _ in range(20):
        t = np.linspace(0, 1, 12)
        x = np.array(rng.normals(12))
        lin = fit_poly(_samples(t, x), 1)
        quad = fit_poly(_samples(t, x), 2)
        assert quad.residual_rms <= lin.residual_rms + 1e-12


def test_robust_mode_resists_outliers():
    t = np.linspace(0, 1, 60)
    x = 2.0 + 3.0 * t
    x_corrupt = x.copy()
    x_corrupt[7] += 50.0
    x_corrupt[41] -= 80.0
    plain = fit_poly(_samples(t, x_corrupt), 1)
    robust = fit_poly(_samples(t, x_corrupt), 1, robust=True)
    assert abs(velocity_of(robust) - 3.0) < abs(velocity_of(plain) - 3.0)
    assert velocity_of(robust) == pytest.approx(3.0, abs=0.05)


def test_terminal_check_passes_linear():
    t = np.linspace(0, 1, 30)
    diag, ok = terminal_regime_check(_samples(t, 0.5 - 0.3 * t))
    assert ok
    assert diag.quad_over_linear_gain == pytest.approx(0.0, abs=1e-9)


def test_terminal_check_fails_freefall():
    t = np.linspace(0, 1, 30)
    diag, ok = terminal_regime_check(_samples(t, -0.5 * 9.81 * t**2))
    assert not ok
    assert diag.velocity_change_ratio > 1.0


def test_terminal_check_exponential_settling():
    # transient trimmed after five time constants passes at 0.05 once the
    # track carries measurement-level jitter (as any pixel track does)
    tau, v_t = 0.02, 0.3
    t0 = 5 * tau
    t = t0 + np.linspace(0, 1, 240)
    rng = Pcg32(12, stream=2)
    jitter = np.array(rng.normals(len(t), 0.0, 2e-5))
    y = v_t * (t - tau * (1 - np.exp(-t / tau))) + jitter
    diag, ok = terminal_regime_check(_samples(t - t0, y), threshold=0.05)
    assert ok
    assert diag.velocity_change_ratio < 0.05
    # untrimmed transient fails
    t = np.linspace(0, 5 * tau, 48)
    y = v_t * (t - tau * (1 - np.exp(-t / tau))) + jitter[:48]
    _, ok = terminal_regime_check(_samples(t, y), threshold=0.05)
    assert not ok


def test_terminal_check_needs_four_samples():
    with pytest.raises(TooFewSamples):
        terminal_regime_check([(0.0, 1.0), (0.1, 2.0), (0.2, 3.0)])


def test_max_gap_reported():
    t = np.array([0.0, 0.1, 0.2, 0.9, 1.0])
    diag, _ = terminal_regime_check(_samples(t, 1.0 - 0.1 * t))
    assert diag.max_gap_s == pytest.approx(0.7)
