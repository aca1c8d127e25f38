import dataclasses
import math

import numpy as np
import pytest

from homlink.commands.commands_lib.scan_commands import simulate_scan
from homlink.core.errors import DegenerateDataError, InvalidParameterError
from homlink.sim import dip_fit
from homlink.sim.dip_fit import (
    DipFit,
    dip_jacobian,
    dip_model,
    dip_width_prediction,
    fit_gaussian_dip,
    initial_guess,
    oracle_dip_fwhm,
    visibilities_from_fit,
    weighted_residual_norm,
)
from homlink.sim.fiber_channel import drift_during_integration
from homlink.sim.interference_core import averaged_envelope, blurred_envelope, calibrated_delta, delay_from_stretch
from homlink.sim.spectral_source import make_joint_spectrum

MM = 1e-3
TRUE_PARAMS = (1000.0, 500.0, 0.0, 0.6 * MM)


def synthetic_points(params=TRUE_PARAMS, points=41, half_span=5.5 * MM):
    x = np.linspace(-half_span, half_span, points)
    return x, dip_model(params, x)


def noisy_points(seed=7):
    x, y = synthetic_points((35000.0, 13000.0, 0.3 * MM, 0.45 * MM), points=23)
    return x, np.random.default_rng(seed).poisson(y).astype(float)


def test_noiseless_dip_is_recovered():
    x, y = synthetic_points()
    fit = fit_gaussian_dip(zip(x, y), weights="none")
    assert fit.converged
    assert fit.baseline == pytest.approx(1000.0, rel=1e-9)
    assert fit.depth == pytest.approx(500.0, rel=1e-9)
    assert fit.center == pytest.approx(0.0, abs=1e-12)
    assert fit.width == pytest.approx(0.6 * MM, rel=1e-9)
    assert fit.fwhm == pytest.approx(2 * np.sqrt(np.log(2)) * 0.6 * MM, rel=1e-9)


def test_poisson_weighting_on_exact_data():
    x, y = synthetic_points((1000.0, 400.0, 0.2 * MM, 0.45 * MM))
    fit = fit_gaussian_dip(zip(x, y))
    np.testing.assert_allclose(fit.params, [1000.0, 400.0, 0.2 * MM, 0.45 * MM], rtol=1e-7)


def test_jacobian_matches_finite_differences():
    params = np.array([1000.0, 400.0, 0.2 * MM, 0.45 * MM])
    x = np.linspace(-2 * MM, 2 * MM, 17)
    analytic = dip_jacobian(params, x)
    for k in range(4):
        step = 1e-6 * abs(params[k])
        up, down = params.copy(), params.copy()
        up[k] += step
        down[k] -= step
        numeric = (dip_model(up, x) - dip_model(down, x)) / (2 * step)
        np.testing.assert_allclose(analytic[:, k], numeric, rtol=1e-6, atol=1e-6 * np.max(np.abs(numeric)))


def test_flat_data_has_no_dip():
    x = np.linspace(-5.5 * MM, 5.5 * MM, 23)
    fit = fit_gaussian_dip(zip(x, np.full(x.size, 1000.0)))
    assert fit.baseline == pytest.approx(1000.0, rel=1e-6)
    assert fit.depth <= 1e-6
    raw, _ = visibilities_from_fit(fit, 0.0)
    assert raw == pytest.approx(0.0, abs=1e-9)


def test_fit_is_invariant_under_count_scaling():
    x, y = noisy_points()
    fit = fit_gaussian_dip(zip(x, y))
    scaled = fit_gaussian_dip(zip(x, 3.0 * y))
    assert scaled.baseline == pytest.approx(3 * fit.baseline, rel=1e-6)
    assert scaled.depth == pytest.approx(3 * fit.depth, rel=1e-6)
    assert scaled.width == pytest.approx(fit.width, rel=1e-6)
    assert scaled.depth / scaled.baseline == pytest.approx(fit.depth / fit.baseline, rel=1e-6)


def test_fit_is_invariant_under_translation():
    x, y = noisy_points()
    fit = fit_gaussian_dip(zip(x, y))
    shifted = fit_gaussian_dip(zip(x + 2.0 * MM, y))
    assert shifted.center == pytest.approx(fit.center + 2.0 * MM, rel=1e-6)
    assert shifted.width == pytest.approx(fit.width, rel=1e-6)
    assert shifted.depth == pytest.approx(fit.depth, rel=1e-6)


def test_fit_improves_on_initial_guess():
    x, y = noisy_points(seed=12)
    fit = fit_gaussian_dip(zip(x, y))
    assert weighted_residual_norm(fit.params, x, y) <= weighted_residual_norm(initial_guess(x, y), x, y)
    assert fit.residual_norm == pytest.approx(weighted_residual_norm(fit.params, x, y), rel=1e-9)
    assert all(v >= 0.0 for v in fit.covariance_diag)


def test_initial_guess():
    x, y = synthetic_points()
    baseline, depth, center, width = initial_guess(x, y)
    assert baseline == pytest.approx(1000.0, rel=1e-6)
    assert depth == pytest.approx(500.0, rel=1e-6)
    assert center == pytest.approx(0.0, abs=1e-15)
    assert width > 0.0


def test_degenerate_data():
    with pytest.raises(DegenerateDataError):
        fit_gaussian_dip([(0.0, 1.0)] * 4)
    with pytest.raises(DegenerateDataError):
        fit_gaussian_dip([(1.0, float(k)) for k in range(10)])
    with pytest.raises(DegenerateDataError):
        fit_gaussian_dip([(float(k), 0.0) for k in range(10)])
    with pytest.raises(InvalidParameterError):
        fit_gaussian_dip([(float(k), 1.0) for k in range(10)], weights="cubic")


def test_visibility_coverage(default_config, reseed):
    hits = 0
    seeds = range(200)
    for seed in seeds:
        result = simulate_scan(reseed(default_config, seed))
        totals = [r.expected_total for r in result.records]
        truth = 1.0 - min(totals) / max(totals)
        raw, _ = visibilities_from_fit(result.fit, 0.0)
        hits += abs(raw - truth) <= 0.03
    assert hits >= 0.95 * len(seeds)


def test_width_prediction():
    assert dip_width_prediction(4.25e-12, 1.8) == pytest.approx(1.00e-3, abs=0.01e-3)
    assert dip_width_prediction(4.25e-12, 1.0) == pytest.approx(1.80e-3, abs=0.01e-3)
    assert dip_width_prediction(8.5e-12, 1.8) == pytest.approx(2 * dip_width_prediction(4.25e-12, 1.8))
    with pytest.raises(InvalidParameterError):
        dip_width_prediction(4.25e-12, 0.5)


def test_visibilities_from_fit():
    fit = DipFit(1.0, 0.376, 0.0, 1e-3, 0.0, True, (0.0, 0.0, 0.0, 0.0))
    raw, net = visibilities_from_fit(fit, 0.205)
    assert raw == pytest.approx(0.376)
    assert net == pytest.approx(0.473, abs=5e-4)
    assert visibilities_from_fit(fit, 0.0) == (raw, raw)
    full = dataclasses.replace(fit, depth=1.0)
    assert visibilities_from_fit(full, 0.0) == (1.0, 1.0)
    with pytest.raises(DegenerateDataError):
        visibilities_from_fit(fit, 1.0)
    with pytest.raises(DegenerateDataError):
        visibilities_from_fit(dataclasses.replace(fit, baseline=0.0), 0.0)


def test_fitted_width_matches_model_without_drift(default_config):
    delta = calibrated_delta(make_joint_spectrum(default_config.source))
    n_eff = default_config.interferometer.effective_group_index
    x = np.linspace(-5.5 * MM, 5.5 * MM, 23)
    y = 1e4 * np.asarray(averaged_envelope(delta, delay_from_stretch(x, n_eff), 0.946))
    fit = fit_gaussian_dip(zip(x, y), weights="none")
    assert fit.fwhm == pytest.approx(oracle_dip_fwhm(delta, n_eff), rel=0.02)
    assert fit.fwhm == pytest.approx(0.7515e-3, rel=0.01)


def test_drift_blur_broadens_the_dip(default_config):
    delta = calibrated_delta(make_joint_spectrum(default_config.source))
    n_eff = default_config.interferometer.effective_group_index
    drift = drift_during_integration(default_config.fiber_a, 1.0, default_config.setup.integration_time)
    blur = delay_from_stretch(drift, n_eff)
    x = np.linspace(-5.5 * MM, 5.5 * MM, 201)
    y = 1e4 * np.asarray(blurred_envelope(delta, delay_from_stretch(x, n_eff), blur, 0.946))
    fit = fit_gaussian_dip(zip(x, y), weights="none")
    assert fit.fwhm > 1.2 * oracle_dip_fwhm(delta, n_eff)
    assert fit.fwhm >= dip_width_prediction(4.25e-12, n_eff)


def test_depth_never_exceeds_baseline():
    x = np.linspace(-5.5 * MM, 5.5 * MM, 23)
    rng = np.random.default_rng(3)
    for _ in range(20):
        y = rng.poisson(2.0, x.size).astype(float)
        if not y.any():
            continue
        fit = fit_gaussian_dip(zip(x, y))
        assert 0.0 <= fit.depth <= fit.baseline


def test_convergence_requires_a_small_gradient(monkeypatch):
    x, y = noisy_points()
    assert fit_gaussian_dip(zip(x, y)).converged

    monkeypatch.setattr(dip_fit, "GRADIENT_TOLERANCE", 0.0)
    strict = fit_gaussian_dip(zip(x, y))
    assert not strict.converged
    assert "scaled gradient" in strict.message
    assert strict.evaluations <= dip_fit.MAX_EVALUATIONS + 1


def test_placeholder_fit_has_no_visibility():
    fit = DipFit.unconverged("all counts are zero")
    assert not fit.converged
    assert math.isnan(fit.baseline) and math.isnan(fit.depth)
    assert fit.message == "all counts are zero"
    with pytest.raises(DegenerateDataError):
        visibilities_from_fit(fit, 0.0)
