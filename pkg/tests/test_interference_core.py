import dataclasses
import math

import numpy as np
import pytest

from homlink.core.errors import InvalidParameterError, OutOfModelDomainError
from homlink.sim.interference_core import (
    PORT_C,
    PORT_D,
    InterferometerSpec,
    averaged_envelope,
    blurred_envelope,
    calibrated_delta,
    coincidence_curve,
    coincidence_probability_closed,
    coincidence_probability_exact,
    delay_from_stretch,
    evolve_state,
    franson_term,
    fringe_period_stretch,
    hom_term,
    phase_averaged_closed,
    stretch_from_delay,
    visibility,
)


def analytic_delta(js):
    return 1.0 / (math.sqrt(2.0) * js.amplitude_sigma)


def test_zero_delay_sends_both_photons_to_d(ideal_spectrum, balanced):
    outcome = evolve_state(ideal_spectrum, balanced, 0.0)
    assert outcome.cd == pytest.approx(0.0, abs=1e-12)
    assert outcome.cc == pytest.approx(0.0, abs=1e-12)
    assert outcome.dd == pytest.approx(1.0, abs=1e-12)
    assert outcome.mean_photons(PORT_D) == pytest.approx(2.0, abs=1e-12)
    assert outcome.mean_photons(PORT_C) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("spec", [InterferometerSpec(), InterferometerSpec(0.3, 0.6), InterferometerSpec(0.9, 0.2)])
@pytest.mark.parametrize("overlap", [1.0, 0.7])
def test_outcomes_sum_to_one(ideal_spectrum, spec, overlap):
    js = dataclasses.replace(ideal_spectrum, mode_overlap=overlap)
    for tau in (0.0, 1.3e-12, -4e-12, 2e-11):
        assert evolve_state(js, spec, tau).total == pytest.approx(1.0, abs=1e-9)


def test_coincidence_is_even_in_delay(ideal_spectrum, balanced):
    for tau in (0.7e-12, 2.9e-12, 8e-12):
        assert coincidence_probability_exact(ideal_spectrum, balanced, tau) == pytest.approx(
            coincidence_probability_exact(ideal_spectrum, balanced, -tau), abs=1e-12
        )


@pytest.mark.parametrize("overlap", [1.0, 0.946])
def test_oracle_matches_closed_form(ideal_spectrum, balanced, overlap):
    js = dataclasses.replace(ideal_spectrum, mode_overlap=overlap)
    delta = analytic_delta(js)
    omega_p = js.pump_angular_frequency
    taus = np.linspace(-5 * delta, 5 * delta, 501)
    exact = np.array([coincidence_probability_exact(js, balanced, t) for t in taus])
    closed = coincidence_probability_closed(delta, omega_p, taus, overlap)
    assert np.max(np.abs(exact - closed)) <= 1e-6


def test_calibrated_delta_recovers_gaussian_width(ideal_spectrum):
    assert calibrated_delta(ideal_spectrum) == pytest.approx(analytic_delta(ideal_spectrum), rel=1e-6)
    # Overlap does not enter the calibration.
    partial = dataclasses.replace(ideal_spectrum, mode_overlap=0.5)
    assert calibrated_delta(partial) == pytest.approx(calibrated_delta(ideal_spectrum), rel=1e-12)


def test_closed_form_is_franson_plus_hom():
    delta, omega_p = 2.7e-12, 2.4e15
    taus = np.linspace(-1e-11, 1e-11, 41)
    np.testing.assert_allclose(
        coincidence_probability_closed(delta, omega_p, taus),
        (franson_term(omega_p, taus) + hom_term(delta, taus)) / 4.0,
        rtol=0, atol=1e-15,
    )


def test_envelope_values():
    delta = 2.7e-12
    assert averaged_envelope(delta, 0.0) == pytest.approx(0.25)
    assert averaged_envelope(delta, 1e-9) == pytest.approx(0.5)
    assert isinstance(averaged_envelope(delta, 0.0), float)


@pytest.mark.parametrize("overlap", [1.0, 0.946, 0.3, 0.0])
def test_envelope_visibility_is_half_the_overlap(overlap):
    delta = 2.7e-12
    far = averaged_envelope(delta, 1e-9, overlap)
    assert visibility(far, averaged_envelope(delta, 0.0, overlap)) == pytest.approx(overlap / 2, abs=1e-12)


def test_phase_sampling_converges_to_envelope():
    delta = 2.7e-12
    for tau in (0.0, 0.5 * delta, 3 * delta):
        sampled = phase_averaged_closed(delta, tau, 10 ** 6, seed=3, overlap=0.946)
        assert sampled == pytest.approx(averaged_envelope(delta, tau, 0.946), abs=1e-3)


def test_phase_sampling_is_reproducible():
    a = phase_averaged_closed(2.7e-12, 1e-12, 500, seed=11, stream=4)
    b = phase_averaged_closed(2.7e-12, 1e-12, 500, seed=11, stream=4)
    assert a == b
    with pytest.raises(InvalidParameterError):
        phase_averaged_closed(2.7e-12, 1e-12, 0, seed=11)


def test_blurred_envelope():
    delta = 2.7e-12
    taus = np.linspace(-2e-11, 2e-11, 81)
    np.testing.assert_array_equal(blurred_envelope(delta, taus, 0.0), averaged_envelope(delta, taus))
    blurred = blurred_envelope(delta, taus, 6e-12)
    # Blur fills the dip in and leaves the wings alone.
    assert blurred[40] > averaged_envelope(delta, 0.0)
    assert blurred[0] == pytest.approx(0.5, abs=1e-12)
    # A tiny window is indistinguishable from no blur.
    np.testing.assert_allclose(blurred_envelope(delta, taus, 1e-18), averaged_envelope(delta, taus), atol=1e-9)


def test_model_domain_guard(ideal_spectrum, balanced):
    with pytest.raises(OutOfModelDomainError):
        evolve_state(ideal_spectrum, balanced, 2e-9)
    with pytest.raises(InvalidParameterError):
        evolve_state(ideal_spectrum, balanced, float("nan"))


def test_unnormalized_spectrum_is_rejected(ideal_spectrum, balanced):
    loud = dataclasses.replace(ideal_spectrum, amplitude_scale=1.1)
    with pytest.raises(InvalidParameterError):
        evolve_state(loud, balanced, 0.0)


def test_unbalanced_splitters_leave_residual_coincidences(ideal_spectrum, balanced):
    unbalanced = InterferometerSpec(bs1_transmittance=0.3, bs2_transmittance=0.5)
    assert coincidence_probability_exact(ideal_spectrum, balanced, 0.0) < 1e-12
    assert coincidence_probability_exact(ideal_spectrum, unbalanced, 0.0) > 1e-3


def test_coincidence_curve(ideal_spectrum, balanced):
    points = coincidence_curve(ideal_spectrum, balanced, [0.0, 2e-12, 1e-11])
    assert [p.tau for p in points] == [0.0, 2e-12, 1e-11]
    for p in points:
        assert p.p_exact == pytest.approx(p.p_closed, abs=1e-6)
    assert points[0].p_envelope == pytest.approx(0.25)


def test_visibility():
    assert visibility(1.0, 0.5) == 0.5
    assert visibility(2.0, 2.0) == 0.0
    with pytest.raises(InvalidParameterError):
        visibility(0.0, 0.0)


def test_stretch_delay_conversion():
    assert delay_from_stretch(1e-3, 1.8) == pytest.approx(6.004e-12, rel=1e-3)
    stretches = np.linspace(-5e-3, 5e-3, 11)
    np.testing.assert_allclose(stretch_from_delay(delay_from_stretch(stretches, 1.8), 1.8), stretches, rtol=1e-12)
    assert fringe_period_stretch(783e-9, 1.8) == pytest.approx(435e-9, rel=1e-12)
    with pytest.raises(InvalidParameterError):
        delay_from_stretch(1e-3, 1.0)


def test_interferometer_validation():
    with pytest.raises(InvalidParameterError):
        InterferometerSpec(bs1_transmittance=1.2)
    with pytest.raises(InvalidParameterError):
        InterferometerSpec(effective_group_index=0.9)
