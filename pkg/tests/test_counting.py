import dataclasses

import numpy as np
import pytest

from homlink.commands.commands_lib.scan_commands import simulate_scan
from homlink.core.errors import DegenerateDataError, InvalidParameterError
from homlink.sim.counting import (
    CoincidenceSetup,
    DetectorMode,
    DetectorModel,
    calibrate_excess_accidentals,
    expected_rates,
    mean_accidentals,
    net_visibility,
    raw_visibility,
    simulate_point,
)
from homlink.sim.interference_core import evolve_state


@pytest.fixture
def lossless_setup():
    detector = DetectorModel(efficiency=1.0)
    return CoincidenceSetup(det_c=detector, det_d=detector, integration_time=100.0, pair_rate_at_bs2=8.0)


def test_default_rates(default_setup):
    signal, accidentals = expected_rates(default_setup, 0.5)
    assert signal == pytest.approx(560.0)
    assert accidentals == pytest.approx(0.832, rel=1e-9)


def test_zero_delay_outcome_moves_photons_to_d(default_setup, ideal_spectrum, balanced):
    outcome = evolve_state(ideal_spectrum, balanced, 0.0)
    signal, accidentals = expected_rates(default_setup, outcome.cd, outcome)
    assert signal == pytest.approx(0.0, abs=1e-9)
    # C sees only its dark counts; D sees both photons of every pair.
    assert accidentals == pytest.approx(2000.0 * (2e5 * 0.08 * 2 * 2e-9 + 2e-5), rel=1e-9)


def test_rates_are_linear(default_setup):
    one = expected_rates(default_setup, 0.3).signal
    assert expected_rates(default_setup, 0.6).signal == pytest.approx(2 * one, rel=1e-12)
    doubled = dataclasses.replace(default_setup, pair_rate_at_bs2=4e5)
    assert expected_rates(doubled, 0.3).signal == pytest.approx(2 * one, rel=1e-12)
    assert expected_rates(default_setup, 0.0).signal == 0.0


def test_gated_trigger_detector_is_rejected():
    gated = DetectorModel(efficiency=0.1, mode=DetectorMode.GATED)
    with pytest.raises(InvalidParameterError):
        CoincidenceSetup(det_c=gated, det_d=gated)


def test_dark_clicks_per_window():
    assert DetectorModel(0.1, DetectorMode.GATED, dark_prob_per_ns=1e-5).dark_clicks_in_window(2e-9) == pytest.approx(2e-5)
    assert DetectorModel(0.1, dark_rate=2000.0).dark_clicks_in_window(2e-9) == pytest.approx(4e-6)


def test_poisson_statistics(lossless_setup):
    draws = np.array([
        simulate_point(lossless_setup, 0.5, seed, accidentals=False).sampled_total for seed in range(10_000)
    ])
    assert simulate_point(lossless_setup, 0.5, 0, accidentals=False).expected_signal == pytest.approx(400.0)
    assert draws.mean() == pytest.approx(400.0, abs=1.0)
    assert draws.var() / draws.mean() == pytest.approx(1.0, abs=0.07)


def test_sampling_is_deterministic(default_setup):
    first = simulate_point(default_setup, 0.4, seed=9, stream=3, delta_l=1e-3, tau=6e-12)
    again = simulate_point(default_setup, 0.4, seed=9, stream=3, delta_l=1e-3, tau=6e-12)
    assert first == again
    others = {simulate_point(default_setup, 0.4, seed=9, stream=s).sampled_total for s in range(10)}
    assert len(others) > 1
    assert isinstance(first.sampled_total, int)


def test_noiseless_point_keeps_the_mean(default_setup):
    record = simulate_point(default_setup, 0.25, seed=1, noiseless=True)
    assert record.sampled_total == record.expected_total
    bare = simulate_point(default_setup, 0.25, seed=1, noiseless=True, accidentals=False)
    assert bare.expected_accidentals == 0.0
    assert bare.sampled_total == pytest.approx(560.0 * 0.5 * 50.0)


def test_accidental_calibration(default_setup):
    calibrated = calibrate_excess_accidentals(default_setup, 0.205)
    signal, accidentals = expected_rates(calibrated, 0.5)
    assert accidentals / (signal + accidentals) == pytest.approx(0.205, rel=1e-12)
    assert calibrated.excess_accidental_rate == pytest.approx(143.57, abs=0.01)

    with pytest.raises(InvalidParameterError):
        calibrate_excess_accidentals(default_setup, 1e-4)
    with pytest.raises(InvalidParameterError):
        calibrate_excess_accidentals(default_setup, 1.0)

    dark = dataclasses.replace(default_setup, pair_rate_at_bs2=0.0)
    assert calibrate_excess_accidentals(dark, 0.205).excess_accidental_rate == 0.0


def test_default_visibilities(default_config, reseed):
    raws, nets = [], []
    for seed in range(50):
        result = simulate_scan(reseed(default_config, seed))
        raw = raw_visibility(result.records)
        net = net_visibility(result.records, mean_accidentals(result.records))
        assert net >= raw
        raws.append(raw)
        nets.append(net)
    assert np.mean(raws) == pytest.approx(0.376, abs=0.03)
    assert np.mean(nets) == pytest.approx(0.473, abs=0.03)


def test_no_dip_means_no_visibility(default_setup):
    records = [
        simulate_point(default_setup, 0.5, seed=0, delta_l=x, noiseless=True)
        for x in np.linspace(-5e-3, 5e-3, 11)
    ]
    assert raw_visibility(records) == pytest.approx(0.0, abs=1e-6)


def test_visibility_needs_records(default_setup):
    records = [simulate_point(default_setup, 0.5, seed=0, delta_l=x) for x in (0.0, 1e-3, 2e-3)]
    with pytest.raises(DegenerateDataError):
        raw_visibility(records)
    with pytest.raises(DegenerateDataError):
        mean_accidentals([])
