import dataclasses

import pytest

from homlink.core.settings_manager import SettingsManager
from homlink.sim.counting import CoincidenceSetup, DetectorMode, DetectorModel
from homlink.sim.interference_core import InterferometerSpec
from homlink.sim.spectral_source import SourceSpec, make_joint_spectrum


@pytest.fixture
def default_source():
    return SourceSpec(
        pump_wavelength=783e-9,
        filter_fwhm_wavelength=0.8e-9,
        pair_rate=2e5,
        mode_overlap=0.946,
        coherence_time_override=4.25e-12,
    )


@pytest.fixture
def ideal_spectrum(default_source):
    return dataclasses.replace(make_joint_spectrum(default_source), mode_overlap=1.0)


@pytest.fixture
def balanced():
    return InterferometerSpec()


@pytest.fixture
def default_setup():
    return CoincidenceSetup(
        det_c=DetectorModel(efficiency=0.07, dark_rate=2000.0, label="C"),
        det_d=DetectorModel(efficiency=0.08, mode=DetectorMode.GATED, dark_prob_per_ns=1e-5, label="D"),
        window=2e-9,
        integration_time=50.0,
        pair_rate_at_bs2=2e5,
    )


@pytest.fixture
def default_config():
    return SettingsManager().experiment_config()


@pytest.fixture
def reseed():
    """Same experiment with another run seed."""
    def _reseed(cfg, seed):
        return dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, seed=seed))
    return _reseed
