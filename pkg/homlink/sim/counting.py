# sim/counting.py
"""
Detection statistics for the coincidence measurement.

Detector C runs free and triggers the gate of detector D; a coincidence is a D
click inside the window opened by a C click. Expected counts are Poisson
sampled with a Philox generator keyed by (seed, point index).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Sequence

from homlink.core.errors import DegenerateDataError, InvalidParameterError
from homlink.sim._base import counter_rng, require_fraction, require_non_negative, require_positive
from homlink.sim.dip_fit import fit_gaussian_dip, visibilities_from_fit
from homlink.sim.interference_core import PORT_C, PORT_D, OutcomeProbabilities
from homlink.utils.debug_logger import get_logger

log = get_logger("counting")

NS = 1e-9
DEFAULT_WINDOW = 2.0 * NS
DEFAULT_INTEGRATION_TIME = 50.0


class DetectorMode(Enum):
    FREE_RUNNING = "free_running"
    GATED = "gated"


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float
    mode: DetectorMode = DetectorMode.FREE_RUNNING
    dark_rate: float = 0.0
    dark_prob_per_ns: float = 0.0
    label: str = ""

    def __post_init__(self):
        require_fraction("efficiency", self.efficiency)
        require_non_negative("dark_rate", self.dark_rate)
        require_non_negative("dark_prob_per_ns", self.dark_prob_per_ns)
        if not isinstance(self.mode, DetectorMode):
            raise InvalidParameterError(f"unknown detector mode {self.mode!r}")

    def dark_clicks_in_window(self, window: float) -> float:
        """Mean number of dark clicks inside one window of ``window`` seconds."""
        if self.mode is DetectorMode.GATED:
            return self.dark_prob_per_ns * window / NS
        return self.dark_rate * window


@dataclass(frozen=True)
class CoincidenceSetup:
    det_c: DetectorModel
    det_d: DetectorModel
    window: float = DEFAULT_WINDOW
    integration_time: float = DEFAULT_INTEGRATION_TIME
    pair_rate_at_bs2: float = 0.0
    excess_accidental_rate: float = 0.0

    def __post_init__(self):
        require_positive("window", self.window)
        require_positive("integration_time", self.integration_time)
        require_non_negative("pair_rate_at_bs2", self.pair_rate_at_bs2)
        require_non_negative("excess_accidental_rate", self.excess_accidental_rate)
        if self.det_c.mode is not DetectorMode.FREE_RUNNING:
            raise InvalidParameterError("detector c triggers the coincidence and must be free-running")


@dataclass(frozen=True)
class CountRecord:
    delta_l: float
    tau: float
    p_model: float
    expected_signal: float
    expected_accidentals: float
    sampled_total: int | float
    seed: int

    @property
    def expected_total(self) -> float:
        return self.expected_signal + self.expected_accidentals


class ExpectedRates(NamedTuple):
    signal: float
    accidentals: float


def expected_rates(
    setup: CoincidenceSetup, p_coinc: float, outcome: OutcomeProbabilities | None = None
) -> ExpectedRates:
    """
    Coincidence rates in counts/s.

    The photon number reaching each port per pair is taken from ``outcome``
    when given, otherwise one photon per port (the phase-averaged balanced
    case).
    """
    p_coinc = require_fraction("p_coinc", p_coinc)
    rate = setup.pair_rate_at_bs2
    eta_c, eta_d = setup.det_c.efficiency, setup.det_d.efficiency
    n_c = outcome.mean_photons(PORT_C) if outcome is not None else 1.0
    n_d = outcome.mean_photons(PORT_D) if outcome is not None else 1.0

    signal = rate * eta_c * eta_d * p_coinc
    triggers = rate * eta_c * n_c + setup.det_c.dark_rate
    false_d = rate * eta_d * n_d * setup.window + setup.det_d.dark_clicks_in_window(setup.window)
    accidentals = triggers * false_d + setup.excess_accidental_rate
    return ExpectedRates(signal=signal, accidentals=accidentals)


def calibrate_excess_accidentals(
    setup: CoincidenceSetup, fraction: float, p_baseline: float = 0.5
) -> CoincidenceSetup:
    """
    Return a setup whose accidentals make up ``fraction`` of the baseline coincidences.

    The uncorrelated background beyond the detector model is carried in
    ``excess_accidental_rate``.
    """
    fraction = require_fraction("fraction", fraction)
    if fraction >= 1.0:
        raise InvalidParameterError("accidental fraction must be < 1")
    base = replace(setup, excess_accidental_rate=0.0)
    signal, detector_accidentals = expected_rates(base, p_baseline)
    if signal == 0.0:
        log.warning("no baseline signal; accidental fraction cannot be calibrated")
        return base
    target = fraction * signal / (1.0 - fraction)
    if detector_accidentals > target:
        raise InvalidParameterError(
            f"detector accidentals ({detector_accidentals:.4g}/s) already exceed the requested "
            f"fraction {fraction} of the baseline ({target:.4g}/s)"
        )
    log.debug(f"excess accidental rate {target - detector_accidentals:.6g}/s for fraction {fraction}")
    return replace(base, excess_accidental_rate=target - detector_accidentals)


def simulate_point(
    setup: CoincidenceSetup,
    p_coinc: float,
    seed: int,
    stream: int = 0,
    delta_l: float = 0.0,
    tau: float = 0.0,
    outcome: OutcomeProbabilities | None = None,
    noiseless: bool = False,
    accidentals: bool = True,
) -> CountRecord:
    """
    One scan point: expected counts over the integration and a Poisson draw.

    ``noiseless`` stores the expected total itself instead of a draw;
    ``accidentals=False`` keeps only the pair coincidences.
    """
    rates = expected_rates(setup, p_coinc, outcome)
    expected_signal = rates.signal * setup.integration_time
    expected_accidentals = rates.accidentals * setup.integration_time if accidentals else 0.0
    mean = expected_signal + expected_accidentals
    if noiseless:
        sampled = mean
    else:
        sampled = int(counter_rng(seed, stream).poisson(mean))
    return CountRecord(
        delta_l=delta_l,
        tau=tau,
        p_model=p_coinc,
        expected_signal=expected_signal,
        expected_accidentals=expected_accidentals,
        sampled_total=sampled,
        seed=seed,
    )


def _fit_records(records: Sequence[CountRecord]):
    if len(records) < 5:
        raise DegenerateDataError(f"visibility needs at least 5 records, got {len(records)}")
    return fit_gaussian_dip([(r.delta_l, r.sampled_total) for r in records])


def mean_accidentals(records: Sequence[CountRecord]) -> float:
    """Expected accidental counts per point, averaged over the scan."""
    if not records:
        raise DegenerateDataError("no records")
    return sum(r.expected_accidentals for r in records) / len(records)


def raw_visibility(records: Sequence[CountRecord]) -> float:
    raw, _ = visibilities_from_fit(_fit_records(records), 0.0)
    return raw


def net_visibility(records: Sequence[CountRecord], accidental_level: float) -> float:
    """(B - min) / (B - accidentals) of the fitted dip."""
    _, net = visibilities_from_fit(_fit_records(records), accidental_level)
    return net
