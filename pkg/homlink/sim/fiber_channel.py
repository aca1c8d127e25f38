# sim/fiber_channel.py
"""
Dispersive fiber arms.

Group delay per km is a second-order Taylor series around the centre frequency
omega0; every per-km coefficient is scaled by the arm length. Lengths are in km
because the coefficients are quoted per km, everything else is SI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from homlink.core.errors import InvalidParameterError, ModelConsistencyError
from homlink.sim._base import C_LIGHT, require_finite, require_non_negative, require_positive
from homlink.utils.debug_logger import get_logger

log = get_logger("fiber_channel")

# ps/(nm km) -> s/(m km)
PS_PER_NM_KM = 1e-12 / 1e-9
PS = 1e-12
# Half-width of the band checked by the cancellation predicate, in sigma.
BAND_SIGMAS = 3.0
# Bound used by the internal cross-check of the two delay-difference forms.
CONSISTENCY_RTOL = 1e-14


class CorrelationKind(Enum):
    ENERGY_ANTICORRELATED = "energy_anticorrelated"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class FiberChannel:
    length: float
    tau0: float = 0.0
    tau1: float = 0.0
    tau2: float = 0.0
    thermal_coeff: float = 0.0
    label: str = ""

    def __post_init__(self):
        require_non_negative("length", self.length)
        require_finite("tau0", self.tau0)
        require_finite("tau1", self.tau1)
        require_finite("tau2", self.tau2)
        require_non_negative("thermal_coeff", self.thermal_coeff)


def channel_from_dispersion(
    length: float,
    dispersion: float,
    center_wavelength: float,
    tau2: float = 0.0,
    tau0: float = 0.0,
    thermal_coeff: float = 0.0,
    label: str = "",
) -> FiberChannel:
    """
    Build a channel from a dispersion parameter D in ps/(nm km).

    tau1 = -D lambda0 / omega0 with D in SI, omega0 = 2 pi c / lambda0.
    """
    dispersion = require_finite("dispersion", dispersion)
    center_wavelength = require_positive("center_wavelength", center_wavelength)
    omega0 = 2.0 * math.pi * C_LIGHT / center_wavelength
    tau1 = -dispersion * PS_PER_NM_KM * center_wavelength / omega0
    return FiberChannel(
        length=length, tau0=tau0, tau1=tau1, tau2=tau2, thermal_coeff=thermal_coeff, label=label
    )


def dispersion_from_tau1(tau1: float, center_wavelength: float) -> float:
    """Inverse of :func:`channel_from_dispersion`, D in ps/(nm km)."""
    center_wavelength = require_positive("center_wavelength", center_wavelength)
    omega0 = 2.0 * math.pi * C_LIGHT / center_wavelength
    return -require_finite("tau1", tau1) * omega0 / center_wavelength / PS_PER_NM_KM


def group_index_to_tau0(group_index: float) -> float:
    """tau0 = n_g / c in s/km."""
    return require_positive("group_index", group_index) * 1000.0 / C_LIGHT


def _delay_at_detuning(ch: FiberChannel, detuning):
    return ch.length * (ch.tau0 + ch.tau1 * detuning + 0.5 * ch.tau2 * detuning * detuning)


def propagation_delay(ch: FiberChannel, omega, omega0: float):
    """L (tau0 + tau1 (w - w0) + tau2 (w - w0)^2 / 2)."""
    detuning = np.asarray(omega, dtype=float) - omega0
    result = _delay_at_detuning(ch, detuning)
    return float(result) if np.ndim(result) == 0 else result


def two_path_delay_difference_expanded(ch_a: FiberChannel, ch_b: FiberChannel, detuning_1, detuning_2):
    """Series form of the delay difference in the two photon detunings."""
    d1 = np.asarray(detuning_1, dtype=float)
    d2 = np.asarray(detuning_2, dtype=float)
    zeroth = 2.0 * (ch_a.length * ch_a.tau0 - ch_b.length * ch_b.tau0)
    first = (ch_a.length * ch_a.tau1 - ch_b.length * ch_b.tau1) * (d1 + d2)
    second = 0.5 * (ch_a.length * ch_a.tau2 - ch_b.length * ch_b.tau2) * (d1 * d1 + d2 * d2)
    return zeroth + first + second


def delay_difference_from_detunings(ch_a: FiberChannel, ch_b: FiberChannel, detuning_1, detuning_2):
    """
    (tau_A(w1) - tau_B(w2)) - (tau_B(w1) - tau_A(w2)), cross-checked against the series form.

    Raises ModelConsistencyError when the two forms disagree beyond rounding of
    the four path delays.
    """
    d1 = np.asarray(detuning_1, dtype=float)
    d2 = np.asarray(detuning_2, dtype=float)
    a1, a2 = _delay_at_detuning(ch_a, d1), _delay_at_detuning(ch_a, d2)
    b1, b2 = _delay_at_detuning(ch_b, d1), _delay_at_detuning(ch_b, d2)
    direct = (a1 - b2) - (b1 - a2)
    expanded = two_path_delay_difference_expanded(ch_a, ch_b, d1, d2)
    scale = np.abs(a1) + np.abs(a2) + np.abs(b1) + np.abs(b2)
    mismatch = np.abs(direct - expanded)
    if np.any(mismatch > CONSISTENCY_RTOL * scale + np.finfo(float).tiny):
        raise ModelConsistencyError(
            f"delay difference forms disagree by {float(np.max(mismatch)):.3e} s "
            f"({ch_a.label or 'A'} vs {ch_b.label or 'B'})"
        )
    return float(direct) if np.ndim(direct) == 0 else direct


def two_path_delay_difference(ch_a: FiberChannel, ch_b: FiberChannel, omega_1, omega_2, omega0: float):
    """Delay difference between the two two-photon paths for photon frequencies w1, w2."""
    return delay_difference_from_detunings(
        ch_a, ch_b, np.asarray(omega_1, dtype=float) - omega0, np.asarray(omega_2, dtype=float) - omega0
    )


def band_detunings(bandwidth_sigma: float, points: int = 61) -> np.ndarray:
    """Symmetric detuning grid over +-3 sigma; odd ``points`` keeps Omega = 0 on the grid."""
    require_positive("bandwidth_sigma", bandwidth_sigma)
    if points < 3:
        raise InvalidParameterError("points must be >= 3")
    half = BAND_SIGMAS * bandwidth_sigma
    return np.linspace(-half, half, points | 1)


def delay_difference_over_band(
    ch_a: FiberChannel, ch_b: FiberChannel, kind: CorrelationKind, detunings
) -> np.ndarray:
    """
    Delay difference at each detuning Omega of photon 1.

    Anticorrelated pairs take photon 2 at -Omega exactly; independent photons
    are evaluated at the same detuning, which is the worst case of the series.
    """
    detunings = np.asarray(detunings, dtype=float)
    if kind is CorrelationKind.ENERGY_ANTICORRELATED:
        return delay_difference_from_detunings(ch_a, ch_b, detunings, -detunings)
    return delay_difference_from_detunings(ch_a, ch_b, detunings, detunings)


def is_dispersion_cancelled(
    ch_a: FiberChannel,
    ch_b: FiberChannel,
    kind: CorrelationKind,
    bandwidth_sigma: float,
    tol: float,
    points: int = 61,
) -> bool:
    """
    True when the delay difference varies by at most ``tol`` across the band.

    The frequency-independent part (arm-length and tau0 mismatch) is excluded;
    it is the static offset trimmed by the adjustable delay line.
    """
    require_positive("tol", tol)
    detunings = band_detunings(bandwidth_sigma, points)
    reference = delay_difference_from_detunings(ch_a, ch_b, 0.0, 0.0)
    if kind is CorrelationKind.ENERGY_ANTICORRELATED:
        spread = delay_difference_from_detunings(ch_a, ch_b, detunings, -detunings) - reference
    else:
        d1, d2 = np.meshgrid(detunings, detunings)
        spread = delay_difference_from_detunings(ch_a, ch_b, d1, d2) - reference
    worst = float(np.max(np.abs(spread)))
    log.debug(f"{kind.value}: worst delay spread {worst:.3e} s against tolerance {tol:.3e} s")
    return worst <= tol


def pulse_broadening(dispersion: float, length: float, delta_lambda_nm: float) -> float:
    """D L dlambda in seconds, for D in ps/(nm km), L in km and dlambda in nm."""
    require_non_negative("dispersion", dispersion)
    require_non_negative("length", length)
    require_non_negative("delta_lambda_nm", delta_lambda_nm)
    return dispersion * length * delta_lambda_nm * PS


def output_pulse_width(input_width: float, dispersion: float, length: float, delta_lambda_nm: float) -> float:
    require_non_negative("input_width", input_width)
    return math.hypot(input_width, pulse_broadening(dispersion, length, delta_lambda_nm))


def delay_spread_per_km(d_min: float, d_max: float, delta_lambda_nm: float) -> float:
    """Product estimate (D_max - D_min) dlambda of the delay spread, in s/km."""
    if require_finite("d_max", d_max) < require_finite("d_min", d_min):
        raise InvalidParameterError("d_max must be >= d_min")
    require_non_negative("delta_lambda_nm", delta_lambda_nm)
    return (d_max - d_min) * delta_lambda_nm * PS


def max_link_length(coherence_time: float, spread_per_km: float) -> float:
    """tau_c / spread in km; math.inf when the spread vanishes."""
    require_non_negative("coherence_time", coherence_time)
    if require_non_negative("spread_per_km", spread_per_km) == 0.0:
        return math.inf
    return coherence_time / spread_per_km


def thermal_length_drift(ch: FiberChannel, delta_temperature: float) -> float:
    return ch.thermal_coeff * ch.length * require_finite("delta_temperature", delta_temperature)


def drift_during_integration(ch: FiberChannel, rate_k_per_h: float, seconds: float) -> float:
    """Length drift accumulated over ``seconds`` at a constant temperature ramp."""
    require_non_negative("seconds", seconds)
    return thermal_length_drift(ch, require_finite("rate_k_per_h", rate_k_per_h) * seconds / 3600.0)


def stability_for_fringe_resolution(ch: FiberChannel, pump_wavelength: float, n_eff: float) -> float:
    """Temperature change whose length drift equals one fringe period."""
    require_positive("pump_wavelength", pump_wavelength)
    if require_finite("n_eff", n_eff) <= 1.0:
        raise InvalidParameterError("n_eff must be > 1")
    per_kelvin = ch.thermal_coeff * ch.length
    if per_kelvin == 0.0:
        return math.inf
    return (pump_wavelength / n_eff) / per_kelvin


def compensating_channel(ch: FiberChannel) -> FiberChannel:
    """Same length with the dispersive coefficients negated."""
    return replace(ch, tau1=-ch.tau1, tau2=-ch.tau2, label=f"{ch.label}-comp" if ch.label else "comp")
