# sim/interference_core.py
"""
Two-photon evolution through BS1, the delayed arm a and BS2.

BS1 reflects into arm a with a factor i, arm a picks up exp(-i omega tau), and
BS2 recombines into the output modes c and d. For one photon of angular
frequency omega the port probabilities are

    P_c = T1 T2 + R1 R2 - 2 sqrt(T1 R1 T2 R2) cos(omega tau)
    P_d = 1 - P_c

and a pair (omega0 + Omega, omega0 - Omega) splits between the ports as the
product of its two photons. The coincidence class is integrated over the
detuning amplitude |f(Omega)|^2; the closed form follows for a balanced
interferometer with delta = 1 / (sqrt(2) sigma).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares
from scipy.special import erf

from homlink.core.errors import InvalidParameterError, OutOfModelDomainError
from homlink.sim._base import (
    C_LIGHT,
    counter_rng,
    require_finite,
    require_fraction,
    require_non_negative,
    require_positive,
)
from homlink.sim.spectral_source import SPECTRAL_SUPPORT_SIGMAS, JointSpectrum
from homlink.utils.debug_logger import get_logger

log = get_logger("interference_core")

# The derivation assumes |tau| far below the detector time resolution.
DETECTOR_RESOLUTION_GUARD = 1e-9
NORMALIZATION_TOLERANCE = 1e-9
_MIN_GRID_POINTS = 257
# Aliasing margin of the trapezoid rule, in units of 1/sigma.
_ALIAS_MARGIN = 12.0

PORT_C = "c"
PORT_D = "d"


@dataclass(frozen=True)
class InterferometerSpec:
    bs1_transmittance: float = 0.5
    bs2_transmittance: float = 0.5
    effective_group_index: float = 1.8

    def __post_init__(self):
        require_fraction("bs1_transmittance", self.bs1_transmittance)
        require_fraction("bs2_transmittance", self.bs2_transmittance)
        if require_finite("effective_group_index", self.effective_group_index) <= 1.0:
            raise InvalidParameterError("effective_group_index must be > 1")

    @property
    def interference_weight(self) -> float:
        """sqrt(T1 R1 T2 R2), the amplitude of the single-photon fringe term."""
        t1, t2 = self.bs1_transmittance, self.bs2_transmittance
        return math.sqrt(t1 * (1.0 - t1) * t2 * (1.0 - t2))

    @property
    def incoherent_port_c(self) -> float:
        t1, t2 = self.bs1_transmittance, self.bs2_transmittance
        return t1 * t2 + (1.0 - t1) * (1.0 - t2)


@dataclass(frozen=True)
class OutcomeProbabilities:
    cd: float
    cc: float
    dd: float

    @property
    def total(self) -> float:
        return self.cd + self.cc + self.dd

    def mean_photons(self, port: str) -> float:
        """Expected number of photons per pair leaving through ``port``."""
        if port == PORT_C:
            return 2.0 * self.cc + self.cd
        if port == PORT_D:
            return 2.0 * self.dd + self.cd
        raise InvalidParameterError(f"unknown output port {port!r}")


@dataclass(frozen=True)
class CoincidenceCurvePoint:
    tau: float
    p_exact: float
    p_closed: float
    p_envelope: float


def _port_c_probability(spec: InterferometerSpec, omega: np.ndarray, tau: float) -> np.ndarray:
    return spec.incoherent_port_c - 2.0 * spec.interference_weight * np.cos(omega * tau)


def _grid_points(js: JointSpectrum, tau: float) -> int:
    # The integrand carries Omega-frequencies up to 2|tau|.
    sigma = js.amplitude_sigma
    step = 2.0 * math.pi / (2.0 * abs(tau) + _ALIAS_MARGIN / sigma)
    points = int(math.ceil(2.0 * SPECTRAL_SUPPORT_SIGMAS * sigma / step)) + 1
    points = max(points, _MIN_GRID_POINTS)
    return points | 1


def _check_model_domain(tau: float) -> float:
    tau = require_finite("tau", tau)
    if abs(tau) > DETECTOR_RESOLUTION_GUARD:
        raise OutOfModelDomainError(
            f"|tau| = {abs(tau):.3e} s exceeds the {DETECTOR_RESOLUTION_GUARD:.0e} s "
            "detector-resolution guard of the coincidence model"
        )
    return tau


def evolve_state(js: JointSpectrum, spec: InterferometerSpec, tau: float) -> OutcomeProbabilities:
    """Probabilities of the outcome classes (c,d), (c,c) and (d,d) at delay ``tau``."""
    tau = _check_model_domain(tau)
    norm = js.norm()
    if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
        raise InvalidParameterError(f"joint spectrum is not normalized (integral = {norm:.12g})")

    detuning = js.detuning_grid(_grid_points(js, tau))
    weight = js.intensity(detuning)
    pc1 = _port_c_probability(spec, js.center + detuning, tau)
    pc2 = _port_c_probability(spec, js.center - detuning, tau)
    pd1 = 1.0 - pc1
    pd2 = 1.0 - pc2

    cd_coherent = np.trapezoid(weight * (pc1 * pd2 + pd1 * pc2), detuning)
    cc_coherent = np.trapezoid(weight * pc1 * pc2, detuning)
    dd_coherent = np.trapezoid(weight * pd1 * pd2, detuning)

    # Distinguishable share: no fringe term at either splitter.
    q = spec.incoherent_port_c
    overlap = js.mode_overlap
    return OutcomeProbabilities(
        cd=float(overlap * cd_coherent + (1.0 - overlap) * 2.0 * q * (1.0 - q)),
        cc=float(overlap * cc_coherent + (1.0 - overlap) * q * q),
        dd=float(overlap * dd_coherent + (1.0 - overlap) * (1.0 - q) ** 2),
    )


def coincidence_probability_exact(js: JointSpectrum, spec: InterferometerSpec, tau: float) -> float:
    """Spectral-integration oracle for the coincidence probability."""
    return evolve_state(js, spec, tau).cd


def franson_term(omega_p: float, tau) -> np.ndarray:
    return 1.0 - np.cos(np.asarray(tau, dtype=float) * omega_p)


def hom_term(delta: float, tau) -> np.ndarray:
    require_positive("delta", delta)
    tau = np.asarray(tau, dtype=float)
    return 1.0 - np.exp(-(tau / delta) ** 2)


def coincidence_probability_closed(delta: float, omega_p: float, tau, overlap: float = 1.0):
    """(2 - p exp(-tau^2/delta^2) - p cos(tau omega_p)) / 4."""
    require_fraction("overlap", overlap)
    interfering = franson_term(omega_p, tau) + hom_term(delta, tau)
    result = (2.0 * (1.0 - overlap) + overlap * interfering) / 4.0
    return _scalar_or_array(result)


def averaged_envelope(delta: float, tau, overlap: float = 1.0):
    """Closed form averaged over a uniformly random interferometer phase."""
    require_fraction("overlap", overlap)
    result = (2.0 - overlap * (1.0 - hom_term(delta, tau))) / 4.0
    return _scalar_or_array(result)


def blurred_envelope(delta: float, tau, blur_tau: float, overlap: float = 1.0):
    """
    Envelope averaged over a delay window of width ``blur_tau`` centred on tau.

    Models a linear drift of the arm difference during one integration.
    """
    blur_tau = require_non_negative("blur_tau", blur_tau)
    if blur_tau == 0.0:
        return averaged_envelope(delta, tau, overlap)
    require_positive("delta", delta)
    require_fraction("overlap", overlap)
    tau = np.asarray(tau, dtype=float)
    half = blur_tau / 2.0
    gauss_mean = (
        math.sqrt(math.pi) * delta / (2.0 * blur_tau)
        * (erf((tau + half) / delta) - erf((tau - half) / delta))
    )
    result = (2.0 - overlap * gauss_mean) / 4.0
    return _scalar_or_array(result)


def phase_averaged_closed(
    delta: float, tau: float, n_phases: int, seed: int, overlap: float = 1.0, stream: int = 0
) -> float:
    """Empirical mean of the closed form over ``n_phases`` uniform phases."""
    if n_phases < 1:
        raise InvalidParameterError("n_phases must be >= 1")
    require_fraction("overlap", overlap)
    phases = counter_rng(seed, stream).uniform(0.0, 2.0 * math.pi, size=n_phases)
    envelope_part = 2.0 - overlap * (1.0 - hom_term(delta, tau))
    return float(np.mean((envelope_part - overlap * np.cos(phases)) / 4.0))


@lru_cache(maxsize=64)
def calibrated_delta(js: JointSpectrum) -> float:
    """
    Least-squares delta of the closed form against the exact oracle.

    Computed once per spectrum on a balanced, fully overlapping interferometer.
    """
    reference = replace(js, mode_overlap=1.0, amplitude_scale=1.0)
    balanced = InterferometerSpec()
    guess = 1.0 / js.amplitude_sigma
    taus = np.linspace(-4.0 * guess, 4.0 * guess, 161)
    exact = np.array([coincidence_probability_exact(reference, balanced, t) for t in taus])
    omega_p = reference.pump_angular_frequency

    def residuals(x):
        return coincidence_probability_closed(guess * math.exp(x[0]), omega_p, taus) - exact

    result = least_squares(residuals, x0=[0.0], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    delta = guess * math.exp(result.x[0])
    log.debug(
        f"calibrated delta = {delta:.9e} s (analytic {1.0 / (math.sqrt(2.0) * js.amplitude_sigma):.9e} s, "
        f"max residual {np.max(np.abs(result.fun)):.2e})"
    )
    return delta


def coincidence_curve(js: JointSpectrum, spec: InterferometerSpec, taus) -> list[CoincidenceCurvePoint]:
    delta = calibrated_delta(js)
    omega_p = js.pump_angular_frequency
    points = []
    for tau in np.asarray(taus, dtype=float):
        points.append(CoincidenceCurvePoint(
            tau=float(tau),
            p_exact=coincidence_probability_exact(js, spec, tau),
            p_closed=coincidence_probability_closed(delta, omega_p, tau, js.mode_overlap),
            p_envelope=averaged_envelope(delta, tau, js.mode_overlap),
        ))
    return points


def visibility(baseline: float, minimum: float) -> float:
    """(baseline - minimum) / baseline."""
    if require_finite("baseline", baseline) <= 0.0:
        raise InvalidParameterError("baseline must be > 0")
    return (baseline - require_finite("minimum", minimum)) / baseline


def _require_group_index(n_eff: float) -> float:
    if require_finite("n_eff", n_eff) <= 1.0:
        raise InvalidParameterError("n_eff must be > 1")
    return n_eff


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def delay_from_stretch(delta_length, n_eff: float):
    """Relative arm delay for a mechanical stretch, tau = n_eff dL / c."""
    n_eff = _require_group_index(n_eff)
    return _scalar_or_array(n_eff * np.asarray(delta_length, dtype=float) / C_LIGHT)


def stretch_from_delay(tau, n_eff: float):
    n_eff = _require_group_index(n_eff)
    return _scalar_or_array(C_LIGHT * np.asarray(tau, dtype=float) / n_eff)


def fringe_period_stretch(pump_wavelength: float, n_eff: float) -> float:
    """Stretch that advances tau omega_p by 2 pi."""
    return require_positive("pump_wavelength", pump_wavelength) / _require_group_index(n_eff)
