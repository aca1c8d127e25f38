# sim/spectral_source.py
"""
Filtered degenerate photon-pair source.

All frequencies are angular (rad/s) and all lengths are SI metres inside this
module; conversions to nm/GHz/ps happen at the command boundary only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from homlink.core.errors import InvalidParameterError
from homlink.sim._base import (
    C_LIGHT,
    FWHM_PER_SIGMA,
    GAUSSIAN_TIME_BANDWIDTH,
    require_fraction,
    require_non_negative,
    require_positive,
)

# Half-width of the detuning grid, in units of sigma.
SPECTRAL_SUPPORT_SIGMAS = 10.0


@dataclass(frozen=True)
class SourceSpec:
    """Everything that defines the photon pairs entering the first splitter."""

    pump_wavelength: float
    filter_fwhm_wavelength: float
    pair_rate: float = 0.0
    mode_overlap: float = 1.0
    coherence_time_override: float | None = None

    def __post_init__(self):
        require_positive("pump_wavelength", self.pump_wavelength)
        require_positive("filter_fwhm_wavelength", self.filter_fwhm_wavelength)
        require_non_negative("pair_rate", self.pair_rate)
        require_fraction("mode_overlap", self.mode_overlap)
        if self.coherence_time_override is not None:
            require_positive("coherence_time_override", self.coherence_time_override)

    @cached_property
    def pump_angular_frequency(self) -> float:
        return 2.0 * math.pi * C_LIGHT / self.pump_wavelength

    @cached_property
    def degenerate_center(self) -> float:
        """Angular frequency of each photon at the degeneracy point (omega_p / 2)."""
        return self.pump_angular_frequency / 2.0

    @property
    def degenerate_wavelength(self) -> float:
        return 2.0 * self.pump_wavelength

    @property
    def filter_fwhm_frequency(self) -> float:
        """Filter FWHM in Hz, evaluated at the degenerate wavelength."""
        return bandwidth_wavelength_to_frequency(
            self.filter_fwhm_wavelength, self.degenerate_wavelength
        )


@dataclass(frozen=True)
class JointSpectrum:
    """
    Two-photon spectral amplitude under exact CW energy anticorrelation.

    Because omega + omega' = omega_p holds identically, the joint amplitude
    reduces to a single detuning amplitude f(Omega) with
    omega = center + Omega and omega' = center - Omega. ``amplitude_sigma``
    is the standard deviation of the intensity |f(Omega)|^2.
    """

    center: float
    amplitude_sigma: float
    mode_overlap: float = 1.0
    amplitude_scale: float = 1.0
    correlation: str = field(default="energy_anticorrelated", compare=False)

    def __post_init__(self):
        require_positive("center", self.center)
        require_positive("amplitude_sigma", self.amplitude_sigma)
        require_fraction("mode_overlap", self.mode_overlap)
        require_positive("amplitude_scale", self.amplitude_scale)

    @property
    def pump_angular_frequency(self) -> float:
        return 2.0 * self.center

    def intensity(self, detuning) -> np.ndarray:
        """|f(Omega)|^2, a normalized Gaussian in Omega when amplitude_scale == 1."""
        detuning = np.asarray(detuning, dtype=float)
        sigma = self.amplitude_sigma
        gauss = np.exp(-0.5 * (detuning / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)
        return self.amplitude_scale ** 2 * gauss

    def amplitude(self, detuning) -> np.ndarray:
        return np.sqrt(self.intensity(detuning))

    def detuning_grid(self, points: int) -> np.ndarray:
        half = SPECTRAL_SUPPORT_SIGMAS * self.amplitude_sigma
        return np.linspace(-half, half, points)

    def norm(self, points: int = 4097) -> float:
        """Numerical integral of |f|^2 over the spectral support."""
        grid = self.detuning_grid(points)
        return float(np.trapezoid(self.intensity(grid), grid))

    def intensity_fwhm_frequency(self) -> float:
        """FWHM of |f|^2 expressed in Hz."""
        return FWHM_PER_SIGMA * self.amplitude_sigma / (2.0 * math.pi)


def bandwidth_wavelength_to_frequency(delta_lambda: float, center_wavelength: float) -> float:
    """FWHM in optical frequency (Hz) for a FWHM in wavelength, c * dl / l^2."""
    require_positive("delta_lambda", delta_lambda)
    require_positive("center_wavelength", center_wavelength)
    if delta_lambda >= center_wavelength:
        raise InvalidParameterError("delta_lambda must be much smaller than the center wavelength")
    return C_LIGHT * delta_lambda / center_wavelength ** 2


def bandwidth_frequency_to_wavelength(delta_nu: float, center_wavelength: float) -> float:
    require_positive("delta_nu", delta_nu)
    require_positive("center_wavelength", center_wavelength)
    return center_wavelength ** 2 * delta_nu / C_LIGHT


def coherence_time(spec: SourceSpec) -> float:
    """
    FWHM coherence time in seconds.

    A configured override wins; otherwise the Gaussian Fourier limit
    0.441 / delta_nu of the filter bandwidth is returned.
    """
    if spec.coherence_time_override is not None:
        return spec.coherence_time_override
    return GAUSSIAN_TIME_BANDWIDTH / spec.filter_fwhm_frequency


def coherence_length_air(tau_c: float) -> float:
    return C_LIGHT * require_non_negative("tau_c", tau_c)


def make_joint_spectrum(spec: SourceSpec) -> JointSpectrum:
    """Gaussian joint spectrum whose intensity FWHM equals the filter FWHM."""
    delta_nu = spec.filter_fwhm_frequency
    sigma = 2.0 * math.pi * delta_nu / FWHM_PER_SIGMA
    return JointSpectrum(
        center=spec.degenerate_center,
        amplitude_sigma=sigma,
        mode_overlap=spec.mode_overlap,
    )
