import math

import pandas as pd

from homlink.core.settings_manager import MM, PS, ExperimentConfig, SettingsManager
from homlink.sim.fiber_channel import (
    CorrelationKind,
    band_detunings,
    delay_difference_over_band,
    delay_spread_per_km,
    dispersion_from_tau1,
    drift_during_integration,
    is_dispersion_cancelled,
    max_link_length,
    output_pulse_width,
    pulse_broadening,
    stability_for_fringe_resolution,
    thermal_length_drift,
)
from homlink.sim.interference_core import calibrated_delta
from homlink.sim.dip_fit import oracle_dip_fwhm
from homlink.sim.spectral_source import coherence_time, make_joint_spectrum
from homlink.utils.debug_logger import get_logger

from ._base import emit, render_table

log = get_logger("commands.dispersion")

DISPERSION_COLUMNS = ("detuning_ghz", "delta_tau_correlated_ps", "delta_tau_independent_ps")


def dispersion_report(cfg: ExperimentConfig) -> tuple[str, str]:
    """Band table and summary of the two-arm dispersion analysis."""
    js = make_joint_spectrum(cfg.source)
    sigma = js.amplitude_sigma
    fiber_a, fiber_b = cfg.fibers
    tau_c = coherence_time(cfg.source)
    tolerance = cfg.dispersion.tolerance if cfg.dispersion.tolerance is not None else tau_c / 10.0
    delta_lambda_nm = cfg.source.filter_fwhm_wavelength / 1e-9
    center_wavelength = cfg.source.degenerate_wavelength

    detunings = band_detunings(sigma, cfg.dispersion.band_points)
    correlated = delay_difference_over_band(fiber_a, fiber_b, CorrelationKind.ENERGY_ANTICORRELATED, detunings)
    independent = delay_difference_over_band(fiber_a, fiber_b, CorrelationKind.INDEPENDENT, detunings)
    band = pd.DataFrame(
        {
            "detuning_ghz": detunings / (2.0 * math.pi) / 1e9,
            "delta_tau_correlated_ps": correlated / PS,
            "delta_tau_independent_ps": independent / PS,
        },
        columns=list(DISPERSION_COLUMNS),
    )
    table = render_table(cfg.resolved, band)

    verdicts = {
        kind: is_dispersion_cancelled(fiber_a, fiber_b, kind, sigma, tolerance, cfg.dispersion.band_points)
        for kind in CorrelationKind
    }
    n_eff = cfg.interferometer.effective_group_index
    pump = cfg.source.pump_wavelength
    dip_fwhm = oracle_dip_fwhm(calibrated_delta(js), n_eff)
    product_spread = delay_spread_per_km(cfg.dispersion.d_min, cfg.dispersion.d_max, delta_lambda_nm)

    lines = [
        f"tolerance                         : {tolerance / PS:.4g} ps",
        f"cancelled (energy anticorrelated) : {verdicts[CorrelationKind.ENERGY_ANTICORRELATED]}",
        f"cancelled (independent)           : {verdicts[CorrelationKind.INDEPENDENT]}",
    ]
    for ch in cfg.fibers:
        dispersion = dispersion_from_tau1(ch.tau1, center_wavelength)
        broadening = pulse_broadening(abs(dispersion), ch.length, delta_lambda_nm)
        lines += [
            f"[{ch.label}] D                         : {dispersion:.4g} ps/(nm km) over {ch.length:g} km",
            f"[{ch.label}] pulse broadening          : {broadening / PS:.4g} ps",
            f"[{ch.label}] output pulse width        : "
            f"{output_pulse_width(tau_c, abs(dispersion), ch.length, delta_lambda_nm) / PS:.4g} ps",
            f"[{ch.label}] drift per kelvin          : {thermal_length_drift(ch, 1.0) / MM:.4g} mm",
            f"[{ch.label}] stability for fringes     : "
            f"{stability_for_fringe_resolution(ch, pump, n_eff):.3g} K",
            f"[{ch.label}] drift per integration     : "
            f"{abs(drift_during_integration(ch, cfg.scan.stability_k_per_h, cfg.setup.integration_time)) / MM:.4g} mm "
            f"at {cfg.scan.stability_k_per_h:g} K/h (dip FWHM {dip_fwhm / MM:.4g} mm)",
        ]
    low = pulse_broadening(cfg.dispersion.d_min, fiber_a.length, delta_lambda_nm)
    high = pulse_broadening(cfg.dispersion.d_max, fiber_a.length, delta_lambda_nm)
    link = max_link_length(tau_c, cfg.dispersion.spread_per_km)
    lines += [
        f"broadening over D range           : {low / PS:.4g} .. {high / PS:.4g} ps",
        f"delay spread (configured)         : {cfg.dispersion.spread_per_km / PS:.4g} ps/km",
        f"delay spread (D range product)    : {product_spread / PS:.4g} ps/km",
        f"coherence time                    : {tau_c / PS:.4g} ps",
        "max link length                   : "
        + ("unbounded" if math.isinf(link) else f"{link:.4g} km"),
    ]
    return table, "\n".join(lines) + "\n"


def run_dispersion(config: str | None = None, out: str | None = None):
    """Dispersion-cancellation, broadening and thermal analysis of the two fiber arms."""
    cfg = SettingsManager.from_file(config).experiment_config(allow_long_scan=True)
    table, summary = dispersion_report(cfg)
    emit(table, summary, out)


def get_mapping():
    return {
        "dispersion": run_dispersion,  # Band table and link analysis.
    }
