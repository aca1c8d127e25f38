class ExperimentDefaults:
    # source
    pump_wavelength_nm = 783.0
    filter_fwhm_nm = 0.8
    coherence_time_ps = 4.25
    pair_rate = 200000.0
    mode_overlap = 0.946

    # interferometer
    bs_transmittance = 0.5
    group_index = 1.8
    scan_center_mm = 0.0
    scan_range_mm = 11.0
    max_scan_range_mm = 11.0
    drift_k_per_h = 0.0
    stability_k_per_h = 0.1

    # fibers
    length_km = 25.3
    dispersion_ps_nm_km = 17.0
    tau2_ps3_per_km = 0.1
    fiber_group_index = 1.4682
    thermal_mm_per_k_km = 4.0

    # detectors
    efficiency_c = 0.07
    dark_rate_c_hz = 2000.0
    efficiency_d = 0.08
    dark_prob_d_per_ns = 1e-5

    # counting
    window_ns = 2.0
    integration_s = 50.0
    link_transmission = 1.0
    accidental_fraction = 0.205

    # dispersion analysis
    spread_ps_per_km = 0.14
    d_min_ps_nm_km = 16.8
    d_max_ps_nm_km = 17.9
    band_points = 13

    # run
    seed = 1
    points = 23


def _fiber_defaults(section: str, label: str) -> dict:
    return {
        f"{section}.label": label,
        f"{section}.length_km": ExperimentDefaults.length_km,
        f"{section}.dispersion_ps_nm_km": ExperimentDefaults.dispersion_ps_nm_km,
        f"{section}.tau2_ps3_per_km": ExperimentDefaults.tau2_ps3_per_km,
        f"{section}.group_index": ExperimentDefaults.fiber_group_index,
        f"{section}.thermal_mm_per_k_km": ExperimentDefaults.thermal_mm_per_k_km,
    }


# Every accepted key with its default; "none" and "auto" are literal markers.
DEFAULT_CONFIG: dict[str, object] = {
    "source.pump_wavelength_nm": ExperimentDefaults.pump_wavelength_nm,
    "source.filter_fwhm_nm": ExperimentDefaults.filter_fwhm_nm,
    "source.coherence_time_ps": ExperimentDefaults.coherence_time_ps,
    "source.pair_rate": ExperimentDefaults.pair_rate,
    "source.mode_overlap": ExperimentDefaults.mode_overlap,
    "interferometer.bs1_transmittance": ExperimentDefaults.bs_transmittance,
    "interferometer.bs2_transmittance": ExperimentDefaults.bs_transmittance,
    "interferometer.group_index": ExperimentDefaults.group_index,
    "interferometer.scan_center_mm": ExperimentDefaults.scan_center_mm,
    "interferometer.scan_range_mm": ExperimentDefaults.scan_range_mm,
    "interferometer.drift_k_per_h": ExperimentDefaults.drift_k_per_h,
    "interferometer.stability_k_per_h": ExperimentDefaults.stability_k_per_h,
    **_fiber_defaults("fiberA", "A"),
    **_fiber_defaults("fiberB", "B"),
    "detector_c.label": "C",
    "detector_c.efficiency": ExperimentDefaults.efficiency_c,
    "detector_c.mode": "free_running",
    "detector_c.dark_rate_hz": ExperimentDefaults.dark_rate_c_hz,
    "detector_c.dark_prob_per_ns": 0.0,
    "detector_d.label": "D",
    "detector_d.efficiency": ExperimentDefaults.efficiency_d,
    "detector_d.mode": "gated",
    "detector_d.dark_rate_hz": 0.0,
    "detector_d.dark_prob_per_ns": ExperimentDefaults.dark_prob_d_per_ns,
    "counting.window_ns": ExperimentDefaults.window_ns,
    "counting.integration_s": ExperimentDefaults.integration_s,
    "counting.link_transmission": ExperimentDefaults.link_transmission,
    "counting.accidental_fraction": ExperimentDefaults.accidental_fraction,
    "dispersion.spread_ps_per_km": ExperimentDefaults.spread_ps_per_km,
    "dispersion.d_min_ps_nm_km": ExperimentDefaults.d_min_ps_nm_km,
    "dispersion.d_max_ps_nm_km": ExperimentDefaults.d_max_ps_nm_km,
    "dispersion.band_points": ExperimentDefaults.band_points,
    "dispersion.tolerance_ps": "auto",
    "run.seed": ExperimentDefaults.seed,
    "run.points": ExperimentDefaults.points,
    "run.mode": "envelope",
    "run.phase_samples": 0,
    "run.workers": 1,
}
