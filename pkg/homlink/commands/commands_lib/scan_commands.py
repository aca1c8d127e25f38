import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from homlink.core.errors import NumericalFailure
from homlink.core.settings_manager import ExperimentConfig, SettingsManager
from homlink.sim.counting import CountRecord, calibrate_excess_accidentals, simulate_point
from homlink.sim.dip_fit import DipFit
from homlink.sim.fiber_channel import drift_during_integration
from homlink.sim.interference_core import (
    averaged_envelope,
    blurred_envelope,
    calibrated_delta,
    coincidence_probability_closed,
    delay_from_stretch,
    phase_averaged_closed,
)
from homlink.sim.spectral_source import make_joint_spectrum
from homlink.utils.debug_logger import get_logger

from ._base import (
    ScanRow,
    accidental_level,
    emit,
    fit_rows,
    format_fit_summary,
    parse_scan_text,
    records_frame,
    render_table,
)

log = get_logger("commands.scan")

# Phase draws use their own Philox streams, disjoint from the Poisson streams.
PHASE_STREAM_OFFSET = 2 ** 32


@dataclass(frozen=True)
class ScanResult:
    records: list[CountRecord]
    rows: list[ScanRow]
    fit: DipFit
    accidentals: float
    delta: float
    table: str


def scan_grid(cfg: ExperimentConfig) -> np.ndarray:
    """Stretch values delta_l in metres, centred on the configured scan centre."""
    half = cfg.scan.span / 2.0
    return cfg.scan.center + np.linspace(-half, half, cfg.run.points)


def drift_blur_delay(cfg: ExperimentConfig) -> float:
    """Delay swept by the differential drift during one integration."""
    if cfg.scan.drift_k_per_h == 0.0:
        return 0.0
    length = abs(drift_during_integration(cfg.fiber_a, cfg.scan.drift_k_per_h, cfg.setup.integration_time))
    return delay_from_stretch(length, cfg.interferometer.effective_group_index)


def simulate_scan(cfg: ExperimentConfig) -> ScanResult:
    mode = cfg.run.mode
    theory = mode == "theory"
    js = make_joint_spectrum(cfg.source)
    if theory:
        js = replace(js, mode_overlap=1.0)
    delta = calibrated_delta(js)
    omega_p = js.pump_angular_frequency
    overlap = js.mode_overlap
    n_eff = cfg.interferometer.effective_group_index
    seed = cfg.run.seed

    setup = cfg.setup
    if not theory and cfg.accidental_fraction is not None:
        setup = calibrate_excess_accidentals(setup, cfg.accidental_fraction)
    blur = 0.0 if theory else drift_blur_delay(cfg)
    grid = scan_grid(cfg)

    def model_probability(index: int, tau: float) -> float:
        if theory:
            return averaged_envelope(delta, tau)
        if mode == "fringes":
            return coincidence_probability_closed(delta, omega_p, tau, overlap)
        if cfg.run.phase_samples > 0:
            return phase_averaged_closed(
                delta, tau, cfg.run.phase_samples, seed, overlap, stream=PHASE_STREAM_OFFSET + index
            )
        return blurred_envelope(delta, tau, blur, overlap)

    def point(index: int) -> CountRecord:
        delta_l = float(grid[index])
        tau = delay_from_stretch(delta_l, n_eff)
        p = min(max(model_probability(index, tau), 0.0), 1.0)
        log.verbose(f"point {index}: delta_l={delta_l:.6e} m tau={tau:.6e} s p={p:.9g}")
        return simulate_point(
            setup, p, seed, stream=index, delta_l=delta_l, tau=tau,
            noiseless=theory, accidentals=not theory,
        )

    indices = range(cfg.run.points)
    if cfg.run.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.run.workers) as pool:
            records = list(pool.map(point, indices))
    else:
        records = [point(i) for i in indices]

    table = render_table(cfg.resolved, records_frame(records))
    # Fit what was written, so an offline re-fit of the file reproduces it.
    _, rows = parse_scan_text(table)
    fit = fit_rows(rows, mode)
    return ScanResult(
        records=records,
        rows=rows,
        fit=fit,
        accidentals=accidental_level(rows),
        delta=delta,
        table=table,
    )


def run_scan(config: str | None = None, seed: int | None = None, out: str | None = None,
             mode: str | None = None, allow_long_scan: bool = False):
    """Simulate a stretch scan, write the CSV and report the dip fit."""
    settings = SettingsManager.from_file(config)
    settings.apply_overrides(seed=seed, mode=mode)
    cfg = settings.experiment_config(allow_long_scan=allow_long_scan)
    log.info(
        f"Scanning {cfg.run.points} points over {cfg.scan.span * 1e3:g} mm "
        f"(mode={cfg.run.mode}, seed={cfg.run.seed}, workers={cfg.run.workers})"
    )
    result = simulate_scan(cfg)
    emit(result.table, format_fit_summary(result.fit, result.accidentals, cfg, result.delta), out)
    if not result.fit.converged or not math.isfinite(result.fit.residual_norm):
        raise NumericalFailure(f"dip fit did not converge: {result.fit.message}")


def get_mapping():
    return {
        "scan": run_scan,  # Simulated stretch scan to CSV plus fit summary.
    }
