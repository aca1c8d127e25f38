from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from homlink.core.errors import ConfigError, HomLinkError
from homlink.data.config_store import ConfigStore
from homlink.data.defaults import ExperimentDefaults
from homlink.sim.counting import CoincidenceSetup, DetectorMode, DetectorModel
from homlink.sim.fiber_channel import FiberChannel, channel_from_dispersion, group_index_to_tau0
from homlink.sim.interference_core import InterferometerSpec
from homlink.sim.spectral_source import SourceSpec
from homlink.utils.debug_logger import get_logger

NM = 1e-9
NS = 1e-9
PS = 1e-12
MM = 1e-3
RUN_MODES = ("envelope", "fringes", "theory")
MIN_SCAN_POINTS = 5
MAX_SEED = 2 ** 64 - 1


@dataclass(frozen=True)
class ScanSettings:
    center: float
    span: float
    drift_k_per_h: float
    stability_k_per_h: float


@dataclass(frozen=True)
class DispersionSettings:
    spread_per_km: float
    d_min: float
    d_max: float
    band_points: int
    tolerance: float | None


@dataclass(frozen=True)
class RunSettings:
    seed: int
    points: int
    mode: str
    phase_samples: int
    workers: int


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceSpec
    interferometer: InterferometerSpec
    scan: ScanSettings
    fiber_a: FiberChannel
    fiber_b: FiberChannel
    setup: CoincidenceSetup
    accidental_fraction: float | None
    dispersion: DispersionSettings
    run: RunSettings
    resolved: tuple[tuple[str, str], ...]

    @property
    def fibers(self) -> tuple[FiberChannel, FiberChannel]:
        return self.fiber_a, self.fiber_b


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


class SettingsManager:
    """Typed, validated view over a :class:`ConfigStore`."""

    def __init__(self, store: ConfigStore | None = None):
        self._s = store if store is not None else ConfigStore()
        self.log = get_logger()

    @classmethod
    def from_file(cls, path: str | Path | None) -> "SettingsManager":
        store = ConfigStore()
        if path is not None:
            store.load(path)
        return cls(store)

    def setValue(self, key: str, value):
        if key not in self._s.known_keys:
            raise ConfigError(key, "unknown key")
        self._s.set(key, value)

    def apply_overrides(self, seed=None, mode=None):
        if seed is not None:
            self.setValue("run.seed", seed)
        if mode is not None:
            self.setValue("run.mode", mode)

    # ---- Typed accessors ----
    def _float(self, key: str) -> float:
        raw = self._s.get(key)
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(key, f"must be finite, got {raw!r}")
        return value

    def _positive(self, key: str) -> float:
        value = self._float(key)
        if value <= 0.0:
            raise ConfigError(key, f"must be > 0, got {value:g}")
        return value

    def _non_negative(self, key: str) -> float:
        value = self._float(key)
        if value < 0.0:
            raise ConfigError(key, f"must be >= 0, got {value:g}")
        return value

    def _fraction(self, key: str) -> float:
        value = self._float(key)
        if not 0.0 <= value <= 1.0:
            raise ConfigError(key, f"must lie in [0, 1], got {value:g}")
        return value

    def _int(self, key: str, minimum: int = 0, maximum: int | None = None) -> int:
        raw = self._s.get(key)
        try:
            value = int(str(raw).strip())
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected an integer, got {raw!r}") from None
        if value < minimum or (maximum is not None and value > maximum):
            raise ConfigError(key, f"must lie in [{minimum}, {maximum if maximum is not None else 'inf'}], got {value}")
        return value

    def _str(self, key: str) -> str:
        return str(self._s.get(key, "")).strip()

    def _choice(self, key: str, choices: tuple[str, ...]) -> str:
        value = self._str(key)
        if value not in choices:
            raise ConfigError(key, f"must be one of {', '.join(choices)}, got {value!r}")
        return value

    def _marker(self, key: str, marker: str) -> bool:
        raw = self._s.get(key)
        return isinstance(raw, str) and raw.strip().lower() == marker

    # ---- Sections ----
    def _source(self) -> SourceSpec:
        override = None
        if not self._marker("source.coherence_time_ps", "none"):
            override = self._positive("source.coherence_time_ps") * PS
        pump = self._positive("source.pump_wavelength_nm") * NM
        filter_fwhm = self._positive("source.filter_fwhm_nm") * NM
        if filter_fwhm >= 2.0 * pump:
            raise ConfigError("source.filter_fwhm_nm", "must be far below the degenerate wavelength")
        return SourceSpec(
            pump_wavelength=pump,
            filter_fwhm_wavelength=filter_fwhm,
            pair_rate=self._non_negative("source.pair_rate"),
            mode_overlap=self._fraction("source.mode_overlap"),
            coherence_time_override=override,
        )

    def _interferometer(self) -> InterferometerSpec:
        n_eff = self._float("interferometer.group_index")
        if n_eff <= 1.0:
            raise ConfigError("interferometer.group_index", f"must be > 1, got {n_eff:g}")
        return InterferometerSpec(
            bs1_transmittance=self._fraction("interferometer.bs1_transmittance"),
            bs2_transmittance=self._fraction("interferometer.bs2_transmittance"),
            effective_group_index=n_eff,
        )

    def _scan(self, allow_long_scan: bool) -> ScanSettings:
        scan_range = self._positive("interferometer.scan_range_mm")
        if scan_range > ExperimentDefaults.max_scan_range_mm and not allow_long_scan:
            raise ConfigError(
                "interferometer.scan_range_mm",
                f"{scan_range:g} mm exceeds the {ExperimentDefaults.max_scan_range_mm:g} mm stretcher range "
                "(pass --allow-long-scan to lift the guard)",
            )
        return ScanSettings(
            center=self._float("interferometer.scan_center_mm") * MM,
            span=scan_range * MM,
            drift_k_per_h=self._non_negative("interferometer.drift_k_per_h"),
            stability_k_per_h=self._positive("interferometer.stability_k_per_h"),
        )

    def _fiber(self, section: str, center_wavelength: float) -> FiberChannel:
        return channel_from_dispersion(
            length=self._non_negative(f"{section}.length_km"),
            dispersion=self._float(f"{section}.dispersion_ps_nm_km"),
            center_wavelength=center_wavelength,
            tau2=self._float(f"{section}.tau2_ps3_per_km") * PS ** 3,
            tau0=group_index_to_tau0(self._positive(f"{section}.group_index")),
            thermal_coeff=self._non_negative(f"{section}.thermal_mm_per_k_km") * MM,
            label=self._str(f"{section}.label"),
        )

    def _detector(self, section: str) -> DetectorModel:
        return DetectorModel(
            efficiency=self._fraction(f"{section}.efficiency"),
            mode=DetectorMode(self._choice(f"{section}.mode", tuple(m.value for m in DetectorMode))),
            dark_rate=self._non_negative(f"{section}.dark_rate_hz"),
            dark_prob_per_ns=self._non_negative(f"{section}.dark_prob_per_ns"),
            label=self._str(f"{section}.label"),
        )

    def _setup(self, source: SourceSpec) -> CoincidenceSetup:
        det_c = self._detector("detector_c")
        if det_c.mode is not DetectorMode.FREE_RUNNING:
            raise ConfigError("detector_c.mode", "the trigger detector must be free_running")
        return CoincidenceSetup(
            det_c=det_c,
            det_d=self._detector("detector_d"),
            window=self._positive("counting.window_ns") * NS,
            integration_time=self._positive("counting.integration_s"),
            pair_rate_at_bs2=source.pair_rate * self._fraction("counting.link_transmission"),
        )

    def _accidental_fraction(self) -> float | None:
        if self._marker("counting.accidental_fraction", "none"):
            return None
        value = self._fraction("counting.accidental_fraction")
        if value >= 1.0:
            raise ConfigError("counting.accidental_fraction", "must be < 1")
        return value

    def _dispersion(self) -> DispersionSettings:
        d_min = self._float("dispersion.d_min_ps_nm_km")
        d_max = self._float("dispersion.d_max_ps_nm_km")
        if d_max < d_min:
            raise ConfigError("dispersion.d_max_ps_nm_km", "must be >= dispersion.d_min_ps_nm_km")
        tolerance = None
        if not self._marker("dispersion.tolerance_ps", "auto"):
            tolerance = self._positive("dispersion.tolerance_ps") * PS
        return DispersionSettings(
            spread_per_km=self._non_negative("dispersion.spread_ps_per_km") * PS,
            d_min=d_min,
            d_max=d_max,
            band_points=self._int("dispersion.band_points", minimum=3),
            tolerance=tolerance,
        )

    def _run(self) -> RunSettings:
        return RunSettings(
            seed=self._int("run.seed", minimum=0, maximum=MAX_SEED),
            points=self._int("run.points", minimum=MIN_SCAN_POINTS),
            mode=self._choice("run.mode", RUN_MODES),
            phase_samples=self._int("run.phase_samples", minimum=0),
            workers=self._int("run.workers", minimum=1),
        )

    def experiment_config(self, allow_long_scan: bool = False) -> ExperimentConfig:
        """Resolve every section; the first invalid field raises ConfigError with its path."""
        try:
            source = self._source()
            config = ExperimentConfig(
                source=source,
                interferometer=self._interferometer(),
                scan=self._scan(allow_long_scan),
                fiber_a=self._fiber("fiberA", source.degenerate_wavelength),
                fiber_b=self._fiber("fiberB", source.degenerate_wavelength),
                setup=self._setup(source),
                accidental_fraction=self._accidental_fraction(),
                dispersion=self._dispersion(),
                run=self._run(),
                resolved=self.resolved_items(),
            )
        except ConfigError:
            raise
        except HomLinkError as e:
            raise ConfigError("config", str(e)) from e
        self.log.debug(f"Resolved configuration with {len(config.resolved)} keys")
        return config

    def resolved_items(self) -> tuple[tuple[str, str], ...]:
        return tuple((key, format_value(value)) for key, value in self._s.flatten().items())
