import sys

from homlink.core.errors import NumericalFailure
from homlink.sim.interference_core import calibrated_delta
from homlink.sim.spectral_source import make_joint_spectrum
from homlink.utils.debug_logger import get_logger

from ._base import accidental_level, fit_rows, format_fit_summary, read_scan_csv, settings_from_echo

log = get_logger("commands.fit")


def run_fit(csv_path: str, out: str | None = None):
    """Re-fit a saved scan CSV using the config echoed in its header."""
    log.info(f"Fitting scan file '{csv_path}'")
    resolved, rows = read_scan_csv(csv_path)
    cfg = settings_from_echo(resolved).experiment_config(allow_long_scan=True)

    fit = fit_rows(rows, cfg.run.mode)
    summary = format_fit_summary(fit, accidental_level(rows), cfg, calibrated_delta(make_joint_spectrum(cfg.source)))

    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(summary)
        log.info(f"Wrote {out}")
    else:
        sys.stdout.write(summary)
    if not fit.converged:
        raise NumericalFailure(f"dip fit did not converge: {fit.message}")


def get_mapping():
    return {
        "fit": run_fit,  # Offline re-fit of a scan CSV.
    }
