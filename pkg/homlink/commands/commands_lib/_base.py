# commands_lib/_base.py
import io
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from homlink.core.errors import ConfigError, DegenerateDataError, SchemaError
from homlink.core.settings_manager import MM, PS, ExperimentConfig, SettingsManager
from homlink.data.config_store import ConfigStore
from homlink.sim.counting import CountRecord
from homlink.sim.dip_fit import (
    DipFit,
    dip_width_prediction,
    fit_gaussian_dip,
    oracle_dip_fwhm,
    visibilities_from_fit,
)
from homlink.sim.spectral_source import coherence_time
from homlink.utils.debug_logger import get_logger

log = get_logger("commands._base")

SCAN_COLUMNS = ("delta_l_mm", "tau_ps", "p_model", "expected_signal", "expected_accidentals", "counts")
FLOAT_FORMAT = "%.9g"
_PARSER_LINE = re.compile(r"line (\d+)")


@dataclass(frozen=True)
class ScanRow:
    """One parsed CSV row, in the units of the file."""
    delta_l_mm: float
    tau_ps: float
    p_model: float
    expected_signal: float
    expected_accidentals: float
    counts: float


def records_frame(records: list[CountRecord]) -> pd.DataFrame:
    """Scan records in file units; counts stay integer unless the scan was noiseless."""
    return pd.DataFrame(
        {
            "delta_l_mm": [r.delta_l / MM for r in records],
            "tau_ps": [r.tau / PS for r in records],
            "p_model": [r.p_model for r in records],
            "expected_signal": [r.expected_signal for r in records],
            "expected_accidentals": [r.expected_accidentals for r in records],
            "counts": [r.sampled_total for r in records],
        },
        columns=list(SCAN_COLUMNS),
    )


def render_table(resolved: tuple[tuple[str, str], ...], frame: pd.DataFrame) -> str:
    """Config echo as '# key = value' comment lines, then the CSV body; LF line endings."""
    echo = "".join(f"# {key} = {value}\n" for key, value in resolved)
    return echo + frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _split_echo(text: str) -> tuple[list[tuple[str, str]], list[str]]:
    """Leading '# key = value' lines and the remaining table lines."""
    if "\r" in text:
        raise SchemaError(text.count("\n", 0, text.index("\r")) + 1, "CRLF line ending; scan files use LF")
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    resolved: list[tuple[str, str]] = []
    for line in lines:
        if not line.startswith("#"):
            break
        key, sep, value = line[1:].partition("=")
        if not sep:
            raise SchemaError(len(resolved) + 1, "config echo must read '# key = value'")
        resolved.append((key.strip(), value.strip()))
    return resolved, lines[len(resolved):]


def parse_scan_text(text: str) -> tuple[list[tuple[str, str]], list[ScanRow]]:
    """
    Parse a scan CSV into its echoed config and rows.

    Any deviation from the schema raises SchemaError naming the 1-based line.
    """
    resolved, table = _split_echo(text)
    header_line = len(resolved) + 1
    if not table or not table[0]:
        raise SchemaError(header_line, "missing column header")
    for lineno, line in enumerate(table[1:], start=header_line + 1):
        if not line:
            raise SchemaError(lineno, "blank line inside the table")
        if line.startswith("#"):
            raise SchemaError(lineno, "comment after the column header")

    try:
        frame = pd.read_csv(io.StringIO("\n".join(table) + "\n"), header=None, dtype=str)
    except pd.errors.ParserError as e:
        match = _PARSER_LINE.search(str(e))
        lineno = header_line + int(match.group(1)) - 1 if match else header_line
        raise SchemaError(lineno, f"expected {len(SCAN_COLUMNS)} fields") from None
    if tuple(frame.iloc[0]) != SCAN_COLUMNS:
        raise SchemaError(header_line, f"expected header {','.join(SCAN_COLUMNS)}")
    if len(frame) == 1:
        raise SchemaError(header_line, "no data rows")

    values = frame.iloc[1:].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    missing = np.isnan(values).any(axis=1)
    infinite = np.isinf(values).any(axis=1)
    negative = values[:, -1] < 0.0
    bad = missing | infinite | negative
    if bad.any():
        row = int(np.argmax(bad))
        reason = "missing or non-numeric field" if missing[row] else (
            "non-finite field" if infinite[row] else "negative counts"
        )
        raise SchemaError(header_line + 1 + row, reason)
    return resolved, [ScanRow(*(float(v) for v in row)) for row in values]


def read_scan_csv(path) -> tuple[list[tuple[str, str]], list[ScanRow]]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read scan file: {e.strerror or e}") from e
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise SchemaError(data.count(b"\n", 0, e.start) + 1, "not valid UTF-8") from None
    return parse_scan_text(text)


def settings_from_echo(resolved) -> SettingsManager:
    """Rebuild settings from a scan header, keeping only keys this build knows."""
    store = ConfigStore()
    known = set(store.known_keys)
    lines = [f"{key} = {value}" for key, value in resolved if key in known]
    store.load_text("\n".join(lines), source="<scan header>")
    return SettingsManager(store)


def fit_points(rows: list[ScanRow]) -> list[tuple[float, float]]:
    """(delta_l in metres, counts) as fed to the dip fit."""
    return [(row.delta_l_mm * MM, row.counts) for row in rows]


def fit_weights(mode: str) -> str:
    return "none" if mode == "theory" else "poisson"


def fit_rows(rows: list[ScanRow], mode: str) -> DipFit:
    """Dip fit of scan rows; data the fit cannot use gives an unconverged result instead of an error."""
    try:
        return fit_gaussian_dip(fit_points(rows), weights=fit_weights(mode))
    except DegenerateDataError as e:
        log.warning(f"dip fit skipped: {e}")
        return DipFit.unconverged(str(e))


def accidental_level(rows: list[ScanRow]) -> float:
    return sum(row.expected_accidentals for row in rows) / len(rows)


def format_fit_summary(fit: DipFit, accidentals: float, cfg: ExperimentConfig, delta: float | None = None) -> str:
    """Human-readable fit report shared by ``scan`` and ``fit``."""
    try:
        raw, net = visibilities_from_fit(fit, accidentals)
        raw_text, net_text = f"{raw:.4f}", f"{net:.4f}"
    except DegenerateDataError as e:
        log.warning(f"visibility undefined: {e}")
        raw_text = net_text = "undefined"
    n_eff = cfg.interferometer.effective_group_index
    sd = [v ** 0.5 if v >= 0.0 else float("nan") for v in fit.covariance_diag]
    lines = [
        f"converged            : {fit.converged} ({fit.evaluations} evaluations)",
        f"baseline B           : {fit.baseline:.6g} +- {sd[0]:.2g} counts",
        f"depth A              : {fit.depth:.6g} +- {sd[1]:.2g} counts",
        f"center               : {fit.center / MM:.6g} +- {sd[2] / MM:.2g} mm",
        f"width w (1/e)        : {fit.width / MM:.6g} +- {sd[3] / MM:.2g} mm",
        f"fitted FWHM          : {fit.fwhm / MM:.4f} mm",
        f"predicted FWHM       : {dip_width_prediction(coherence_time(cfg.source), n_eff) / MM:.4f} mm",
    ]
    if delta is not None:
        lines.append(f"model FWHM           : {oracle_dip_fwhm(delta, n_eff) / MM:.4f} mm")
    lines += [
        f"accidentals / point  : {accidentals:.6g} counts",
        f"raw visibility       : {raw_text}",
        f"net visibility       : {net_text}",
        f"residual norm        : {fit.residual_norm:.6g}",
    ]
    return "\n".join(lines) + "\n"


def emit(table: str, summary: str, out: str | None):
    """
    Write the table to ``out`` or stdout.

    The summary goes to stderr when stdout carries the table.
    """
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(table)
        log.info(f"Wrote {path}")
        sys.stdout.write(summary)
    else:
        sys.stdout.write(table)
        sys.stdout.flush()
        sys.stderr.write(summary)
