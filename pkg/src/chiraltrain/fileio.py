"""CSV and JSON emission for trains, fields, scans, and thermal tables.

Numeric CSV cells use 12 significant digits, '.' decimal separator, no locale
dependence.  Every file written for a run carries the configuration hash: CSVs
as a leading '# config_hash=...' comment line, JSON as a top-level key.
Undefined epsilon cells are written as empty fields.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def fmt(x: float) -> str:
    """12 significant digits."""
    return f"{x:.11e}"


def config_hash(config: dict) -> str:
    """Stable hash of a configuration dictionary."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _header_lines(cfg_hash: str | None) -> list[str]:
    return [f"# config_hash={cfg_hash}"] if cfg_hash else []


def write_json(path: Path, payload: dict, cfg_hash: str | None = None) -> Path:
    path = Path(path)
    if cfg_hash:
        payload = {"config_hash": cfg_hash, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def write_train_csv(path: Path, train, cfg_hash: str | None = None) -> Path:
    path = Path(path)
    lines = _header_lines(cfg_hash)
    lines.append("time_fs,kick_strength,pol_angle_rad")
    for p in train.pulses:
        lines.append(f"{fmt(p.time)},{fmt(p.kick_strength)},{fmt(p.pol_angle)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_field_csv(path: Path, field, cfg_hash: str | None = None) -> Path:
    path = Path(path)
    lines = _header_lines(cfg_hash)
    lines.append("t_fs,ex_re,ex_im,ey_re,ey_im")
    for t, ex, ey in zip(field.t, field.ex, field.ey):
        lines.append(
            f"{fmt(t)},{fmt(ex.real)},{fmt(ex.imag)},{fmt(ey.real)},{fmt(ey.imag)}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_map_csv(path: Path, tau_values, delta_values, matrix,
                   cfg_hash: str | None = None) -> Path:
    """Matrix CSV with tau row headers and delta column headers."""
    path = Path(path)
    lines = _header_lines(cfg_hash)
    lines.append("tau_fs," + ",".join(fmt(d) for d in delta_values))
    for i, tau in enumerate(tau_values):
        cells = ["" if np.isnan(v) else fmt(v) for v in matrix[i]]
        lines.append(fmt(tau) + "," + ",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_scan_csvs(outdir: Path, result, cfg_hash: str | None = None) -> dict[str, Path]:
    outdir = Path(outdir)
    grid = result.grid
    return {
        "s_map": _write_map_csv(outdir / "s_map.csv", grid.tau_values,
                                grid.delta_values, result.s_map, cfg_hash),
        "epsilon_map": _write_map_csv(outdir / "epsilon_map.csv", grid.tau_values,
                                      grid.delta_values, result.epsilon_map, cfg_hash),
    }


def write_thermal_csv(path: Path, fractions: dict[int, float],
                      cfg_hash: str | None = None) -> Path:
    path = Path(path)
    lines = _header_lines(cfg_hash)
    lines.append("N,population_fraction")
    for n in sorted(fractions):
        lines.append(f"{n},{fmt(fractions[n])}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_map_csv(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a map CSV back: (tau_values, delta_values, matrix with NaN holes)."""
    rows = []
    deltas = None
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        cells = line.split(",")
        if deltas is None:
            deltas = np.array([float(c) for c in cells[1:]])
            continue
        rows.append([float(cells[0])] + [float(c) if c else np.nan for c in cells[1:]])
    arr = np.array(rows)
    return arr[:, 0], deltas, arr[:, 1:]
