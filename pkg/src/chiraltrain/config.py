"""Run configuration: defaults, file loading, overrides, and validation.

A run is configured by one human-editable JSON file; CLI flags override file
keys, and `--set key=value` (dotted paths) overrides both.  Angles are given
in units of pi so figure-matching configs stay readable (``"delta_pi": 0.25``
means pi/4).  Ranges are ``[min, max, count]`` triples.  A metadata JSON
emitted by a previous run reloads as a config (the ``run_config`` key is
picked up), which makes load -> dump -> load idempotent.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from math import pi
from pathlib import Path

from .errors import ConfigError
from .species import Species, load_species

DEFAULTS: dict = {
    "species": "O2",
    "species_file": None,
    "n_max": 29,
    "temperature_K": 8.0,
    "target_N": 3,
    "thermal_floor": 1e-4,
    "signal_floor": 1e-6,
    "workers": 0,
    "output_dir": "runs",
    "figures": True,
    "shaper": {
        "A": 2.0,
        "P_total": 7.0,
        "coverage": 0.999,
        "tau_fs": None,
        "tau_range_fs": [200.0, 5000.0, 97],
        "delta_pi": None,
        "delta_range_pi": [0.0, 1.0, 65],
        "envelope_fwhm_fs": 120.0,
        "carrier_wavelength_nm": 800.0,
    },
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config_file(path: str | Path) -> dict:
    """Read a config (or run-metadata) JSON file."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}", ["<file>"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a JSON object", ["<file>"])
    if "run_config" in raw and isinstance(raw["run_config"], dict):
        raw = raw["run_config"]
    return raw


def parse_override(text: str) -> tuple[list[str], object]:
    """Parse one ``key=value`` override; the value is JSON if it parses, else a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value", [text])
    key, value = text.split("=", 1)
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return key.split("."), parsed


def apply_overrides(config: dict, overrides) -> dict:
    out = copy.deepcopy(config)
    for text in overrides:
        path, value = parse_override(text)
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot set {'.'.join(path)}: {part} is not a section", [text])
        node[path[-1]] = value
    return out


@dataclass
class RunConfig:
    """Validated run parameters (angles already in radians)."""

    species: Species
    species_name: str
    species_file: str | None
    n_max: int
    temperature_k: float
    target_n: int
    thermal_floor: float
    signal_floor: float
    workers: int
    output_dir: str
    figures: bool
    a: float
    p_total: float
    coverage: float
    envelope_fwhm_fs: float
    carrier_wavelength_nm: float
    tau_fs: float | None
    tau_range: tuple[float, float, int] | None
    delta_rad: float | None
    delta_range_rad: tuple[float, float, int] | None
    raw: dict

    def to_dict(self) -> dict:
        """The normalized configuration dictionary (round-trips through validate)."""
        return copy.deepcopy(self.raw)

    def hash_source(self) -> dict:
        """Config subset entering the output hash: physics only, no execution
        details, so identical physics gives identical files regardless of
        worker count or output location."""
        src = self.to_dict()
        for key in ("workers", "output_dir", "figures"):
            src.pop(key, None)
        return src

    def tau_axis(self) -> list[float]:
        import numpy as np

        if self.tau_fs is not None:
            return [self.tau_fs]
        lo, hi, count = self.tau_range
        return [float(t) for t in np.linspace(lo, hi, count)]

    def delta_axis(self) -> list[float]:
        import numpy as np

        if self.delta_rad is not None:
            return [self.delta_rad]
        lo, hi, count = self.delta_range_rad
        return [float(d) for d in np.linspace(lo, hi, count)]


def _expect(errors, keys, key, value, kind, predicate, message):
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        errors.append(f"{key}: expected {message}, got {value!r}")
        keys.append(key)
        return None
    if predicate is not None and not predicate(value):
        errors.append(f"{key}: expected {message}, got {value!r}")
        keys.append(key)
        return None
    return value


def _parse_range(errors, keys, key, value, positive=False):
    ok = (
        isinstance(value, (list, tuple)) and len(value) == 3
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value[:2])
        and isinstance(value[2], int) and value[2] >= 1 and value[1] >= value[0]
        and (not positive or value[0] > 0)
    )
    if not ok:
        errors.append(f"{key}: expected [min, max, count] with count >= 1, got {value!r}")
        keys.append(key)
        return None
    if value[2] == 1 and value[1] != value[0]:
        errors.append(f"{key}: a single-point range needs min == max, got {value!r}")
        keys.append(key)
        return None
    return (float(value[0]), float(value[1]), int(value[2]))


def validate_config(raw: dict) -> RunConfig:
    """Merge with defaults and validate; raises ConfigError listing bad keys."""
    cfg = _deep_merge(DEFAULTS, raw or {})
    errors: list[str] = []
    keys: list[str] = []
    num = (int, float)

    name = _expect(errors, keys, "species", cfg["species"], str, None, "a species name")
    species_file = cfg["species_file"]
    if species_file is not None and not isinstance(species_file, str):
        errors.append(f"species_file: expected a path or null, got {species_file!r}")
        keys.append("species_file")
        species_file = None
    species = None
    if name:
        try:
            species = load_species(name, species_file)
        except (KeyError, ValueError, OSError) as exc:
            errors.append(f"species: {exc}")
            keys.append("species")

    n_max = _expect(errors, keys, "n_max", cfg["n_max"], int, lambda v: v >= 1, "an integer >= 1")
    temperature = _expect(errors, keys, "temperature_K", cfg["temperature_K"], num,
                          lambda v: v > 0, "a temperature > 0 K")
    target_n = _expect(errors, keys, "target_N", cfg["target_N"], int, lambda v: v >= 0,
                       "an integer >= 0")
    thermal_floor = _expect(errors, keys, "thermal_floor", cfg["thermal_floor"], num,
                            lambda v: 0 <= v < 1, "a weight in [0, 1)")
    signal_floor = _expect(errors, keys, "signal_floor", cfg["signal_floor"], num,
                           lambda v: 0 <= v < 1, "a floor in [0, 1)")
    workers = _expect(errors, keys, "workers", cfg["workers"], int, lambda v: v >= 0,
                      "an integer >= 0 (0 = auto)")
    output_dir = _expect(errors, keys, "output_dir", cfg["output_dir"], str, None, "a path")
    figures = cfg["figures"]
    if not isinstance(figures, bool):
        errors.append(f"figures: expected true/false, got {figures!r}")
        keys.append("figures")

    sh = cfg["shaper"]
    if not isinstance(sh, dict):
        errors.append(f"shaper: expected a section, got {sh!r}")
        keys.append("shaper")
        sh = DEFAULTS["shaper"]
    a = _expect(errors, keys, "shaper.A", sh["A"], num, lambda v: v >= 0, "an amplitude >= 0")
    p_total = _expect(errors, keys, "shaper.P_total", sh["P_total"], num, lambda v: v >= 0,
                      "a total kick >= 0")
    coverage = _expect(errors, keys, "shaper.coverage", sh["coverage"], num,
                       lambda v: 0 < v <= 1, "a fraction in (0, 1]")
    fwhm = _expect(errors, keys, "shaper.envelope_fwhm_fs", sh["envelope_fwhm_fs"], num,
                   lambda v: v > 0, "a duration > 0 fs")
    carrier = _expect(errors, keys, "shaper.carrier_wavelength_nm", sh["carrier_wavelength_nm"],
                      num, lambda v: v > 0, "a wavelength > 0 nm")

    tau_fs = sh["tau_fs"]
    tau_range = None
    if tau_fs is not None:
        tau_fs = _expect(errors, keys, "shaper.tau_fs", tau_fs, num, lambda v: v > 0,
                         "a period > 0 fs")
        if tau_fs is not None:
            tau_fs = float(tau_fs)
    else:
        tau_range = _parse_range(errors, keys, "shaper.tau_range_fs", sh["tau_range_fs"],
                                 positive=True)

    delta_pi = sh["delta_pi"]
    delta_rad = None
    delta_range_rad = None
    if delta_pi is not None:
        delta_pi = _expect(errors, keys, "shaper.delta_pi", delta_pi, num, None,
                           "an angle in units of pi")
        if delta_pi is not None:
            delta_rad = float(delta_pi) * pi
    else:
        rng = _parse_range(errors, keys, "shaper.delta_range_pi", sh["delta_range_pi"])
        if rng is not None:
            delta_range_rad = (rng[0] * pi, rng[1] * pi, rng[2])

    if species is not None and target_n is not None:
        if not species.allows(target_n):
            errors.append(f"target_N: N={target_n} is not an allowed level of {species.name}")
            keys.append("target_N")
        elif n_max is not None and target_n > n_max:
            errors.append(f"target_N: N={target_n} exceeds n_max={n_max}")
            keys.append("target_N")

    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors), keys)

    return RunConfig(
        species=species,
        species_name=name,
        species_file=species_file,
        n_max=n_max,
        temperature_k=float(temperature),
        target_n=target_n,
        thermal_floor=float(thermal_floor),
        signal_floor=float(signal_floor),
        workers=workers,
        output_dir=output_dir,
        figures=figures,
        a=float(a),
        p_total=float(p_total),
        coverage=float(coverage),
        envelope_fwhm_fs=float(fwhm),
        carrier_wavelength_nm=float(carrier),
        tau_fs=tau_fs,
        tau_range=tau_range,
        delta_rad=delta_rad,
        delta_range_rad=delta_range_rad,
        raw=cfg,
    )


def load_run_config(path: str | Path | None = None, overrides=()) -> RunConfig:
    """File (optional) + overrides -> validated RunConfig."""
    raw = load_config_file(path) if path is not None else {}
    if overrides:
        raw = apply_overrides(_deep_merge(DEFAULTS, raw), overrides)
    return validate_config(raw)
