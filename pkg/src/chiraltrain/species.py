"""Molecular species constants and the species registry file.

A species is defined by its rotational constant B, centrifugal distortion
constant D (both in cm^-1), and which N values exist ("all", "even", "odd";
homonuclear molecules drop every other N by nuclear-spin statistics).

The registry is a JSON file mapping a species name to its constants::

    {
      "O2": {"B_cm1": 1.43768, "D_cm1": 4.842e-06, "parity": "odd"}
    }

Extra keys (e.g. "comment") are ignored.  A registry shipping an ``O2`` entry
is bundled with the package; a custom file can be passed to
:func:`load_registry` / :func:`load_species`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

PARITIES = ("all", "even", "odd")


@dataclass(frozen=True)
class Species:
    """Rigid-rotor species: constants in cm^-1 plus the allowed-N parity."""

    name: str
    B: float
    D: float
    parity: str

    def __post_init__(self):
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}, got {self.parity!r}")
        if not self.B > 0:
            raise ValueError(f"B must be > 0, got {self.B}")
        if self.D < 0:
            raise ValueError(f"D must be >= 0, got {self.D}")
        # D is a small correction by definition of the model
        if self.D >= 1e-3 * self.B:
            raise ValueError(f"D={self.D} is not small against B={self.B} (require D < 1e-3 B)")

    @property
    def min_n(self) -> int:
        return 1 if self.parity == "odd" else 0

    def allows(self, n: int) -> bool:
        if n < 0:
            return False
        if self.parity == "even":
            return n % 2 == 0
        if self.parity == "odd":
            return n % 2 == 1
        return True

    def allowed_n(self, n_max: int) -> list[int]:
        return [n for n in range(n_max + 1) if self.allows(n)]


def _registry_text(path: str | Path | None) -> str:
    if path is None:
        return resources.files("chiraltrain").joinpath("data/species.json").read_text()
    return Path(path).read_text()


def load_registry(path: str | Path | None = None) -> dict[str, Species]:
    """Load and validate a species registry file (bundled file by default)."""
    try:
        raw = json.loads(_registry_text(path))
    except json.JSONDecodeError as exc:
        raise ValueError(f"species registry is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError("species registry must be a JSON object mapping name -> constants")
    registry = {}
    for name, entry in raw.items():
        if not isinstance(entry, dict):
            raise ValueError(f"registry entry {name!r} must be an object")
        missing = [k for k in ("B_cm1", "D_cm1", "parity") if k not in entry]
        if missing:
            raise ValueError(f"registry entry {name!r} is missing keys: {missing}")
        registry[name] = Species(
            name=name,
            B=float(entry["B_cm1"]),
            D=float(entry["D_cm1"]),
            parity=str(entry["parity"]),
        )
    return registry


def load_species(name: str, path: str | Path | None = None) -> Species:
    registry = load_registry(path)
    if name not in registry:
        raise KeyError(f"species {name!r} not found in registry (have: {sorted(registry)})")
    return registry[name]
