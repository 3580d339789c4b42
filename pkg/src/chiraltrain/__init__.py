"""Simulation of unidirectional molecular rotation driven by chiral pulse
trains: pulse-shaper train synthesis, thermal rigid-rotor propagation in the
impulsive (delta-kick) limit, and excitation/directionality maps over the
(train period, polarization step) plane."""

from ._version import __version__
from .ensemble import (
    Observables,
    ThermalEnsemble,
    ensemble_observables,
    propagate_train,
    thermal_fractions,
    thermal_states,
)
from .errors import BasisTooSmallError, ChiralTrainError, ConfigError, ScanCellError
from .rotor import (
    KickEngine,
    Operator,
    RotorBasis,
    WaveFunction,
    beat_period,
    build_basis,
    cos2_matrix_x,
    cos2_matrix_y,
    cos2_matrix_z,
    free_propagate,
    kick_unitary,
    rotate_z,
    rotational_energy,
    wigner3j,
)
from .scan import ScanGrid, ScanResult, epsilon_symmetry_report, scan
from .species import Species, load_registry, load_species
from .train import (
    ChiralTrain,
    Pulse,
    SampledField,
    ShaperConfig,
    bessel_weights,
    kick_sequence,
    project_polarization,
    pulse_stokes,
    quarter_wave,
    sideband_cutoff,
    synthesize_field,
    train_from_shaper,
)

__all__ = [
    "__version__",
    "BasisTooSmallError", "ChiralTrainError", "ConfigError", "ScanCellError",
    "Species", "load_registry", "load_species",
    "RotorBasis", "WaveFunction", "Operator", "KickEngine",
    "build_basis", "rotational_energy", "beat_period", "wigner3j",
    "cos2_matrix_x", "cos2_matrix_y", "cos2_matrix_z",
    "kick_unitary", "rotate_z", "free_propagate",
    "ShaperConfig", "Pulse", "ChiralTrain", "SampledField",
    "bessel_weights", "sideband_cutoff", "kick_sequence", "train_from_shaper",
    "synthesize_field", "quarter_wave", "project_polarization", "pulse_stokes",
    "ThermalEnsemble", "Observables", "thermal_states", "thermal_fractions",
    "propagate_train", "ensemble_observables",
    "ScanGrid", "ScanResult", "scan", "epsilon_symmetry_report",
]
