"""Thermal ensembles, full-train propagation, and observable extraction.

The measured signals are modeled as perfect N-selective population readout:
for a target shell N, Q_left collects population with M > 0 plus half of the
M = 0 population, Q_right the mirror, and the directionality is
epsilon = (Q_left - Q_right) / (Q_left + Q_right).  Positive epsilon means a
counter-clockwise excess (viewed along the beam).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C2_CM_K, C_CM_FS
from .errors import BasisTooSmallError
from .rotor import KickEngine, RotorBasis, WaveFunction, get_engine
from .train import ChiralTrain

#: Ensemble members below this weight relative to the largest member are dropped.
DEFAULT_THERMAL_FLOOR = 1e-4

#: Below this target-shell population, epsilon is reported as undefined.
DEFAULT_SIGNAL_FLOOR = 1e-6

#: Truncation rule: after propagation the top two allowed N shells must hold
#: less population than this.
TRUNCATION_LIMIT = 1e-6


@dataclass(frozen=True)
class ThermalEnsemble:
    """Boltzmann-weighted (N0, M0) initial states; weights sum to 1."""

    basis: RotorBasis
    members: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    temperature_k: float

    def __len__(self):
        return len(self.members)


def thermal_states(basis: RotorBasis, temperature_k: float,
                   floor: float = DEFAULT_THERMAL_FLOOR) -> ThermalEnsemble:
    """Thermal ensemble over |N0, M0> with weights exp(-E hc / kT).

    Weights are uniform across M within a shell.  Members whose weight falls
    below `floor` relative to the largest member weight are dropped and the
    remainder renormalized.
    """
    if temperature_k <= 0:
        raise ValueError(f"temperature must be > 0 K, got {temperature_k}")
    if not 0.0 <= floor < 1.0:
        raise ValueError(f"floor must be in [0, 1), got {floor}")
    raw = np.exp(-basis.energies * (C2_CM_K / temperature_k))
    keep = raw / raw.max() >= floor
    if not keep.any():
        raise ValueError("thermal ensemble is empty after applying the weight floor")
    weights = raw[keep] / raw[keep].sum()
    members = tuple(s for s, k in zip(basis.states, keep) if k)
    return ThermalEnsemble(basis, members, tuple(float(w) for w in weights), temperature_k)


def thermal_fractions(ensemble: ThermalEnsemble) -> dict[int, float]:
    """Population fraction per N shell."""
    out: dict[int, float] = {}
    for (n, _), w in zip(ensemble.members, ensemble.weights):
        out[n] = out.get(n, 0.0) + w
    return out


def _check_truncation(psi: WaveFunction) -> None:
    basis = psi.basis
    top2 = basis.shells[-2:]
    pops = psi.populations()
    leak = float(pops[np.isin(basis.n_values, top2)].sum())
    if leak >= TRUNCATION_LIMIT:
        raise BasisTooSmallError(leak, basis.n_max)


def propagate_train(psi0: WaveFunction, train: ChiralTrain,
                    engine: KickEngine | None = None,
                    check_basis: bool = True) -> WaveFunction:
    """Propagate through the train: free evolution to each pulse, then the kick.

    Each kick is applied in the frame of its polarization angle (conjugation by
    rotate_z).  With `check_basis` the truncation rule is enforced on the final
    state; disable it only for small-basis algebra checks.
    """
    basis = psi0.basis
    if engine is None:
        engine = get_engine(basis)
    elif engine.basis is not basis and engine.basis.fingerprint() != basis.fingerprint():
        raise ValueError("engine was built for a different basis")
    amps = psi0.amplitudes.copy()
    m = basis.m_values
    free_rate = -2j * np.pi * basis.energies * C_CM_FS  # phase per fs
    t_now = 0.0
    for pulse in train.pulses:
        dt = pulse.time - t_now
        if dt < -1e-12:
            raise ValueError(f"pulse at t={pulse.time} fs lies before the current time {t_now} fs")
        if dt > 0:
            amps = amps * np.exp(free_rate * dt)
        u = engine.unitary(pulse.kick_strength)
        amps = np.exp(1j * m * pulse.pol_angle) * amps
        amps = u @ amps
        amps = np.exp(-1j * m * pulse.pol_angle) * amps
        t_now = pulse.time
    psi = WaveFunction(basis, amps)
    if check_basis and len(train.pulses):
        _check_truncation(psi)
    return psi


@dataclass
class Observables:
    """Per-shell populations and the left/right split of the target shell."""

    target_n: int
    pop_by_n: dict[int, float]
    q_left: float
    q_right: float
    s_total: float
    epsilon: float | None


def observables_from_state(psi: WaveFunction, target_n: int,
                           signal_floor: float = DEFAULT_SIGNAL_FLOOR) -> Observables:
    """Observables of a single propagated state."""
    basis = psi.basis
    if not basis.species.allows(target_n) or target_n > basis.n_max:
        raise ValueError(f"target N={target_n} is not in the basis")
    pops = psi.populations()
    sel = basis.n_values == target_n
    m = basis.m_values[sel]
    p = pops[sel]
    half_m0 = 0.5 * float(p[m == 0].sum())
    q_left = float(p[m > 0].sum()) + half_m0
    q_right = float(p[m < 0].sum()) + half_m0
    s_total = q_left + q_right
    defined = s_total >= signal_floor and s_total > 0.0
    eps = (q_left - q_right) / s_total if defined else None
    return Observables(target_n, psi.population_by_n(), q_left, q_right, s_total, eps)


def ensemble_observables(ensemble: ThermalEnsemble, train: ChiralTrain, target_n: int,
                         engine: KickEngine | None = None,
                         signal_floor: float = DEFAULT_SIGNAL_FLOOR,
                         check_basis: bool = True) -> Observables:
    """Propagate every ensemble member and accumulate weighted observables."""
    basis = ensemble.basis
    if not basis.species.allows(target_n) or target_n > basis.n_max:
        raise ValueError(f"target N={target_n} is not in the basis")
    if engine is None:
        engine = get_engine(basis)
    q_left = 0.0
    q_right = 0.0
    pop_by_n = {n: 0.0 for n in basis.shells}
    for (n0, m0), w in zip(ensemble.members, ensemble.weights):
        psi = propagate_train(WaveFunction.basis_state(basis, n0, m0), train,
                              engine=engine, check_basis=check_basis)
        obs = observables_from_state(psi, target_n, signal_floor=0.0)
        q_left += w * obs.q_left
        q_right += w * obs.q_right
        for n, p in obs.pop_by_n.items():
            pop_by_n[n] += w * p
    s_total = q_left + q_right
    defined = s_total >= signal_floor and s_total > 0.0
    eps = (q_left - q_right) / s_total if defined else None
    return Observables(target_n, pop_by_n, q_left, q_right, s_total, eps)
