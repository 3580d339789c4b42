from math import pi

import numpy as np
import pytest

from chiraltrain import (
    BasisTooSmallError,
    ChiralTrain,
    KickEngine,
    Pulse,
    Species,
    WaveFunction,
    beat_period,
    build_basis,
    ensemble_observables,
    propagate_train,
    thermal_fractions,
    thermal_states,
    train_from_shaper,
)
from chiraltrain.oracles import boltzmann_fraction, dense_train_oracle


# ---------------------------------------------------------------- thermal ensemble

def test_thermal_ground_shell_at_low_temperature(o2_basis5):
    ens = thermal_states(o2_basis5, 0.01)
    assert set(ens.members) == {(1, -1), (1, 0), (1, 1)}
    assert ens.weights == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-15)


def test_thermal_fractions_at_8k_match_boltzmann_oracle(o2, o2_basis29):
    ens = thermal_states(o2_basis29, 8.0, floor=1e-4)
    fractions = thermal_fractions(ens)
    # oracle: explicit Boltzmann sum over odd N <= 11 with 2N+1 degeneracy
    shells = [1, 3, 5, 7, 9, 11]
    f1 = boltzmann_fraction(o2.B, o2.D, 8.0, shells, 1)
    f3 = boltzmann_fraction(o2.B, o2.D, 8.0, shells, 3)
    assert f1 == pytest.approx(0.8485559193192878, abs=1e-9)  # frozen oracle value
    # the 1e-4 member floor drops N >= 7, shifting fractions by a few 1e-6
    assert fractions[1] == pytest.approx(f1, abs=1e-4)
    assert fractions[3] == pytest.approx(f3, abs=1e-4)
    assert fractions.get(5, 0.0) < 0.01
    assert sum(fractions.values()) == pytest.approx(1.0, abs=1e-12)
    # floor 1e-4 keeps N0 <= 5 at 8 K
    assert max(n for n, _ in ens.members) == 5
    assert len(ens) == 3 + 7 + 11


def test_thermal_equal_energies_get_equal_weights():
    sp = Species("flat", 1.0, 0.0, "all")
    basis = build_basis(sp, 1)
    ens = thermal_states(basis, 5.0)
    by_shell = thermal_fractions(ens)
    # within one shell all M weights are equal
    w = dict(zip(ens.members, ens.weights))
    assert w[(1, -1)] == w[(1, 0)] == w[(1, 1)]
    assert by_shell[1] == pytest.approx(3 * w[(1, 0)], abs=1e-15)


def test_thermal_floor_drops_members(o2_basis29):
    ens = thermal_states(o2_basis29, 8.0, floor=1e-3)
    assert max(n for n, _ in ens.members) == 3
    assert sum(ens.weights) == pytest.approx(1.0, abs=1e-12)


def test_thermal_invalid_arguments(o2_basis5):
    with pytest.raises(ValueError):
        thermal_states(o2_basis5, -1.0)
    with pytest.raises(ValueError):
        thermal_states(o2_basis5, 8.0, floor=1.5)


# ---------------------------------------------------------------- propagation

def test_empty_train_leaves_state_unchanged(o2_basis5):
    psi0 = WaveFunction.basis_state(o2_basis5, 1, 0)
    train = ChiralTrain([], delta=0.0, tau=100.0)
    out = propagate_train(psi0, train)
    assert np.array_equal(out.amplitudes, psi0.amplitudes)


def test_single_kick_selection_rules(o2_basis29, engine29):
    # A kick from M = 0 conserves M parity exactly: odd M stays empty.  The
    # first-order step is dM in {0, +-2}; a strong kick reaches higher even M
    # through repeated action, so only the parity statement is structural.
    basis = o2_basis29
    psi0 = WaveFunction.basis_state(basis, 1, 0)
    strong = propagate_train(psi0, ChiralTrain([Pulse(0.0, 7.0, 0.0)], delta=0.0, tau=100.0),
                             engine=engine29)
    pops = strong.populations()
    for i, (n, m) in enumerate(basis.states):
        assert n % 2 == 1  # odd basis only
        if m % 2 != 0:
            assert pops[i] < 1e-28
    # weak kick: population beyond |M| = 2 is higher order in P
    weak = propagate_train(psi0, ChiralTrain([Pulse(0.0, 1e-2, 0.0)], delta=0.0, tau=100.0),
                           engine=engine29)
    wpops = weak.populations()
    first_order = max(wpops[i] for i, (n, m) in enumerate(basis.states)
                      if (n, m) != (1, 0) and abs(m) <= 2)
    for i, (n, m) in enumerate(basis.states):
        if abs(m) > 2:
            assert wpops[i] < 1e-4 * first_order


def test_two_pulse_timing_constructive_vs_destructive(o2):
    basis = build_basis(o2, 15)
    engine = KickEngine(basis)
    period = beat_period(o2, 3)
    psi0 = WaveFunction.basis_state(basis, 1, 0)

    def n3_population(spacing):
        train = ChiralTrain([Pulse(0.0, 1.0, 0.0), Pulse(spacing, 1.0, 0.0)],
                            delta=0.0, tau=spacing)
        out = propagate_train(psi0, train, engine=engine)
        return out.population_by_n()[3]

    assert n3_population(period) > n3_population(period / 2)


def test_propagate_matches_dense_matrix_product_oracle(o2, o2_basis5):
    train = ChiralTrain(
        [Pulse(0.0, 0.9, 0.0), Pulse(850.0, 0.7, 0.6)], delta=0.6, tau=850.0
    )
    rng = np.random.default_rng(7)
    amps = rng.normal(size=o2_basis5.size) + 1j * rng.normal(size=o2_basis5.size)
    amps /= np.linalg.norm(amps)
    psi0 = WaveFunction(o2_basis5, amps)
    fast = propagate_train(psi0, train, check_basis=False)
    reference = dense_train_oracle(amps, train.pulses, o2_basis5.states, o2_basis5.energies)
    assert np.max(np.abs(fast.amplitudes - reference)) < 1e-12


def test_propagation_norm_preserved(o2_basis29, engine29):
    train = train_from_shaper(2.0, 2400.0, pi / 3, 7.0)
    psi0 = WaveFunction.basis_state(o2_basis29, 1, 1)
    out = propagate_train(psi0, train, engine=engine29)
    assert abs(out.norm() - 1.0) < 1e-9


def test_truncation_rule_fires_for_small_basis(o2):
    basis = build_basis(o2, 9)
    psi0 = WaveFunction.basis_state(basis, 1, 0)
    train = ChiralTrain([Pulse(0.0, 7.0, 0.0)], delta=0.0, tau=100.0)
    with pytest.raises(BasisTooSmallError) as exc_info:
        propagate_train(psi0, train)
    err = exc_info.value
    assert err.population > 1e-6
    assert err.n_max == 9
    assert "population" in str(err)
    assert str(err.suggestion) in str(err)


def test_engine_basis_mismatch_rejected(o2, o2_basis5):
    other = KickEngine(build_basis(o2, 7))
    train = ChiralTrain([Pulse(0.0, 1.0, 0.0)], delta=0.0, tau=100.0)
    with pytest.raises(ValueError):
        propagate_train(WaveFunction.basis_state(o2_basis5, 1, 0), train, engine=other)


# ---------------------------------------------------------------- ensemble observables

@pytest.fixture(scope="module")
def ensemble29(o2_basis29):
    return thermal_states(o2_basis29, 8.0)


def test_fixed_polarization_gives_zero_epsilon(ensemble29, engine29):
    train = train_from_shaper(2.0, 2400.0, 0.0, 7.0)
    obs = ensemble_observables(ensemble29, train, 3, engine=engine29)
    assert obs.epsilon is not None
    assert abs(obs.epsilon) < 1e-10
    assert obs.s_total == pytest.approx(obs.q_left + obs.q_right, abs=1e-15)
    assert obs.s_total == pytest.approx(obs.pop_by_n[3], abs=1e-12)


def test_mirrored_train_flips_epsilon(ensemble29, engine29):
    train = train_from_shaper(2.0, 1700.0, 0.732 * pi, 7.0)
    obs_plus = ensemble_observables(ensemble29, train, 3, engine=engine29)
    obs_minus = ensemble_observables(ensemble29, train.mirrored(), 3, engine=engine29)
    assert abs(obs_plus.epsilon) > 0.3   # a strongly chiral cell
    assert obs_minus.epsilon == pytest.approx(-obs_plus.epsilon, abs=1e-10)
    assert obs_minus.s_total == pytest.approx(obs_plus.s_total, abs=1e-10)


def test_line_periodicity_delta_pi_vs_zero(ensemble29, engine29):
    # delta = pi is the same set of polarization lines as delta = 0
    obs_zero = ensemble_observables(ensemble29, train_from_shaper(2.0, 2400.0, 0.0, 7.0),
                                    3, engine=engine29)
    obs_pi = ensemble_observables(ensemble29, train_from_shaper(2.0, 2400.0, pi, 7.0),
                                  3, engine=engine29)
    assert obs_pi.s_total == pytest.approx(obs_zero.s_total, rel=1e-10)
    # and in particular within the 10% the coarse physics argument guarantees
    assert abs(obs_pi.s_total - obs_zero.s_total) / obs_zero.s_total < 0.10


def test_epsilon_undefined_below_signal_floor(o2_basis5):
    ens = thermal_states(o2_basis5, 0.01)   # all population in N = 1
    train = ChiralTrain([], delta=0.0, tau=100.0)
    obs = ensemble_observables(ens, train, 5)
    assert obs.s_total < 1e-6
    assert obs.epsilon is None


def test_target_must_be_in_basis(ensemble29):
    train = ChiralTrain([], delta=0.0, tau=100.0)
    with pytest.raises(ValueError):
        ensemble_observables(ensemble29, train, 2)
    with pytest.raises(ValueError):
        ensemble_observables(ensemble29, train, 31)
