from math import pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiraltrain import (
    ChiralTrain,
    Pulse,
    SampledField,
    ShaperConfig,
    bessel_weights,
    project_polarization,
    pulse_stokes,
    quarter_wave,
    sideband_cutoff,
    synthesize_field,
    train_from_shaper,
)
from chiraltrain.oracles import bessel_series
from chiraltrain.train import default_time_grid, polarization_angles


def quarter_step_shaper():
    # A = 2, tau = 1 ps, delta = pi/4: nine pulses, polarization period 8 ps
    return ShaperConfig.chiral(A=2.0, tau=1000.0, delta=pi / 4)


# ---------------------------------------------------------------- bessel weights

def test_bessel_weights_no_modulation():
    weights = dict(bessel_weights(0.0, 3))
    assert weights[0] == 1.0
    for n in (-3, -2, -1, 1, 2, 3):
        assert weights[n] == 0.0


def test_bessel_weights_match_power_series_oracle():
    for a in (0.5, 1.0, 2.0, 5.0):
        for n, j in bessel_weights(a, 8):
            ref = bessel_series(n, a)
            assert abs(j - ref) <= 1e-9 * max(abs(ref), 1e-12)


def test_bessel_weights_a2_values():
    # reference values from the power-series oracle
    expected = {0: 0.2238907791, 1: 0.5767248078, 2: 0.3528340286,
                3: 0.1289432495, 4: 0.0339957198}
    weights = dict(bessel_weights(2.0, 4))
    for n, ref in expected.items():
        assert weights[n] == pytest.approx(ref, abs=1e-10)
        assert weights[-n] == pytest.approx((-1) ** n * ref, abs=1e-10)
    total = sum(j * j for _, j in bessel_weights(2.0, 4))
    assert total == pytest.approx(
        sum(bessel_series(n, 2.0) ** 2 for n in range(-4, 5)), abs=1e-12
    )
    assert total == pytest.approx(0.999897933348, abs=1e-9)
    assert total <= 1.0


def test_bessel_energy_sum_grows_to_one():
    totals = [sum(j * j for _, j in bessel_weights(2.0, k)) for k in range(9)]
    assert all(b >= a for a, b in zip(totals, totals[1:]))
    assert totals[-1] == pytest.approx(1.0, abs=1e-9)


def test_bessel_weights_rejects_negative_cutoff():
    with pytest.raises(ValueError):
        bessel_weights(1.0, -1)


# ---------------------------------------------------------------- kick list

def test_sideband_cutoff_cumulative_landmarks():
    # cumulative energy sums from the oracle: 0.0501, 0.7153, 0.9643, 0.9976, 0.99990
    cums = []
    total = bessel_series(0, 2.0) ** 2
    cums.append(total)
    for n in range(1, 5):
        total += 2 * bessel_series(n, 2.0) ** 2
        cums.append(total)
    assert cums == pytest.approx([0.0501, 0.7153, 0.9643, 0.9976, 0.99990], abs=5e-4)
    assert sideband_cutoff(2.0, 0.50) == 1
    assert sideband_cutoff(2.0, 0.99) == 3     # 0.9976 already covers 0.99
    assert sideband_cutoff(2.0, 0.999) == 4    # the package default: 9 pulses
    assert sideband_cutoff(0.0, 0.999) == 0


def test_train_single_pulse_for_zero_modulation():
    train = train_from_shaper(0.0, 500.0, 0.7, 7.0)
    assert len(train) == 1
    assert train.pulses[0].kick_strength == 7.0
    assert train.pulses[0].pol_angle == 0.0


def test_train_quarter_step_configuration():
    train = train_from_shaper(2.0, 1000.0, pi / 4, 7.0)
    assert len(train) == 9
    assert train.polarization_period == 8000.0
    steps = np.diff([p.pol_angle for p in train.pulses])
    assert np.max(np.abs(steps - pi / 4)) < 1e-12
    times = np.array([p.time for p in train.pulses])
    assert np.array_equal(times, 1000.0 * np.arange(9))


def test_train_total_kick_bookkeeping():
    for a in (0.0, 1.0, 2.0, 3.5):
        train = train_from_shaper(a, 800.0, 0.3, 7.0)
        assert abs(train.total_kick - 7.0) < 1e-12


def test_train_kick_strengths_proportional_to_intensity():
    train = train_from_shaper(2.0, 1000.0, 0.0, 7.0, coverage=0.999)
    j2 = np.array([bessel_series(abs(k - 4), 2.0) ** 2 for k in range(9)])
    expected = 7.0 * j2 / j2.sum()
    got = np.array([p.kick_strength for p in train.pulses])
    assert np.max(np.abs(got - expected)) < 1e-12


def test_train_chirality_mirror():
    plus = train_from_shaper(2.0, 1000.0, 0.4, 7.0)
    minus = train_from_shaper(2.0, 1000.0, -0.4, 7.0)
    for p, m in zip(plus.pulses, minus.pulses):
        assert m.pol_angle == -p.pol_angle
        assert m.kick_strength == p.kick_strength
    mirrored = plus.mirrored()
    for p, m in zip(minus.pulses, mirrored.pulses):
        assert m.pol_angle == p.pol_angle


@given(coverage=st.floats(0.05, 1.0), a=st.floats(0.0, 4.0))
@settings(max_examples=40, deadline=None, derandomize=True)
def test_train_invariants_property(coverage, a):
    train = train_from_shaper(a, 700.0, 0.25, 5.0, coverage=coverage)
    assert abs(train.total_kick - 5.0) < 1e-12
    assert len(train) % 2 == 1
    strengths = [p.kick_strength for p in train.pulses]
    assert strengths == strengths[::-1]  # palindromic in time


def test_train_validation_errors():
    with pytest.raises(ValueError):
        train_from_shaper(2.0, 1000.0, 0.1, 7.0, coverage=0.0)
    with pytest.raises(ValueError):
        train_from_shaper(2.0, 1000.0, 0.1, 7.0, coverage=1.2)
    with pytest.raises(ValueError):
        ChiralTrain([Pulse(0.0, 1.0, 0.0), Pulse(0.0, 1.0, 0.1)], delta=0.1, tau=100.0)
    with pytest.raises(ValueError):
        Pulse(0.0, -1.0, 0.0)


# ---------------------------------------------------------------- sampled field

def test_field_no_modulation_is_single_pulse_along_input():
    cfg = ShaperConfig(A=0.0, tau=1000.0, delta1=0.0, delta2=0.0,
                       omega0=2.35, envelope_fwhm=120.0, input_polarization=(1.0, 0.0))
    field = synthesize_field(cfg, np.linspace(-600.0, 600.0, 4001))
    assert np.max(np.abs(field.ey)) == 0.0
    intensity = field.intensity()
    assert field.t[int(np.argmax(intensity))] == pytest.approx(0.0, abs=1.0)
    # intensity FWHM matches the configured envelope width
    half = intensity > 0.5 * intensity.max()
    fwhm = field.t[half][-1] - field.t[half][0]
    assert fwhm == pytest.approx(120.0, abs=2.0)


def test_field_scalar_train_peak_ratios():
    cfg = ShaperConfig(A=2.0, tau=1000.0, delta1=0.0, delta2=0.0,
                       omega0=2.35, envelope_fwhm=120.0, input_polarization=(1.0, 0.0))
    field = synthesize_field(cfg, default_time_grid(cfg, n_cut=4), n_cut=4)
    intensity = field.intensity()
    for n in range(-4, 5):
        sel = np.abs(field.t - (-n * cfg.tau)) < cfg.tau / 2
        peak = intensity[sel].max()
        expected = bessel_series(n, 2.0) ** 2
        assert peak == pytest.approx(expected, rel=1e-4)


def test_field_chiral_phase_steps():
    cfg = quarter_step_shaper()
    field = synthesize_field(cfg, default_time_grid(cfg, n_cut=4), n_cut=4)
    # per-pulse phase difference between components is 2 n delta
    for n in range(-2, 3):
        i = int(np.argmin(np.abs(field.t - (-n * cfg.tau))))
        phase = np.angle(field.ex[i] * np.conj(field.ey[i]))
        expected = np.angle(np.exp(1j * 2 * n * (pi / 4)))
        assert phase == pytest.approx(expected, abs=1e-9)


def test_field_grid_too_coarse_rejected():
    cfg = quarter_step_shaper()
    with pytest.raises(ValueError, match="too coarse"):
        synthesize_field(cfg, np.linspace(-5000.0, 5000.0, 100))


# ---------------------------------------------------------------- quarter-wave plate

def test_qwp_preserves_linear_along_fast_axis():
    t = np.linspace(-10.0, 10.0, 101)
    carrier = np.exp(1j * 2.35 * t)
    field = SampledField(t, carrier, np.zeros_like(carrier))
    out = quarter_wave(field, 0.0)
    assert np.max(np.abs(out.ex - field.ex)) < 1e-14
    assert np.max(np.abs(out.ey)) < 1e-14


def test_qwp_turns_circular_into_linear_at_45deg():
    t = np.linspace(-10.0, 10.0, 101)
    carrier = np.exp(1j * 2.35 * t)
    field = SampledField(t, carrier / np.sqrt(2), 1j * carrier / np.sqrt(2))
    out = quarter_wave(field, 0.0)
    stokes = pulse_stokes(out, [0.0], 10.0)
    angle = polarization_angles(stokes)[0]
    assert abs(stokes[0, 3]) / stokes[0, 0] < 1e-12          # linear
    assert abs(abs(angle) - pi / 4) < 1e-12                  # at 45 deg to fast axis


def test_qwp_polarization_steps_and_period():
    cfg = quarter_step_shaper()
    field = quarter_wave(synthesize_field(cfg, default_time_grid(cfg, n_cut=4), n_cut=4), pi / 4)
    centers = [-n * cfg.tau for n in range(-4, 5)]
    stokes = pulse_stokes(field, centers, cfg.tau / 2)
    assert np.max(np.abs(stokes[:, 3]) / stokes[:, 0]) < 1e-6   # all linear
    angles = polarization_angles(stokes)
    steps = np.diff(angles)
    steps = (steps + pi / 2) % pi - pi / 2                      # line angles live mod pi
    assert np.max(np.abs(steps - pi / 4)) < 1e-6
    # polarization returns to itself (mod pi) after T_p / 2 = 4 pulses
    assert abs(((angles[8] - angles[0]) + pi / 2) % pi - pi / 2) < 1e-6


# ---------------------------------------------------------------- analyzer projection

def test_project_polarization_parallel_and_crossed():
    t = np.linspace(-10.0, 10.0, 101)
    carrier = np.exp(1j * 2.35 * t)
    field = SampledField(t, carrier, np.zeros_like(carrier))
    assert np.max(project_polarization(field, pi / 2)) < 1e-28
    assert np.max(project_polarization(field, 0.0)) == pytest.approx(1.0, abs=1e-12)


def test_project_polarization_train_contrast():
    cfg = quarter_step_shaper()
    field = quarter_wave(synthesize_field(cfg, default_time_grid(cfg, n_cut=4), n_cut=4), pi / 4)
    # analyzer along the n = 0 output polarization (the input direction)
    trace = project_polarization(field, pi / 4)
    total = field.intensity()

    def contrast(n):
        sel = np.abs(field.t - (-n * cfg.tau)) < cfg.tau / 2
        return trace[sel].max() / total[sel].max()

    assert contrast(0) == pytest.approx(1.0, abs=1e-6)
    assert contrast(4) == pytest.approx(1.0, abs=1e-4)   # rotated by pi: same line
    assert contrast(-4) == pytest.approx(1.0, abs=1e-4)
    assert contrast(2) < 1e-4                            # rotated by pi/2: crossed
    assert contrast(-2) < 1e-4


# ---------------------------------------------------------------- field / kick consistency

def test_per_pulse_field_energy_matches_kick_strengths():
    cfg = quarter_step_shaper()   # tau = 1000 fs >= 5 x 120 fs envelope
    field = quarter_wave(synthesize_field(cfg, default_time_grid(cfg, n_cut=4), n_cut=4), pi / 4)
    train = train_from_shaper(2.0, cfg.tau, pi / 4, 7.0, coverage=0.999)
    centers = [-n * cfg.tau for n in range(4, -5, -1)]   # time order
    stokes = pulse_stokes(field, centers, cfg.tau / 2)
    energies = stokes[:, 0] / stokes[:, 0].sum()
    kicks = np.array([p.kick_strength for p in train.pulses])
    kicks = kicks / kicks.sum()
    assert np.max(np.abs(energies - kicks) / kicks) < 0.01


def test_polarization_line_periodicity_delta_plus_pi():
    base = train_from_shaper(2.0, 900.0, 0.3, 7.0)
    shifted = train_from_shaper(2.0, 900.0, 0.3 + pi, 7.0)
    for p, q in zip(base.pulses, shifted.pulses):
        # same polarization line
        diff = (q.pol_angle - p.pol_angle) / pi
        assert abs(diff - round(diff)) < 1e-12
