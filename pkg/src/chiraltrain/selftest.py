"""Built-in verification: oracle suites and symmetry residuals with tolerances.

Each check produces a residual compared against a fixed tolerance; the CLI
prints the table and reflects overall pass/fail in its exit status.  Failures
are reported, not raised, so a broken configuration (bad registry, too small a
basis) shows up as a named failing row.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from . import oracles
from .config import RunConfig
from .constants import C_CM_FS
from .ensemble import propagate_train, thermal_states
from .errors import BasisTooSmallError
from .rotor import (
    KickEngine,
    WaveFunction,
    build_basis,
    cos2_matrix_x,
    cos2_matrix_y,
    cos2_matrix_z,
    free_propagate,
    rotational_energy,
)
from .scan import ScanGrid, epsilon_symmetry_report, scan
from .species import Species, load_registry
from .train import ShaperConfig, default_time_grid, kick_sequence, pulse_stokes, \
    quarter_wave, synthesize_field, train_from_shaper


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""


def _check(name, residual, tolerance, note=""):
    return CheckResult(name, float(residual), tolerance, bool(residual < tolerance), note)


def run_selftest(cfg: RunConfig) -> list[CheckResult]:
    """Run every check; never raises for a failing check."""
    results: list[CheckResult] = []
    species = cfg.species

    # Species registry schema
    try:
        load_registry(cfg.species_file)
        results.append(_check("species-registry-schema", 0.0, 1.0, "registry validates"))
    except (ValueError, OSError) as exc:
        results.append(CheckResult("species-registry-schema", float("inf"), 1.0, False, str(exc)))

    # Bessel weights against the power series
    from scipy.special import jv

    worst = 0.0
    for a in (0.5, 1.0, 2.0, 5.0):
        for n in range(-10, 11):
            ref = oracles.bessel_series(n, a)
            err = abs(float(jv(n, a)) - ref) / max(abs(ref), 1e-12)
            worst = max(worst, err)
    results.append(_check("bessel-power-series", worst, 1e-9, "relative, |n|<=10"))

    # cos^2 matrix elements against spherical quadrature (all pairs, N <= 7)
    test_species = Species("selftest-all-N", species.B, species.D, "all")
    basis7 = build_basis(test_species, 7)
    analytic = cos2_matrix_x(basis7).matrix.real
    quad = oracles.cos2_quadrature_matrix(basis7.states, axis="x")
    results.append(_check("cos2-quadrature", np.max(np.abs(analytic - quad)), 1e-8,
                          f"all pairs, {basis7.size} states"))

    # Completeness of the three polarization directions
    ident = (cos2_matrix_x(basis7).matrix + cos2_matrix_y(basis7).matrix
             + cos2_matrix_z(basis7).matrix)
    results.append(_check("cos2-completeness", np.max(np.abs(ident - np.eye(basis7.size))),
                          1e-12, "O_x + O_y + O_z = 1"))

    # Kick unitarity at the configured strength and basis
    try:
        basis = build_basis(species, cfg.n_max)
        engine = KickEngine(basis)
        u = engine.unitary(cfg.p_total)
        results.append(_check("kick-unitarity", np.max(np.abs(u.conj().T @ u - np.eye(basis.size))),
                              1e-10, f"P={cfg.p_total:g}, n_max={basis.n_max}"))
    except ValueError as exc:
        results.append(CheckResult("kick-unitarity", float("inf"), 1e-10, False, str(exc)))
        return results

    # Perturbative limit of a weak kick
    p_weak = 1e-3
    psi0 = WaveFunction.basis_state(basis, species.min_n, 0)
    psi1 = WaveFunction(basis, engine.unitary(p_weak) @ psi0.amplitudes)
    ox = engine.operator.matrix.real
    i0 = basis.index[(species.min_n, 0)]
    worst = 0.0
    for mp in (-2, 0, 2):
        tgt = (species.min_n + 2, mp)
        j = basis.index[tgt]
        expected = (p_weak * ox[j, i0]) ** 2
        got = abs(psi1.amplitudes[j]) ** 2
        worst = max(worst, abs(got - expected) / expected)
    results.append(_check("perturbative-limit", worst, 1e-3, "relative, P=1e-3"))

    # Free-propagation beat revival
    n_lo = species.min_n
    e_lo = rotational_energy(species, n_lo)
    e_hi = rotational_energy(species, n_lo + 2)
    period = 1.0 / (C_CM_FS * (e_hi - e_lo))
    amps = np.zeros(basis.size, dtype=np.complex128)
    amps[basis.index[(n_lo, 0)]] = 1 / np.sqrt(2)
    amps[basis.index[(n_lo + 2, 0)]] = 1 / np.sqrt(2)
    psi = WaveFunction(basis, amps)
    overlap = abs(np.vdot(psi.amplitudes, free_propagate(psi, period).amplitudes))
    results.append(_check("beat-revival", abs(overlap - 1.0), 1e-10,
                          f"period {period:.1f} fs"))

    # Truncation rule and norm conservation on the configured train
    tau_ref = cfg.tau_fs if cfg.tau_fs is not None else 0.5 * (cfg.tau_range[0] + cfg.tau_range[1])
    delta_ref = cfg.delta_rad if cfg.delta_rad is not None else pi / 3
    train = train_from_shaper(cfg.a, tau_ref, delta_ref, cfg.p_total, cfg.coverage)
    try:
        ens = thermal_states(basis, cfg.temperature_k, cfg.thermal_floor)
        worst_leak = 0.0
        worst_norm = 0.0
        for (n0, m0) in ens.members:
            psi = propagate_train(WaveFunction.basis_state(basis, n0, m0), train, engine=engine)
            pops = psi.populations()
            top2 = np.isin(basis.n_values, basis.shells[-2:])
            worst_leak = max(worst_leak, float(pops[top2].sum()))
            worst_norm = max(worst_norm, abs(psi.norm() - 1.0))
        results.append(_check("truncation-rule", worst_leak, 1e-6,
                              f"{len(train)} pulses, n_max={basis.n_max}"))
        results.append(_check("norm-conservation", worst_norm, 1e-9,
                              f"{len(train)} pulses"))
    except BasisTooSmallError as exc:
        results.append(CheckResult("truncation-rule", exc.population, 1e-6, False, str(exc)))
        results.append(CheckResult("norm-conservation", float("nan"), 1e-9, False,
                                   "skipped: truncation rule failed"))

    # Scan symmetry residuals on a small grid
    try:
        small = ScanGrid(
            tau_values=tuple(np.linspace(max(200.0, tau_ref * 0.5), tau_ref * 1.5, 3)),
            delta_values=tuple(np.linspace(0.0, pi, 5)),
            species=species, n_max=cfg.n_max, temperature_k=cfg.temperature_k,
            a=cfg.a, p_total=cfg.p_total, coverage=cfg.coverage,
            target_n=cfg.target_n, thermal_floor=cfg.thermal_floor,
            signal_floor=cfg.signal_floor,
        )
        report = epsilon_symmetry_report(scan(small, workers=1))
        results.append(_check("epsilon-antisymmetry", report["max_antisymmetry_residual"],
                              1e-8, "3x5 grid"))
        results.append(_check("epsilon-on-symmetry-lines",
                              report["max_epsilon_on_symmetry_lines"], 1e-8,
                              "delta in {0, pi/2, pi}"))
        results.append(_check("s-mirror-symmetry", report["max_s_mirror_residual"],
                              1e-8, "S(delta) vs S(pi - delta)"))
    except Exception as exc:  # report, never raise
        for nm in ("epsilon-antisymmetry", "epsilon-on-symmetry-lines", "s-mirror-symmetry"):
            results.append(CheckResult(nm, float("nan"), 1e-8, False, f"scan failed: {exc}"))

    # Train energy bookkeeping
    results.append(_check("train-energy", abs(train.total_kick - cfg.p_total), 1e-12,
                          f"sum P_n vs P_total={cfg.p_total:g}"))
    seq = kick_sequence(cfg.a, cfg.p_total, cfg.coverage)
    results.append(_check("train-palindrome", np.max(np.abs(seq - seq[::-1])), 1e-15,
                          "kick sequence symmetry"))

    # Quarter-wave plate linearity on the chiral configuration
    shaper = ShaperConfig.chiral(cfg.a, max(cfg.envelope_fwhm_fs * 8.0, 900.0),
                                 pi / 4, envelope_fwhm=cfg.envelope_fwhm_fs,
                                 carrier_wavelength_nm=cfg.carrier_wavelength_nm)
    field = quarter_wave(synthesize_field(shaper, default_time_grid(shaper)), pi / 4)
    n_cut = 4
    centers = np.arange(-n_cut, n_cut + 1) * -shaper.tau
    stokes = pulse_stokes(field, centers, 0.5 * shaper.tau)
    lit = stokes[:, 0] > 1e-9 * stokes[:, 0].max()
    ellip = np.max(np.abs(stokes[lit, 3]) / stokes[lit, 0])
    results.append(_check("qwp-residual-ellipticity", ellip, 1e-6,
                          f"chiral config, {int(lit.sum())} pulses"))

    return results


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check'.ljust(width)}  {'residual':>12}  {'tolerance':>10}  status  note"]
    for r in results:
        lines.append(
            f"{r.name.ljust(width)}  {r.residual:>12.3e}  {r.tolerance:>10.0e}  "
            f"{'PASS' if r.passed else 'FAIL':<6}  {r.note}"
        )
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
