"""Command-line front end.

Subcommands: synth, scan, thermal, selftest.  Common flags: --config PATH,
--out DIR, --workers N, --target-n N, --set key=value (repeatable).  Exit
codes: 0 success, 1 validation error, 2 computation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from math import pi
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import RunConfig, load_run_config
from .ensemble import thermal_fractions, thermal_states
from .errors import BasisTooSmallError, ChiralTrainError, ConfigError, ScanCellError
from .fileio import (
    config_hash,
    write_field_csv,
    write_json,
    write_scan_csvs,
    write_thermal_csv,
    write_train_csv,
)
from .rotor import build_basis
from .scan import ScanGrid, scan
from .selftest import format_report, run_selftest
from .train import (
    ShaperConfig,
    default_time_grid,
    quarter_wave,
    sideband_cutoff,
    synthesize_field,
    train_from_shaper,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_COMPUTE = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiraltrain",
        description="Chiral pulse trains driving unidirectional molecular rotation: "
                    "train synthesis, thermal delta-kick propagation, and "
                    "(tau, delta) resonance maps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("synth", "synthesize one train: sampled fields, kick list, summary"),
        ("scan", "run the (tau, delta) scan and write S / epsilon maps"),
        ("thermal", "tabulate thermal rotational populations"),
        ("selftest", "run the built-in oracle and symmetry checks"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="run configuration JSON file")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
        p.add_argument("--workers", type=int, metavar="N",
                       help="worker processes, 0 = auto (overrides config)")
        p.add_argument("--target-n", type=int, metavar="N", dest="target_n",
                       help="target rotational level (overrides config)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       dest="overrides", help="override one config key (dotted path)")
    return parser


def _load_config(args) -> RunConfig:
    overrides = list(args.overrides)
    # explicit flags take precedence over --set and the file
    if args.out is not None:
        overrides.append(f"output_dir={args.out}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    if args.target_n is not None:
        overrides.append(f"target_N={args.target_n}")
    return load_run_config(args.config, overrides)


def _outdir(cfg: RunConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_synth(cfg: RunConfig) -> int:
    if cfg.tau_fs is None or cfg.delta_rad is None:
        raise ConfigError(
            "synth needs a single tau and delta: set shaper.tau_fs and shaper.delta_pi",
            ["shaper.tau_fs", "shaper.delta_pi"],
        )
    outdir = _outdir(cfg)
    h = config_hash(cfg.hash_source())
    shaper = ShaperConfig.chiral(cfg.a, cfg.tau_fs, cfg.delta_rad,
                                 envelope_fwhm=cfg.envelope_fwhm_fs,
                                 carrier_wavelength_nm=cfg.carrier_wavelength_nm)
    n_cut = sideband_cutoff(cfg.a, cfg.coverage)
    grid = default_time_grid(shaper, n_cut=n_cut)
    field_pre = synthesize_field(shaper, grid, n_cut=n_cut)
    field_post = quarter_wave(field_pre, pi / 4)
    train = train_from_shaper(cfg.a, cfg.tau_fs, cfg.delta_rad, cfg.p_total, cfg.coverage)
    write_field_csv(outdir / "field_pre_qwp.csv", field_pre, h)
    write_field_csv(outdir / "field_post_qwp.csv", field_post, h)
    write_train_csv(outdir / "train.csv", train, h)
    summary = {
        "run_config": cfg.to_dict(),
        "shaper_config": {
            "A": shaper.A,
            "tau_fs": shaper.tau,
            "delta1_rad": shaper.delta1,
            "delta2_rad": shaper.delta2,
            "omega0_rad_per_fs": shaper.omega0,
            "envelope_fwhm_fs": shaper.envelope_fwhm,
            "input_polarization": list(shaper.input_polarization),
        },
        "pulse_count": len(train),
        "sideband_cutoff": n_cut,
        "total_kick": train.total_kick,
        "polarization_period_fs": (train.polarization_period if cfg.delta_rad else None),
        "delta_rad": cfg.delta_rad,
        "tau_fs": cfg.tau_fs,
    }
    write_json(outdir / "synth_summary.json", summary, h)
    if cfg.figures:
        from .plots import render_train

        render_train(field_pre, field_post, train, outdir)
    tp = summary["polarization_period_fs"]
    print(f"synth: {len(train)} pulses, total kick {train.total_kick:g}, "
          f"T_p = {tp:g} fs" if tp else
          f"synth: {len(train)} pulses, total kick {train.total_kick:g}, fixed polarization")
    print(f"wrote {outdir}/field_pre_qwp.csv, field_post_qwp.csv, train.csv, synth_summary.json")
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    outdir = _outdir(cfg)
    h = config_hash(cfg.hash_source())
    grid = ScanGrid(
        tau_values=tuple(cfg.tau_axis()),
        delta_values=tuple(cfg.delta_axis()),
        species=cfg.species,
        n_max=cfg.n_max,
        temperature_k=cfg.temperature_k,
        a=cfg.a,
        p_total=cfg.p_total,
        coverage=cfg.coverage,
        target_n=cfg.target_n,
        thermal_floor=cfg.thermal_floor,
        signal_floor=cfg.signal_floor,
    )
    n_tau, n_delta = grid.shape
    print(f"scan: {n_tau} tau x {n_delta} delta cells, species {cfg.species_name}, "
          f"n_max {cfg.n_max}, workers {cfg.workers or 'auto'}", flush=True)
    t0 = time.perf_counter()

    def progress(done, total):
        print(f"\r  {done}/{total} columns ({time.perf_counter() - t0:.1f} s)",
              end="" if done < total else "\n", file=sys.stderr, flush=True)

    result = scan(grid, workers=cfg.workers, progress=progress)
    paths = write_scan_csvs(outdir, result, h)
    metadata = {
        "run_config": cfg.to_dict(),
        "grid": {"tau_fs": list(grid.tau_values),
                 "delta_rad": list(grid.delta_values)},
        **result.metadata,
    }
    write_json(outdir / "scan_metadata.json", metadata, h)
    if cfg.figures:
        from .plots import render_scan_maps

        render_scan_maps(result, outdir)
    i, j = np.unravel_index(np.argmax(result.s_map), result.s_map.shape)
    print(f"peak S = {result.s_map[i, j]:.4f} at tau = {grid.tau_values[i]:g} fs, "
          f"delta = {grid.delta_values[j] / pi:.4f} pi")
    eps = np.abs(result.epsilon_map)
    if not np.isnan(eps).all():
        i, j = np.unravel_index(np.nanargmax(eps), eps.shape)
        print(f"peak |epsilon| = {eps[i, j]:.4f} at tau = {grid.tau_values[i]:g} fs, "
              f"delta = {grid.delta_values[j] / pi:.4f} pi")
    else:
        print("epsilon undefined everywhere (signal below floor)")
    print(f"wrote {paths['s_map']}, {paths['epsilon_map']}, {outdir}/scan_metadata.json "
          f"({result.metadata['timing_s']:.1f} s)")
    return EXIT_OK


def cmd_thermal(cfg: RunConfig) -> int:
    outdir = _outdir(cfg)
    h = config_hash(cfg.hash_source())
    basis = build_basis(cfg.species, cfg.n_max)
    ensemble = thermal_states(basis, cfg.temperature_k, cfg.thermal_floor)
    fractions = thermal_fractions(ensemble)
    write_thermal_csv(outdir / "thermal_populations.csv", fractions, h)
    write_json(outdir / "thermal_metadata.json", {
        "run_config": cfg.to_dict(),
        "temperature_K": cfg.temperature_k,
        "members": len(ensemble),
        "fractions": {str(n): f for n, f in sorted(fractions.items())},
    }, h)
    if cfg.figures:
        from .plots import render_thermal

        render_thermal(fractions, cfg.temperature_k, outdir)
    for n in sorted(fractions):
        print(f"  N={n:>2}: {fractions[n]:.6f}")
    print(f"wrote {outdir}/thermal_populations.csv")
    return EXIT_OK


def cmd_selftest(args) -> int:
    # Selftest reports failures instead of throwing: a broken configuration
    # (bad registry, bad values) becomes a failing table row.
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        from .selftest import CheckResult

        results = [CheckResult("config-schema", float("inf"), 1.0, False, str(exc))]
        print(format_report(results))
        return EXIT_COMPUTE
    results = run_selftest(cfg)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_COMPUTE


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "thermal":
            return cmd_thermal(cfg)
        raise RuntimeError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScanCellError, BasisTooSmallError, FloatingPointError, ChiralTrainError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
