"""Figure rendering for the CLI report paths (PNG files next to the CSVs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_scan_maps(result, outdir: Path) -> list[Path]:
    """Heatmaps of S and epsilon over the (tau, delta) plane."""
    outdir = Path(outdir)
    grid = result.grid
    taus = np.asarray(grid.tau_values)
    deltas = np.asarray(grid.delta_values) / np.pi

    def _span(values, pad):
        lo, hi = values[0], values[-1]
        return (lo - pad, hi + pad) if lo == hi else (lo, hi)

    extent = [*_span(deltas, 0.01), *_span(taus, 10.0)]
    paths = []

    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(result.s_map, origin="lower", aspect="auto", extent=extent,
                   cmap="gray")
    ax.set_xlabel(r"$\delta/\pi$")
    ax.set_ylabel(r"$\tau$ (fs)")
    ax.set_title(f"Excitation efficiency S (N={grid.target_n})")
    fig.colorbar(im, ax=ax, label="S")
    paths.append(_save(fig, outdir / "s_map.png"))

    eps = result.epsilon_map
    vmax = np.nanmax(np.abs(eps)) if not np.isnan(eps).all() else 1.0
    vmax = max(vmax, 1e-12)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(eps, origin="lower", aspect="auto", extent=extent,
                   cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    ax.set_xlabel(r"$\delta/\pi$")
    ax.set_ylabel(r"$\tau$ (fs)")
    ax.set_title(f"Directionality $\\epsilon$ (N={grid.target_n})")
    fig.colorbar(im, ax=ax, label=r"$\epsilon$")
    paths.append(_save(fig, outdir / "epsilon_map.png"))
    return paths


def render_train(field_pre, field_post, train, outdir: Path) -> list[Path]:
    """Intensity envelope of the shaped field plus the per-pulse polarization."""
    outdir = Path(outdir)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.0), sharex=True,
                                   height_ratios=[2, 1])
    t_ps = field_post.t / 1000.0
    ax1.plot(t_ps, field_pre.intensity(), color="0.6", lw=0.8, label="before plate")
    ax1.plot(t_ps, field_post.intensity(), color="C0", lw=0.9, label="after plate")
    ax1.set_ylabel("intensity (arb.)")
    ax1.legend(loc="upper right", fontsize="small")

    t0 = train.pulses[0].time if len(train) else 0.0
    offset = field_post.t[int(np.argmax(field_post.intensity()))]
    # kick list times are re-based to the first pulse; align for display
    shift = offset - (np.argmax([p.kick_strength for p in train.pulses]) * train.tau + t0) if len(train) else 0.0
    for p in train.pulses:
        tc = (p.time + shift) / 1000.0
        ax2.plot([tc, tc], [0, p.kick_strength], color="C1", lw=2)
        ax2.annotate(f"{p.pol_angle / np.pi:+.2f}$\\pi$", (tc, p.kick_strength),
                     ha="center", va="bottom", fontsize=7, rotation=90)
    ax2.set_xlabel("t (ps)")
    ax2.set_ylabel("kick $P_n$")
    ax2.set_ylim(bottom=0)
    fig.suptitle("Chiral pulse train (labels: polarization angle)")
    return [_save(fig, outdir / "train_overview.png")]


def render_thermal(fractions: dict[int, float], temperature_k: float,
                   outdir: Path) -> list[Path]:
    outdir = Path(outdir)
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ns = sorted(fractions)
    ax.bar([str(n) for n in ns], [fractions[n] for n in ns], color="C0")
    ax.set_xlabel("N")
    ax.set_ylabel("population fraction")
    ax.set_title(f"Thermal rotational populations at {temperature_k:g} K")
    return [_save(fig, outdir / "thermal_populations.png")]
