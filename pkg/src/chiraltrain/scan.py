"""Parameter-plane scan engine: excitation efficiency S and directionality
epsilon over a (tau, delta) grid.

The scan is organized in delta columns.  Within one column every ensemble
member and every tau value is propagated simultaneously as one amplitude
matrix: per pulse, one diagonal phase multiply (free evolution over tau plus
the frame step by delta) followed by one matrix product with the cached kick
unitary.  Columns are independent work units; with a process pool each worker
builds the same read-only context (basis, eigendecomposition, unitaries) once
and computes whole columns.

BLAS threading is pinned to one thread inside the column computation in both
the serial and the pooled path, so results are bit-identical for any worker
count; the reducer writes each column exactly once.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import FIRST_EXCEPTION, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    from contextlib import nullcontext

    def threadpool_limits(limits=None):
        return nullcontext()

from ._version import __version__
from .constants import C_CM_FS
from .ensemble import (
    DEFAULT_SIGNAL_FLOOR,
    DEFAULT_THERMAL_FLOOR,
    TRUNCATION_LIMIT,
    thermal_states,
)
from .errors import BasisTooSmallError, ScanCellError
from .rotor import KickEngine, build_basis
from .species import Species
from .train import DEFAULT_COVERAGE, kick_sequence

NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ScanGrid:
    """Axes of the scan plus everything held fixed across the plane."""

    tau_values: tuple[float, ...]
    delta_values: tuple[float, ...]
    species: Species
    n_max: int = 29
    temperature_k: float = 8.0
    a: float = 2.0
    p_total: float = 7.0
    coverage: float = DEFAULT_COVERAGE
    target_n: int = 3
    thermal_floor: float = DEFAULT_THERMAL_FLOOR
    signal_floor: float = DEFAULT_SIGNAL_FLOOR

    def __post_init__(self):
        taus = np.asarray(self.tau_values, dtype=float)
        if len(taus) == 0 or np.any(taus <= 0):
            raise ValueError("tau_values must be non-empty and > 0")
        if np.any(np.diff(taus) <= 0):
            raise ValueError("tau_values must be strictly increasing")
        if len(self.delta_values) == 0:
            raise ValueError("delta_values must be non-empty")
        if np.any(np.diff(np.asarray(self.delta_values)) <= 0):
            raise ValueError("delta_values must be strictly increasing")
        object.__setattr__(self, "tau_values", tuple(float(t) for t in taus))
        object.__setattr__(self, "delta_values", tuple(float(d) for d in self.delta_values))

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.tau_values), len(self.delta_values))


@dataclass
class ScanResult:
    """S and epsilon maps of shape [len(tau) x len(delta)].

    Cells whose target-shell population falls below the signal floor have
    epsilon undefined; they are NaN in `epsilon_map` and True in
    `epsilon_undefined`.
    """

    grid: ScanGrid
    s_map: np.ndarray
    epsilon_map: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def epsilon_undefined(self) -> np.ndarray:
        return np.isnan(self.epsilon_map)


class _ScanContext:
    """Per-process read-only state shared by all columns of one scan."""

    def __init__(self, grid: ScanGrid):
        self.grid = grid
        self.basis = build_basis(grid.species, grid.n_max)
        self.kicks = kick_sequence(grid.a, grid.p_total, grid.coverage)
        self.engine = KickEngine(self.basis)
        self.engine.prepare(sorted(set(float(p) for p in self.kicks)))
        ensemble = thermal_states(self.basis, grid.temperature_k, grid.thermal_floor)
        self.n_members = len(ensemble)
        self.weights = np.asarray(ensemble.weights)
        nb = self.basis.size
        self.psi0 = np.zeros((nb, self.n_members), dtype=np.complex128)
        for col, (n0, m0) in enumerate(ensemble.members):
            self.psi0[self.basis.index[(n0, m0)], col] = 1.0
        taus = np.asarray(grid.tau_values)
        # Free-evolution phases over one train period, one column per tau;
        # expanded so matrix columns run tau-major (tau slow, member fast).
        pfree = np.exp(-2j * np.pi * C_CM_FS * np.outer(self.basis.energies, taus))
        self.pfree_big = np.repeat(pfree, self.n_members, axis=1)
        if not grid.species.allows(grid.target_n) or grid.target_n > self.basis.n_max:
            raise ValueError(f"target N={grid.target_n} is not in the basis")
        sel = self.basis.n_values == grid.target_n
        self.target_rows = np.flatnonzero(sel)
        tm = self.basis.m_values[sel]
        self.t_pos = tm > 0
        self.t_neg = tm < 0
        self.t_zero = tm == 0
        top2 = self.basis.shells[-2:]
        self.top_rows = np.flatnonzero(np.isin(self.basis.n_values, top2))

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """S and epsilon for every tau at delta_values[j]."""
        grid = self.grid
        delta = grid.delta_values[j]
        n_tau = len(grid.tau_values)
        try:
            phases = self.pfree_big * np.exp(1j * self.basis.m_values * delta)[:, None]
            psi = np.tile(self.psi0, (1, n_tau))
            for k, p in enumerate(self.kicks):
                if k:
                    psi *= phases
                psi = self.engine.unitary(float(p)) @ psi
            self._check_columns(psi, j)
            pop_t = np.abs(psi[self.target_rows, :]) ** 2
            half_m0 = 0.5 * pop_t[self.t_zero].sum(axis=0)
            ql = pop_t[self.t_pos].sum(axis=0) + half_m0
            qr = pop_t[self.t_neg].sum(axis=0) + half_m0
            ql = (ql.reshape(n_tau, self.n_members) * self.weights).sum(axis=1)
            qr = (qr.reshape(n_tau, self.n_members) * self.weights).sum(axis=1)
        except ScanCellError:
            raise
        except Exception as exc:
            raise ScanCellError(grid.tau_values[0], delta, 0, j, exc) from exc
        s = ql + qr
        eps = np.full(n_tau, np.nan)
        defined = s >= grid.signal_floor
        eps[defined] = (ql[defined] - qr[defined]) / s[defined]
        return s, eps

    def _check_columns(self, psi: np.ndarray, j: int) -> None:
        """Norm conservation and the truncation rule, per member per tau."""
        norms = np.linalg.norm(psi, axis=0)
        leak = (np.abs(psi[self.top_rows, :]) ** 2).sum(axis=0)
        bad_norm = np.abs(norms - 1.0) > NORM_TOLERANCE
        bad_leak = leak >= TRUNCATION_LIMIT
        bad = bad_norm | bad_leak
        if bad.any():
            flat = int(np.argmax(bad))
            i_tau = flat // self.n_members
            tau = self.grid.tau_values[i_tau]
            delta = self.grid.delta_values[j]
            if bad_leak[flat]:
                cause = BasisTooSmallError(float(leak[flat]), self.basis.n_max)
            else:
                cause = RuntimeError(f"norm drifted to {norms[flat]!r}")
            raise ScanCellError(tau, delta, i_tau, j, cause)


# Worker-side context, built once per process by the pool initializer.
_WORKER_CONTEXT: _ScanContext | None = None


def _worker_init(grid: ScanGrid) -> None:
    global _WORKER_CONTEXT
    with threadpool_limits(limits=1):
        _WORKER_CONTEXT = _ScanContext(grid)


def _worker_column(j: int):
    with threadpool_limits(limits=1):
        s, eps = _WORKER_CONTEXT.column(j)
    return j, s, eps


def scan(grid: ScanGrid, workers: int = 1,
         progress: Callable[[int, int], None] | None = None) -> ScanResult:
    """Run the full (tau, delta) scan.

    `workers` <= 1 computes in-process; larger values use a process pool with
    one delta column per task.  Output is identical for any worker count.
    Any failing cell aborts the scan with its coordinates.
    """
    n_tau, n_delta = grid.shape
    if workers < 0:
        raise ValueError(f"workers must be >= 0, got {workers}")
    if workers == 0:
        workers = os.cpu_count() or 1
    workers = min(workers, n_delta)
    s_map = np.empty((n_tau, n_delta))
    eps_map = np.empty((n_tau, n_delta))
    t_start = time.perf_counter()
    done = 0
    if workers <= 1:
        with threadpool_limits(limits=1):
            ctx = _ScanContext(grid)
            for j in range(n_delta):
                s, eps = ctx.column(j)
                s_map[:, j] = s
                eps_map[:, j] = eps
                done += 1
                if progress:
                    progress(done, n_delta)
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                                 initargs=(grid,)) as pool:
            futures = {pool.submit(_worker_column, j): j for j in range(n_delta)}
            pending = set(futures)
            while pending:
                finished, pending = wait(pending, return_when=FIRST_EXCEPTION)
                for fut in finished:
                    exc = fut.exception()
                    if exc is not None:
                        for other in pending:
                            other.cancel()
                        raise exc
                    j, s, eps = fut.result()
                    s_map[:, j] = s
                    eps_map[:, j] = eps
                    done += 1
                    if progress:
                        progress(done, n_delta)
    elapsed = time.perf_counter() - t_start
    metadata = {
        "version": __version__,
        "species": grid.species.name,
        "constants": {"B_cm1": grid.species.B, "D_cm1": grid.species.D,
                      "parity": grid.species.parity},
        "n_max": grid.n_max,
        "temperature_K": grid.temperature_k,
        "A": grid.a,
        "P_total": grid.p_total,
        "coverage": grid.coverage,
        "target_N": grid.target_n,
        "thermal_floor": grid.thermal_floor,
        "signal_floor": grid.signal_floor,
        "pulse_count": len(kick_sequence(grid.a, grid.p_total, grid.coverage)),
        "workers": workers,
        "timing_s": elapsed,
    }
    return ScanResult(grid, s_map, eps_map, metadata)


def epsilon_symmetry_report(result: ScanResult) -> dict[str, float]:
    """Residuals of the delta-mirror symmetries of a scan.

    Requires a delta axis symmetric about pi/2.  Reports the worst
    antisymmetry residual |eps(tau, delta) + eps(tau, pi - delta)|, the worst
    |eps| on the symmetry lines delta in {0, pi/2, pi} (those present), and the
    worst S mirror residual |S(tau, delta) - S(tau, pi - delta)|.
    """
    deltas = np.asarray(result.grid.delta_values)
    if np.max(np.abs((deltas + deltas[::-1]) - np.pi)) > 1e-9:
        raise ValueError("delta grid is not symmetric about pi/2")
    eps = result.epsilon_map
    s = result.s_map
    anti = np.abs(eps + eps[:, ::-1])
    mirror_s = np.abs(s - s[:, ::-1])
    sym_cols = [j for j, d in enumerate(deltas)
                if min(abs(d), abs(d - np.pi / 2), abs(d - np.pi)) <= 1e-12]
    on_lines = np.abs(eps[:, sym_cols]) if sym_cols else np.empty((0, 0))
    return {
        "max_antisymmetry_residual": float(np.nanmax(anti)) if anti.size and not np.isnan(anti).all() else 0.0,
        "max_epsilon_on_symmetry_lines": float(np.nanmax(on_lines)) if on_lines.size and not np.isnan(on_lines).all() else 0.0,
        "max_s_mirror_residual": float(mirror_s.max()) if mirror_s.size else 0.0,
    }
