"""Chiral pulse train synthesis.

A sinusoidal spectral phase A sin[(w - w0) tau + d] applied by a two-mask
polarization shaper splits an input pulse into replicas at multiples of tau
with field amplitudes J_n(A).  With opposite mask offsets d1 = -d2 = delta the
replicas are elliptical with a pulse-to-pulse phase step; an ideal
quarter-wave plate aligned with the input polarization turns them into linear
polarizations stepping by delta per pulse.  The polarization direction then
completes a turn in T_p = 2 pi tau / delta.

Two views of the same train are produced here:

* :func:`synthesize_field` / :func:`quarter_wave` build the sampled optical
  field (complex analytic signal) for field-level outputs, and
* :func:`train_from_shaper` reduces the train to the list of delta-kicks
  consumed by the propagator: arrival time, kick strength P_n proportional to
  the pulse intensity J_n(A)^2, and linear polarization angle n delta.

Kick times are re-based so the first pulse sits at t = 0 and the polarization
angle steps by +delta in time order; only relative angles and spacings affect
the rotor dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np
from scipy.special import jv

from .constants import C_NM_FS

#: Fraction of the total sideband energy retained by default when reducing a
#: shaped field to a kick list.
DEFAULT_COVERAGE = 0.999


@dataclass(frozen=True)
class ShaperConfig:
    """Pulse-shaper settings producing one train.

    Angles in radians, times in fs, omega0 in rad/fs.  `input_polarization`
    is the (real) unit vector of the input field in the shaper frame; the
    shaper masks act along x and y of that frame.
    """

    A: float
    tau: float
    delta1: float
    delta2: float
    omega0: float
    envelope_fwhm: float
    input_polarization: tuple[float, float] = (1.0 / sqrt(2.0), 1.0 / sqrt(2.0))

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.A < 0:
            raise ValueError(f"A must be >= 0, got {self.A}")
        if self.envelope_fwhm <= 0:
            raise ValueError(f"envelope_fwhm must be > 0, got {self.envelope_fwhm}")
        ex, ey = self.input_polarization
        if abs(ex * ex + ey * ey - 1.0) > 1e-9:
            raise ValueError("input_polarization must be a unit vector")

    @classmethod
    def chiral(cls, A, tau, delta, omega0=None, envelope_fwhm=120.0,
               carrier_wavelength_nm=800.0):
        """Chiral configuration: opposite mask offsets d1 = -d2 = delta."""
        if omega0 is None:
            omega0 = 2.0 * pi * C_NM_FS / carrier_wavelength_nm
        return cls(A=A, tau=tau, delta1=delta, delta2=-delta, omega0=omega0,
                   envelope_fwhm=envelope_fwhm)

    @property
    def delta(self) -> float:
        """Per-pulse polarization step for the chiral configuration."""
        return 0.5 * (self.delta1 - self.delta2)


@dataclass(frozen=True)
class Pulse:
    """One delta-kick: arrival time (fs), dimensionless strength, polarization angle (rad)."""

    time: float
    kick_strength: float
    pol_angle: float

    def __post_init__(self):
        if self.kick_strength < 0:
            raise ValueError(f"kick_strength must be >= 0, got {self.kick_strength}")


class ChiralTrain:
    """Time-ordered list of kicks with a fixed polarization step per pulse."""

    def __init__(self, pulses, delta: float, tau: float):
        pulses = tuple(pulses)
        for a, b in zip(pulses, pulses[1:]):
            if not b.time > a.time:
                raise ValueError("pulse times must be strictly increasing")
            if abs((b.time - a.time) - tau) > 1e-9 * max(1.0, abs(tau)):
                raise ValueError("pulses must be spaced by tau")
            if abs((b.pol_angle - a.pol_angle) - delta) > 1e-12 * max(1.0, abs(delta)):
                raise ValueError("polarization must step by delta between consecutive pulses")
        self.pulses = pulses
        self.delta = float(delta)
        self.tau = float(tau)
        self.total_kick = float(sum(p.kick_strength for p in pulses))

    def __len__(self):
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    @property
    def polarization_period(self) -> float:
        """Rotation period of the train polarization, T_p = 2 pi tau / delta."""
        if self.delta == 0:
            raise ValueError("polarization does not rotate for delta = 0")
        # ordered so that delta = pi / 2^k divides exactly
        return 2.0 * (pi / self.delta) * self.tau

    def mirrored(self) -> "ChiralTrain":
        """The train of opposite handedness (every polarization angle negated)."""
        return ChiralTrain(
            [Pulse(p.time, p.kick_strength, -p.pol_angle) for p in self.pulses],
            delta=-self.delta,
            tau=self.tau,
        )


def bessel_weights(A: float, n_cut: int) -> list[tuple[int, float]]:
    """Sideband amplitudes [(n, J_n(A))] for |n| <= n_cut."""
    if n_cut < 0:
        raise ValueError(f"n_cut must be >= 0, got {n_cut}")
    return [(n, float(jv(n, A))) for n in range(-n_cut, n_cut + 1)]


def sideband_cutoff(A: float, coverage: float) -> int:
    """Smallest n_cut whose sidebands hold at least `coverage` of the energy."""
    if not 0.0 < coverage <= 1.0:
        raise ValueError(f"coverage must be in (0, 1], got {coverage}")
    total = float(jv(0, A)) ** 2
    n_cut = 0
    while total < coverage:
        n_cut += 1
        total += 2.0 * float(jv(n_cut, A)) ** 2
        if n_cut > 1000:
            raise ValueError(f"sideband cutoff did not converge for A={A}")
    return n_cut


def kick_sequence(A: float, p_total: float, coverage: float = DEFAULT_COVERAGE) -> np.ndarray:
    """Time-ordered kick strengths P_k, renormalized to sum to p_total.

    Pulse intensities follow J_n(A)^2; the retained set (|n| <= n_cut chosen by
    `coverage`) is rescaled so the total kick matches p_total.
    """
    n_cut = sideband_cutoff(A, coverage)
    j2 = np.array([float(jv(abs(k - n_cut), A)) ** 2 for k in range(2 * n_cut + 1)])
    return p_total * j2 / j2.sum()


def train_from_shaper(A: float, tau: float, delta: float, p_total: float,
                      coverage: float = DEFAULT_COVERAGE) -> ChiralTrain:
    """Reduce a shaped train to its delta-kick list.

    Kicks sit at t = k tau (k = 0, 1, ...) with polarization angle k delta and
    strengths from :func:`kick_sequence`.
    """
    if p_total < 0:
        raise ValueError(f"p_total must be >= 0, got {p_total}")
    strengths = kick_sequence(A, p_total, coverage)
    pulses = [Pulse(time=k * tau, kick_strength=float(p), pol_angle=k * delta)
              for k, p in enumerate(strengths)]
    return ChiralTrain(pulses, delta=delta, tau=tau)


@dataclass
class SampledField:
    """Complex analytic field on a uniform time grid; Re gives the real field."""

    t: np.ndarray
    ex: np.ndarray
    ey: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.ex = np.asarray(self.ex, dtype=np.complex128)
        self.ey = np.asarray(self.ey, dtype=np.complex128)
        if self.t.ndim != 1 or self.ex.shape != self.t.shape or self.ey.shape != self.t.shape:
            raise ValueError("t, ex, ey must be 1-d arrays of equal length")
        dt = np.diff(self.t)
        if len(dt) and (dt.max() - dt.min()) > 1e-9 * dt.max():
            raise ValueError("time grid must be uniform")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def intensity(self) -> np.ndarray:
        """Carrier-averaged intensity envelope |ex|^2 + |ey|^2."""
        return np.abs(self.ex) ** 2 + np.abs(self.ey) ** 2


def default_time_grid(cfg: ShaperConfig, n_cut: int | None = None,
                      samples_per_cycle: int = 8) -> np.ndarray:
    """Uniform grid covering every significant pulse of the train."""
    if n_cut is None:
        n_cut = sideband_cutoff(cfg.A, 1.0 - 1e-12)
    span = n_cut * cfg.tau + 5.0 * cfg.envelope_fwhm
    dt = (2.0 * pi / cfg.omega0) / samples_per_cycle
    n = int(np.ceil(2.0 * span / dt)) + 1
    return np.linspace(-span, span, n)


def synthesize_field(cfg: ShaperConfig, t_grid: np.ndarray,
                     n_cut: int | None = None) -> SampledField:
    """Sample the shaped optical field on `t_grid`.

    The two polarization components each carry the sideband sum
    sum_n J_n(A) env(t + n tau) exp(i (w0 t + n d_i)), scaled by the
    projection of the input polarization on the shaper axis.  The grid must
    resolve the carrier (spacing <= quarter period).
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 2:
        raise ValueError("t_grid must be a 1-d array with at least two samples")
    dt = float(t[1] - t[0])
    if dt > (2.0 * pi / cfg.omega0) / 4.0:
        raise ValueError(
            f"time grid spacing {dt:.4g} fs is too coarse for the carrier "
            f"(need <= {(2.0 * pi / cfg.omega0) / 4.0:.4g} fs)"
        )
    if n_cut is None:
        n_cut = sideband_cutoff(cfg.A, 1.0 - 1e-12)
    # Gaussian field envelope; envelope_fwhm is the intensity FWHM
    sigma2 = cfg.envelope_fwhm ** 2 / (2.0 * np.log(2.0))
    cx, cy = cfg.input_polarization
    ex = np.zeros(len(t), dtype=np.complex128)
    ey = np.zeros(len(t), dtype=np.complex128)
    carrier = np.exp(1j * cfg.omega0 * t)
    for n in range(-n_cut, n_cut + 1):
        amp = float(jv(n, cfg.A))
        if amp == 0.0:
            continue
        env = np.exp(-((t + n * cfg.tau) ** 2) / sigma2)
        ex += cx * amp * env * carrier * np.exp(1j * n * cfg.delta1)
        ey += cy * amp * env * carrier * np.exp(1j * n * cfg.delta2)
    return SampledField(t, ex, ey)


def quarter_wave(field: SampledField, axis_angle: float) -> SampledField:
    """Ideal quarter-wave retarder with its fast axis at `axis_angle`.

    Jones matrix R(a) diag(1, i) R(-a); the slow axis is retarded by pi/2.
    """
    c, s = np.cos(axis_angle), np.sin(axis_angle)
    # Components along the fast/slow axes
    ef = c * field.ex + s * field.ey
    es = -s * field.ex + c * field.ey
    es = 1j * es
    ex = c * ef - s * es
    ey = s * ef + c * es
    return SampledField(field.t, ex, ey)


def project_polarization(field: SampledField, analyzer_angle: float) -> np.ndarray:
    """Carrier-averaged intensity trace behind a linear analyzer."""
    ea = np.cos(analyzer_angle) * field.ex + np.sin(analyzer_angle) * field.ey
    return np.abs(ea) ** 2


def pulse_stokes(field: SampledField, centers, half_window: float) -> np.ndarray:
    """Integrated Stokes parameters (S0, S1, S2, S3) per pulse window.

    S3/S0 measures residual ellipticity; 0.5 atan2(S2, S1) is the polarization
    line angle.
    """
    out = np.zeros((len(centers), 4))
    for i, tc in enumerate(centers):
        sel = np.abs(field.t - tc) <= half_window
        ex, ey = field.ex[sel], field.ey[sel]
        ixx = float(np.sum(np.abs(ex) ** 2))
        iyy = float(np.sum(np.abs(ey) ** 2))
        cross = np.sum(np.conj(ex) * ey)
        out[i] = (ixx + iyy, ixx - iyy, 2.0 * cross.real, 2.0 * cross.imag)
    return out * (field.dt if field.dt else 1.0)


def polarization_angles(stokes: np.ndarray) -> np.ndarray:
    """Line angle (mod pi) of each pulse from its Stokes parameters."""
    return 0.5 * np.arctan2(stokes[:, 2], stokes[:, 1])
