"""Rigid-rotor core: |N,M> basis management, rotational energies, cos^2
interaction matrix elements, kick unitaries, free propagation, and frame
rotations about the beam axis.

Conventions
-----------
The quantization axis z is the propagation direction of the pulse train; the
beam polarization lives in the lab x-y plane.  States are spherical harmonics
|N,M> with the Condon-Shortley phase.  A linearly polarized kick along lab x
couples through cos^2(angle to x) = sin^2(theta) cos^2(phi), which obeys the
selection rules dN in {0,+-2}, dM in {0,+-2}.

rotate_z multiplies the |N,M> amplitude by exp(-i M angle); a positive angle
rotates the state counter-clockwise when viewed along +z, so population in
M > 0 means counter-clockwise molecular rotation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, sqrt

import numpy as np

from .constants import C_CM_FS
from .species import Species

HERMITICITY_TOL = 1e-12


def wigner3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3j symbol for integer angular momenta.

    Evaluated with the Racah sum in exact integer/rational arithmetic; only
    the final square root is floating point, so values are accurate to the
    last few ulps for the modest j used here.
    """
    if m1 + m2 + m3 != 0:
        return 0.0
    if not abs(j1 - j2) <= j3 <= j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    prefactor = Fraction(
        factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3),
        factorial(j1 + j2 + j3 + 1),
    )
    prefactor *= (
        factorial(j1 + m1) * factorial(j1 - m1)
        * factorial(j2 + m2) * factorial(j2 - m2)
        * factorial(j3 + m3) * factorial(j3 - m3)
    )
    total = Fraction(0)
    k_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    for k in range(k_min, k_max + 1):
        denom = (
            factorial(k)
            * factorial(j1 + j2 - j3 - k)
            * factorial(j1 - m1 - k)
            * factorial(j2 + m2 - k)
            * factorial(j3 - j2 + m1 + k)
            * factorial(j3 - j1 - m2 + k)
        )
        total += Fraction((-1) ** k, denom)
    sign = -1.0 if (j1 - j2 - m3) % 2 else 1.0
    return sign * sqrt(float(prefactor)) * float(total)


def rotational_energy(species: Species, n: int) -> float:
    """Rotational term value B N(N+1) - D [N(N+1)]^2 in cm^-1."""
    if n < 0 or not species.allows(n):
        raise ValueError(f"N={n} is not an allowed level of {species.name} (parity={species.parity})")
    x = n * (n + 1)
    return species.B * x - species.D * x * x


def beat_period(species: Species, n: int) -> float:
    """Evolution period of the two-state wavepacket |N-2>,|N>, in fs.

    This is 1 / (c (E_N - E_{N-2})); for low N it plays the role of the
    classical rotation period.
    """
    if not species.allows(n) or n - 2 < 0 or not species.allows(n - 2):
        raise ValueError(f"both N={n} and N={n - 2} must be allowed levels of {species.name}")
    de = rotational_energy(species, n) - rotational_energy(species, n - 2)
    return 1.0 / (C_CM_FS * de)


class RotorBasis:
    """Ordered |N,M> basis with parity restriction and truncation at n_max.

    States are sorted lexicographically in (N, M); `index` maps (N, M) to the
    position in the amplitude vector.
    """

    def __init__(self, species: Species, n_max: int):
        if n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {n_max}")
        # Round an n_max of the wrong parity down to the top allowed shell.
        if not species.allows(n_max):
            n_max -= 1
        if n_max < species.min_n:
            raise ValueError(f"n_max={n_max} is below the smallest allowed N of {species.name}")
        self.species = species
        self.n_max = n_max
        self.states: tuple[tuple[int, int], ...] = tuple(
            (n, m) for n in species.allowed_n(n_max) for m in range(-n, n + 1)
        )
        self.index: dict[tuple[int, int], int] = {s: i for i, s in enumerate(self.states)}
        self.n_values = np.array([n for n, _ in self.states], dtype=np.int64)
        self.m_values = np.array([m for _, m in self.states], dtype=np.int64)
        self.energies = np.array([rotational_energy(species, n) for n, _ in self.states])
        self.shells: tuple[int, ...] = tuple(species.allowed_n(n_max))
        # Position of (N, -M) for each (N, M); used to enforce exact mirror symmetry.
        self.mirror = np.array([self.index[(n, -m)] for n, m in self.states], dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self.states)

    def fingerprint(self) -> tuple:
        sp = self.species
        return (sp.name, sp.B, sp.D, sp.parity, self.n_max)

    def __repr__(self):
        return f"RotorBasis({self.species.name}, n_max={self.n_max}, size={self.size})"


def build_basis(species: Species, n_max: int) -> RotorBasis:
    return RotorBasis(species, n_max)


@dataclass
class WaveFunction:
    """Complex amplitude vector over a RotorBasis."""

    basis: RotorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.basis.size,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, expected ({self.basis.size},)"
            )

    @classmethod
    def basis_state(cls, basis: RotorBasis, n: int, m: int) -> "WaveFunction":
        amps = np.zeros(basis.size, dtype=np.complex128)
        amps[basis.index[(n, m)]] = 1.0
        return cls(basis, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def population_by_n(self) -> dict[int, float]:
        pops = self.populations()
        return {n: float(pops[self.basis.n_values == n].sum()) for n in self.basis.shells}


@dataclass
class Operator:
    """Matrix over a RotorBasis."""

    basis: RotorBasis
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        nb = self.basis.size
        if self.matrix.shape != (nb, nb):
            raise ValueError(f"matrix has shape {self.matrix.shape}, expected ({nb}, {nb})")
        if self.hermitian:
            drift = np.max(np.abs(self.matrix - self.matrix.conj().T))
            if drift > HERMITICITY_TOL:
                raise ValueError(f"matrix flagged hermitian deviates from H=H^dag by {drift:.2e}")


def _c2_element(np_: int, mp: int, n: int, m: int, q: int) -> float:
    """<N',M'| C_{2q} |N,M> with C_{2q} = sqrt(4 pi / 5) Y_{2q}."""
    sign = -1.0 if mp % 2 else 1.0
    return (
        sign
        * sqrt((2 * np_ + 1) * (2 * n + 1))
        * wigner3j(np_, 2, n, 0, 0, 0)
        * wigner3j(np_, 2, n, -mp, q, m)
    )


# Expansion of the three direction cosines squared in rank-2 tensors:
#   cos^2(z) = 1/3 + (2/3) C_20
#   cos^2(x) = 1/3 - (1/3) C_20 + (1/sqrt6)(C_22 + C_2-2)
#   cos^2(y) = 1/3 - (1/3) C_20 - (1/sqrt6)(C_22 + C_2-2)
_COS2_COEFFS = {
    "x": (-1.0 / 3.0, 1.0 / sqrt(6.0)),
    "y": (-1.0 / 3.0, -1.0 / sqrt(6.0)),
    "z": (2.0 / 3.0, 0.0),
}


def _cos2_matrix(basis: RotorBasis, axis: str) -> Operator:
    c20, c22 = _COS2_COEFFS[axis]
    nb = basis.size
    mat = np.zeros((nb, nb))
    for i, (n, m) in enumerate(basis.states):
        for np_ in (n - 2, n, n + 2):
            for mp in (m - 2, m, m + 2):
                j = basis.index.get((np_, mp))
                if j is None:
                    continue
                v = 1.0 / 3.0 if (np_ == n and mp == m) else 0.0
                if mp == m:
                    v += c20 * _c2_element(np_, mp, n, m, 0)
                elif mp == m + 2:
                    v += c22 * _c2_element(np_, mp, n, m, 2)
                else:
                    v += c22 * _c2_element(np_, mp, n, m, -2)
                mat[j, i] = v
    # Elements are analytically symmetric and invariant under M -> -M; averaging
    # makes both symmetries hold bitwise so downstream population symmetries are
    # exact to rounding.
    mat = 0.5 * (mat + mat.T)
    mir = basis.mirror
    mat = 0.5 * (mat + mat[np.ix_(mir, mir)])
    return Operator(basis, mat, hermitian=True)


def cos2_matrix_x(basis: RotorBasis) -> Operator:
    """Matrix of sin^2(theta) cos^2(phi): cos^2 of the angle to lab x."""
    return _cos2_matrix(basis, "x")


def cos2_matrix_y(basis: RotorBasis) -> Operator:
    """Matrix of sin^2(theta) sin^2(phi): cos^2 of the angle to lab y."""
    return _cos2_matrix(basis, "y")


def cos2_matrix_z(basis: RotorBasis) -> Operator:
    """Matrix of cos^2(theta): cos^2 of the angle to the beam axis z."""
    return _cos2_matrix(basis, "z")


def kick_unitary(op: Operator, kick_strength: float) -> Operator:
    """U = exp(i P op) for a hermitian operator, via eigendecomposition.

    P = 0 returns the exact identity.
    """
    herm_drift = np.max(np.abs(op.matrix - op.matrix.conj().T))
    if herm_drift > HERMITICITY_TOL:
        raise ValueError(f"kick operator is not hermitian (deviation {herm_drift:.2e})")
    nb = op.basis.size
    if kick_strength == 0.0:
        return Operator(op.basis, np.eye(nb, dtype=np.complex128), hermitian=True)
    w, v = np.linalg.eigh(op.matrix)
    u = (v * np.exp(1j * kick_strength * w)) @ v.conj().T
    return Operator(op.basis, u, hermitian=False)


def rotate_z(psi: WaveFunction, angle: float) -> WaveFunction:
    """Rotate the state about z: |N,M> picks up exp(-i M angle)."""
    phases = np.exp(-1j * psi.basis.m_values * angle)
    return WaveFunction(psi.basis, psi.amplitudes * phases)


def free_propagate(psi: WaveFunction, dt_fs: float) -> WaveFunction:
    """Field-free evolution for dt_fs: |N,M> picks up exp(-i 2 pi c E_N dt)."""
    if dt_fs < 0:
        raise ValueError(f"dt must be >= 0, got {dt_fs}")
    phases = np.exp(-2j * np.pi * C_CM_FS * psi.basis.energies * dt_fs)
    return WaveFunction(psi.basis, psi.amplitudes * phases)


class KickEngine:
    """Shared eigendecomposition of the cos^2(x) operator plus a unitary cache.

    One eigendecomposition serves every kick strength and, through frame
    rotation, every polarization angle.  After `prepare` the cache is only
    read, so it is safe to share across concurrent readers.
    """

    def __init__(self, basis: RotorBasis):
        self.basis = basis
        self.operator = cos2_matrix_x(basis)
        w, v = np.linalg.eigh(self.operator.matrix.real)
        self._eigvals = w
        self._eigvecs = v
        self._unitaries: dict[float, np.ndarray] = {}

    def unitary(self, kick_strength: float) -> np.ndarray:
        p = float(kick_strength)
        u = self._unitaries.get(p)
        if u is None:
            if p == 0.0:
                u = np.eye(self.basis.size, dtype=np.complex128)
            else:
                v = self._eigvecs
                u = (v * np.exp(1j * p * self._eigvals)) @ v.T
            self._unitaries[p] = u
        return u

    def prepare(self, kick_strengths) -> None:
        for p in kick_strengths:
            self.unitary(p)

    def kick(self, psi: WaveFunction, kick_strength: float, pol_angle: float) -> WaveFunction:
        """Apply one delta-kick polarized at `pol_angle` in the x-y plane.

        Implemented by conjugation: rotate_z(-angle), kick along x, rotate_z(+angle).
        """
        u = self.unitary(kick_strength)
        m = self.basis.m_values
        amps = np.exp(1j * m * pol_angle) * psi.amplitudes
        amps = u @ amps
        amps = np.exp(-1j * m * pol_angle) * amps
        return WaveFunction(self.basis, amps)


_ENGINES: dict[tuple, KickEngine] = {}


def get_engine(basis: RotorBasis) -> KickEngine:
    """Process-wide engine cache keyed by the basis fingerprint."""
    key = basis.fingerprint()
    engine = _ENGINES.get(key)
    if engine is None:
        engine = KickEngine(basis)
        _ENGINES[key] = engine
    return engine
