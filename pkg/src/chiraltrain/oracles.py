"""Independent reference implementations used to cross-check the fast paths.

Everything here deliberately takes a different route than the production
code: interaction matrix elements come from spherical quadrature instead of
angular-momentum algebra, Bessel weights from a power series instead of the
library routine, and train propagation from explicit dense matrix products
with a Pade matrix exponential instead of the cached eigendecomposition.
These routines back the self-test command and the test suite; they are slow
on purpose and must stay independent of the modules they check.
"""

from __future__ import annotations

from math import pi

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import expm
from scipy.special import sph_harm_y

from .constants import C2_CM_K, C_CM_FS


def bessel_series(n: int, a: float) -> float:
    """J_n(a) summed term by term from the ascending power series."""
    n_abs = abs(n)
    half = 0.5 * a
    # leading term (a/2)^n / n!
    term = 1.0
    for k in range(1, n_abs + 1):
        term *= half / k
    total = term
    k = 1
    while True:
        term *= -(half * half) / (k * (k + n_abs))
        total += term
        if abs(term) <= 1e-18 * max(abs(total), 1e-30) or k > 400:
            break
        k += 1
    if n < 0 and n_abs % 2:
        total = -total
    return total


def _sphere_grid(n_theta: int, n_phi: int):
    """Gauss-Legendre x uniform-phi product grid; exact for the integrands here."""
    u, w_u = leggauss(n_theta)           # u = cos(theta)
    theta = np.arccos(u)
    phi = np.arange(n_phi) * (2.0 * pi / n_phi)
    w_phi = 2.0 * pi / n_phi
    return theta, u, w_u, phi, w_phi


def cos2_quadrature_matrix(states, axis: str = "x",
                           n_theta: int = 64, n_phi: int = 128) -> np.ndarray:
    """<N',M'| cos^2(angle to axis) |N,M> by direct quadrature over the sphere.

    `states` is the ordered list of (N, M) pairs.  The quadrature is spectrally
    exact for band-limited integrands once n_theta and n_phi exceed the basis
    bandwidth, so this doubles as a reference for the structural zeros.
    """
    states = list(states)
    n_max = max(n for n, _ in states)
    n_theta = max(n_theta, 2 * n_max + 8)
    n_phi = max(n_phi, 4 * n_max + 8)
    theta, u, w_u, phi, w_phi = _sphere_grid(n_theta, n_phi)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    if axis == "x":
        f = (1.0 - u[:, None] ** 2) * np.cos(pp) ** 2
    elif axis == "y":
        f = (1.0 - u[:, None] ** 2) * np.sin(pp) ** 2
    elif axis == "z":
        f = np.broadcast_to((u[:, None] ** 2), tt.shape).copy()
    else:
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    ylm = np.array([sph_harm_y(n, m, tt, pp) for n, m in states])
    weighted = ylm * (w_u[None, :, None] * w_phi) * f[None, :, :]
    mat = np.einsum("asp,bsp->ab", ylm.conj(), weighted)
    return mat.real


def dense_train_oracle(amplitudes0: np.ndarray, pulses, states, energies) -> np.ndarray:
    """Propagate by explicitly multiplying the dense per-step matrices.

    Each pulse contributes rotation * expm(i P cos2) * rotation matrices and a
    diagonal free-evolution matrix; the full propagator is accumulated as one
    dense product.  The kick operator itself comes from quadrature.
    """
    states = list(states)
    nb = len(states)
    m = np.array([mm for _, mm in states], dtype=float)
    energies = np.asarray(energies, dtype=float)
    ox = cos2_quadrature_matrix(states, axis="x")
    total = np.eye(nb, dtype=np.complex128)
    t_now = 0.0
    for pulse in pulses:
        dt = pulse.time - t_now
        free = np.diag(np.exp(-2j * pi * C_CM_FS * energies * dt))
        rot_in = np.diag(np.exp(1j * m * pulse.pol_angle))
        rot_out = np.diag(np.exp(-1j * m * pulse.pol_angle))
        kick = expm(1j * pulse.kick_strength * ox)
        total = rot_out @ kick @ rot_in @ free @ total
        t_now = pulse.time
    return total @ np.asarray(amplitudes0, dtype=np.complex128)


def boltzmann_fraction(b_cm1: float, d_cm1: float, temperature_k: float,
                       shells, target_n: int) -> float:
    """Fraction of population in one N shell by an explicit Boltzmann sum.

    `shells` lists every N included in the partition sum; degeneracy 2N+1.
    """
    z = 0.0
    num = 0.0
    for n in shells:
        x = n * (n + 1)
        e = b_cm1 * x - d_cm1 * x * x
        w = (2 * n + 1) * np.exp(-e * C2_CM_K / temperature_k)
        z += w
        if n == target_n:
            num = w
    return num / z
