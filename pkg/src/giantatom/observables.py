"""Reduced two-atom state, concurrence, and collective-basis transforms."""

from __future__ import annotations

import math

import numpy as np

_EPS = 1e-9
_SQRT2 = math.sqrt(2.0)

# Basis order for the 4x4 density matrix: |ee>, |eg>, |ge>, |gg>.


def reduced_density(c_a: complex, c_b: complex) -> np.ndarray:
    """Two-atom density matrix after tracing out the field, single excitation.

    The doubly excited row/column stays zero; the leaked population
    1 - |c_a|^2 - |c_b|^2 sits on |gg>.
    """
    pa = abs(c_a) ** 2
    pb = abs(c_b) ** 2
    leak = 1.0 - pa - pb
    if leak < -_EPS:
        raise ValueError(f"amplitudes exceed unit norm by {-leak:.3e}")
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = pa
    rho[2, 2] = pb
    rho[1, 2] = c_a * np.conjugate(c_b)
    rho[2, 1] = np.conjugate(rho[1, 2])
    rho[3, 3] = leak
    return rho


def concurrence(c_a, c_b):
    """Entanglement of the single-excitation pure-sector state: 2|c_a c_b*|.

    Accepts scalars or equal-shape arrays.
    """
    return 2.0 * np.abs(np.asarray(c_a) * np.conjugate(np.asarray(c_b)))


def wootters_concurrence(rho: np.ndarray) -> float:
    """General two-qubit concurrence via the spin-flip eigenvalue recipe.

    Slow path kept for cross-checking `concurrence`; not used in the hot loop.
    """
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    yy = np.kron(sy, sy)
    rho_tilde = yy @ rho.conj() @ yy
    lam = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sqrt(np.clip(lam.real, 0.0, None))
    lam.sort()
    return float(max(0.0, lam[3] - lam[2] - lam[1] - lam[0]))


def dicke_transform(c_a, c_b):
    """Bare amplitudes -> collective (symmetric, antisymmetric) amplitudes."""
    return (c_a + c_b) / _SQRT2, (c_a - c_b) / _SQRT2


def dicke_inverse(alpha_plus, alpha_minus):
    """Collective amplitudes back to the bare (c_a, c_b) pair."""
    return (alpha_plus + alpha_minus) / _SQRT2, (alpha_plus - alpha_minus) / _SQRT2
