"""Hermitian eigendecomposition, unitary matrix exponential, and the
exponential's reverse-mode derivative.

The propagator of one time step is U = exp(-i H dt) for Hermitian H.
Computing it through the eigendecomposition H = V diag(w) V* keeps U
exactly unitary and makes the derivative cheap: in the eigenbasis the
Frechet derivative of the exponential is an elementwise (Daleckii-Krein)
multiplier built from divided differences of exp(-i w dt).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_HERMITICITY_RTOL = 1e-10


@dataclass
class EigenDecomposition:
    """Eigenvalues (ascending, real) and unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(h: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrised as (H + H*)/2 before factoring; inputs that
    are not Hermitian to within 1e-10 (relative to the largest entry) are
    rejected, as are non-finite entries.
    """
    h = np.asarray(h, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    scale = max(np.abs(h).max(), 1.0)
    if np.abs(h - h.conj().T).max() > _HERMITICITY_RTOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((h + h.conj().T) / 2.0)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def expm_from_eig(eig: EigenDecomposition, dt: float) -> np.ndarray:
    """exp(-i H dt) from a precomputed eigendecomposition of H."""
    w, v = eig.eigenvalues, eig.eigenvectors
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def expm_unitary(h: np.ndarray, dt: float, eig: EigenDecomposition | None = None) -> np.ndarray:
    """exp(-i H dt) for Hermitian H; unitary by construction.

    ``eig`` may supply a precomputed decomposition of H.
    """
    if eig is None:
        eig = eigh(h)
    return expm_from_eig(eig, dt)


def _phase_divided_differences(w: np.ndarray, dt: float) -> np.ndarray:
    """Matrix of divided differences of f(x) = exp(-i x dt).

    Entry (a, b) is (f(w_a) - f(w_b)) / (w_a - w_b), evaluated in the
    cancellation-free product form
        -i dt exp(-i (w_a + w_b) dt / 2) sinc((w_a - w_b) dt / 2),
    which is exact for all gaps and reduces to f'(w_a) on the diagonal.
    """
    gap = w[:, None] - w[None, :]
    mid = np.exp(-0.5j * dt * (w[:, None] + w[None, :]))
    # np.sinc(x) = sin(pi x)/(pi x)
    return -1j * dt * mid * np.sinc(gap * dt / (2.0 * np.pi))


def expm_vjp(
    h: np.ndarray,
    dt: float,
    seed: np.ndarray,
    eig: EigenDecomposition | None = None,
) -> np.ndarray:
    """Reverse-mode derivative of H -> exp(-i H dt).

    Given an adjoint seed L, returns Hbar such that for every Hermitian
    direction E,

        2 Re Tr(L* . D_expm[E]) = 2 Re Tr(Hbar* . E),

    where D_expm is the Frechet derivative of the exponential at H.  In
    the eigenbasis this is Hbar = V (conj(Phi) o (V* L V)) V* with Phi
    the divided-difference multiplier of the eigenphases.
    """
    seed = np.asarray(seed, dtype=complex)
    if not np.all(np.isfinite(seed)):
        raise ValueError("adjoint seed has non-finite entries")
    if eig is None:
        eig = eigh(h)
    w, v = eig.eigenvalues, eig.eigenvectors
    phi = _phase_divided_differences(w, dt)
    return v @ (np.conj(phi) * (v.conj().T @ seed @ v)) @ v.conj().T
