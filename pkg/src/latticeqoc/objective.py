"""Gate-synthesis loss, its reverse-mode seed, and the lattice-model
target unitaries with split-operator diagnostics.

The loss is the global-phase-invariant infidelity

    F0 = 1 - |Tr(K_T* K_N) / D|^2,

zero exactly when the realised propagator equals the target up to a
global phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .linalg import expm_unitary
from .operators import (
    build_corner_hamiltonian,
    build_model_hamiltonian,
    build_plaquette_hamiltonian,
)


@dataclass(frozen=True)
class Overlap:
    """Normalised trace overlap z = Tr(K_T* K_N)/D and the loss 1 - |z|^2."""

    z: complex
    loss: float


def overlap(k_n: np.ndarray, k_target: np.ndarray) -> Overlap:
    if k_n.shape != k_target.shape:
        raise ValueError(
            f"propagator and target dimensions differ: {k_n.shape} vs {k_target.shape}"
        )
    dim = k_target.shape[0]
    z = np.trace(k_target.conj().T @ k_n) / dim
    return Overlap(z=z, loss=1.0 - abs(z) ** 2)


def infidelity(k_n: np.ndarray, k_target: np.ndarray) -> float:
    """F0 = 1 - |Tr(K_T* K_N)|^2 / D^2."""
    return overlap(k_n, k_target).loss


def infidelity_adjoint_seed(k_n: np.ndarray, k_target: np.ndarray) -> np.ndarray:
    """Seed A_N of the backward recursion.

    Defined so that dF0 = 2 Re Tr(A_N* dK) for any perturbation dK of the
    final propagator: A_N = -(z / D) K_T with z the normalised overlap.
    """
    ov = overlap(k_n, k_target)
    dim = k_target.shape[0]
    return -(ov.z / dim) * k_target


def target_plaquette_unitary(lattice: Lattice, coupling_j: float, tau: float) -> np.ndarray:
    """exp(+i tau J H_P): one split-operator factor of the model evolution."""
    return expm_unitary(-coupling_j * build_plaquette_hamiltonian(lattice), tau)


def target_corner_unitary(lattice: Lattice, coupling_v: float, tau: float) -> np.ndarray:
    """exp(-i tau V H_C): the diagonal split-operator factor."""
    return expm_unitary(coupling_v * build_corner_hamiltonian(lattice), tau)


def trotter_error(
    lattice: Lattice, coupling_j: float, coupling_v: float, t: float, q: int
) -> float:
    """Frobenius-norm error of the q-step split-operator approximation.

    || exp(-i t H_model) - [U_P(t/q) U_C(t/q)]^q ||_F, whose leading term
    scales as t^2/q when the plaquette and corner terms do not commute.
    """
    if q < 1:
        raise ValueError(f"number of product steps must be >= 1, got {q}")
    h_model = build_model_hamiltonian(lattice, coupling_j, coupling_v)
    exact = expm_unitary(h_model, t)
    step = target_plaquette_unitary(lattice, coupling_j, t / q) @ target_corner_unitary(
        lattice, coupling_v, t / q
    )
    return float(np.linalg.norm(exact - np.linalg.matrix_power(step, q)))
