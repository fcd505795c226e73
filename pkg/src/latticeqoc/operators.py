"""Dense many-qubit operators for the lattice model and the device.

All operators are dense complex128 ndarrays of shape (2**n, 2**n) with
qubit 0 as the most significant tensor factor.  Spin-1/2 convention
throughout: S_a = sigma_a / 2, so S_+ = [[0, 1], [0, 0]].

Units: hbar = 1, time in nanoseconds, energies and control amplitudes in
angular frequency (rad/ns).
"""

from __future__ import annotations

import numpy as np

from .lattice import Lattice

S_X = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
S_Y = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
S_Z = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
S_PLUS = S_X + 1j * S_Y
S_MINUS = S_X - 1j * S_Y

# transmon-transmon exchange coupling, -20 * 2pi MHz expressed in rad/ns
DEVICE_COUPLING_RAD_NS = -2.0 * np.pi * 0.020


def embed(local_ops: list[np.ndarray], qubits: list[int], n_qubits: int) -> np.ndarray:
    """Tensor-embed 2x2 operators on the given qubits, identity elsewhere."""
    if len(local_ops) != len(qubits):
        raise ValueError("need one local operator per qubit index")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit indices: {qubits}")
    for q in qubits:
        if not 0 <= q < n_qubits:
            raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
    factors = [np.eye(2, dtype=complex)] * n_qubits
    for op, q in zip(local_ops, qubits):
        factors[q] = np.asarray(op, dtype=complex)
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def build_plaquette_hamiltonian(lattice: Lattice) -> np.ndarray:
    """Ring-exchange term: sum over plaquettes of S+ S- S+ S- + h.c.

    The raising/lowering pattern follows the counterclockwise plaquette
    ordering (bottom, right, top, left).
    """
    n = lattice.n_qubits
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for (i, j, k, l) in lattice.plaquettes:
        term = embed([S_PLUS, S_MINUS, S_PLUS, S_MINUS], [i, j, k, l], n)
        h += term + term.conj().T
    return h


def build_corner_hamiltonian(lattice: Lattice) -> np.ndarray:
    """Corner term: sum of Sz Sz over perpendicular vertex-sharing pairs."""
    n = lattice.n_qubits
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for (i, j) in lattice.corner_pairs:
        h += embed([S_Z, S_Z], [i, j], n)
    return h


def build_model_hamiltonian(lattice: Lattice, coupling_j: float, coupling_v: float) -> np.ndarray:
    """Full lattice model: -J * plaquette term + V * corner term."""
    return (-coupling_j) * build_plaquette_hamiltonian(lattice) + coupling_v * build_corner_hamiltonian(lattice)


def build_device_hamiltonians(
    lattice: Lattice,
    coupling_g: float = DEVICE_COUPLING_RAD_NS,
    quadratures: str = "xy",
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Drift and control Hamiltonians of the coupled-transmon device.

    Drift is g * (Sx Sx + Sy Sy) summed over the device coupling graph.
    Controls are per-qubit drive operators: with ``quadratures="xy"``
    (the default) each qubit gets an Sx and an Sy channel, the two
    quadratures of a resonant microwave drive; ``"x"`` restricts to the
    in-phase Sx channel only.  The Sx-only device is not fully
    controllable on lattices whose coupling graph is edge-transitive,
    so gate synthesis targets generally require both quadratures.
    """
    if quadratures not in ("x", "xy"):
        raise ValueError(f"quadratures must be 'x' or 'xy', got {quadratures!r}")
    n = lattice.n_qubits
    dim = 2**n
    drift = np.zeros((dim, dim), dtype=complex)
    for (i, j) in lattice.couplings:
        drift += coupling_g * (
            embed([S_X, S_X], [i, j], n) + embed([S_Y, S_Y], [i, j], n)
        )
    controls = [embed([S_X], [q], n) for q in range(n)]
    if quadratures == "xy":
        controls += [embed([S_Y], [q], n) for q in range(n)]
    return drift, controls
