"""Discrete-time evolution under piecewise-constant controls.

The controlled Hamiltonian at step t is H_t = H_0 + sum_i g[i, t] H_i,
the step propagator is U_t = exp(-i H_t dt), and the accumulated
propagator after step t is K_t = U_t ... U_1 U_0 (with K_{-1} = I by
convention; a schedule of N steps uses t = 0 .. N-1).

Because the U_t are unitary the trajectory is reversible:
K_{t-1} = U_t* K_t and |psi_{t-1}> = U_t* |psi_t>, which lets gradient
strategies re-derive earlier states instead of storing them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import eigh, expm_unitary

_UNITARITY_ATOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of n_steps intervals of duration dt (ns)."""

    n_steps: int
    dt: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"need at least one time step, got {self.n_steps}")
        if not self.dt > 0:
            raise ValueError(f"step duration must be positive, got {self.dt}")

    @property
    def total_time(self) -> float:
        return self.n_steps * self.dt


@dataclass
class ControlSchedule:
    """Control amplitudes g[i, t] in rad/ns on a time grid.

    Row i is the piecewise-constant envelope of control channel i.
    """

    amplitudes: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        if self.amplitudes.ndim != 2:
            raise ValueError("amplitudes must be a 2-d (channels x steps) array")
        if self.amplitudes.shape[1] != self.grid.n_steps:
            raise ValueError(
                f"schedule has {self.amplitudes.shape[1]} columns but the grid "
                f"has {self.grid.n_steps} steps"
            )
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("schedule has non-finite amplitudes")

    @property
    def n_controls(self) -> int:
        return self.amplitudes.shape[0]

    def copy(self) -> "ControlSchedule":
        return ControlSchedule(self.amplitudes.copy(), self.grid)


@dataclass
class ControlProblem:
    """Drift, control operators and the target unitary, all D x D."""

    drift: np.ndarray
    controls: list[np.ndarray]
    target: np.ndarray
    control_stack: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.drift = np.asarray(self.drift, dtype=complex)
        self.controls = [np.asarray(c, dtype=complex) for c in self.controls]
        self.target = np.asarray(self.target, dtype=complex)
        d = self.drift.shape[0]
        if self.drift.shape != (d, d):
            raise ValueError("drift must be square")
        for c in self.controls:
            if c.shape != (d, d):
                raise ValueError("all control operators must match the drift dimension")
        if self.target.shape != (d, d):
            raise ValueError("target must match the drift dimension")
        dev = np.abs(self.target.conj().T @ self.target - np.eye(d)).max()
        if dev > _UNITARITY_ATOL:
            raise ValueError(f"target is not unitary (deviation {dev:.2e})")
        self.control_stack = (
            np.stack(self.controls) if self.controls else np.zeros((0, d, d), dtype=complex)
        )

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    @property
    def n_controls(self) -> int:
        return len(self.controls)


def step_hamiltonian(problem: ControlProblem, schedule: ControlSchedule, t: int) -> np.ndarray:
    """H_t = H_0 + sum_i g[i, t] H_i."""
    if not 0 <= t < schedule.grid.n_steps:
        raise IndexError(f"step index {t} outside 0..{schedule.grid.n_steps - 1}")
    if schedule.n_controls != problem.n_controls:
        raise ValueError(
            f"schedule has {schedule.n_controls} channels, problem has {problem.n_controls}"
        )
    if problem.n_controls == 0:
        return problem.drift.copy()
    return problem.drift + np.tensordot(schedule.amplitudes[:, t], problem.control_stack, axes=1)


def step_unitary(problem: ControlProblem, schedule: ControlSchedule, t: int) -> np.ndarray:
    """U_t = exp(-i H_t dt)."""
    return expm_unitary(step_hamiltonian(problem, schedule, t), schedule.grid.dt)


def forward_propagate(
    problem: ControlProblem,
    schedule: ControlSchedule,
    store: str | int = "none",
):
    """Accumulate K = U_{N-1} ... U_0, optionally retaining intermediates.

    ``store`` selects the retention policy:

    * ``"none"``  - return (K, None);
    * ``"all"``   - return (K, [K_0, ..., K_{N-1}]);
    * integer C   - return (K, {t: K_t}) for t = C-1, 2C-1, ... (the states
      entering each length-C segment; K_{-1} = I is implicit).

    The policy only controls retention; the accumulated product is the
    same arithmetic in every mode.
    """
    n_steps = schedule.grid.n_steps
    if isinstance(store, int):
        if not 1 <= store <= n_steps:
            raise ValueError(f"checkpoint period must be in 1..{n_steps}, got {store}")
    elif store not in ("none", "all"):
        raise ValueError(f"unknown storage policy {store!r}")

    k = np.eye(problem.dim, dtype=complex)
    stored_all: list[np.ndarray] = []
    stored_ckpt: dict[int, np.ndarray] = {}
    for t in range(n_steps):
        k = step_unitary(problem, schedule, t) @ k
        if store == "all":
            stored_all.append(k)
        elif isinstance(store, int) and (t + 1) % store == 0:
            stored_ckpt[t] = k
    if store == "all":
        return k, stored_all
    if isinstance(store, int):
        return k, stored_ckpt
    return k, None


def evolve_state(problem: ControlProblem, schedule: ControlSchedule, psi0: np.ndarray) -> np.ndarray:
    """Propagate a unit state vector through the full schedule."""
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (problem.dim,):
        raise ValueError(f"state must have shape ({problem.dim},), got {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"initial state is not normalised (|psi| = {norm})")
    for t in range(schedule.grid.n_steps):
        h = step_hamiltonian(problem, schedule, t)
        eig = eigh(h)
        phases = np.exp(-1j * eig.eigenvalues * schedule.grid.dt)
        psi = eig.eigenvectors @ (phases * (eig.eigenvectors.conj().T @ psi))
    return psi


def reverse_step(k_t: np.ndarray, u_t: np.ndarray) -> np.ndarray:
    """K_{t-1} = U_t* K_t."""
    if k_t.shape != u_t.shape:
        raise ValueError("propagator and step unitary dimensions differ")
    return u_t.conj().T @ k_t


def reverse_state(psi_t: np.ndarray, u_t: np.ndarray) -> np.ndarray:
    """|psi_{t-1}> = U_t* |psi_t>."""
    if psi_t.shape[0] != u_t.shape[0]:
        raise ValueError("state and step unitary dimensions differ")
    return u_t.conj().T @ psi_t
