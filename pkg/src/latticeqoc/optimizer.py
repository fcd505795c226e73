"""ADAM-driven minimisation of the gate infidelity over control schedules.

ADAM steps are taken on dimensionless amplitudes: the schedule (rad/ns)
is divided by a reference scale before updating, so the learning rate
has the same meaning regardless of the physical amplitude units.  The
default scale is the magnitude of the transmon coupling, making a
learning rate of 1e-3 a sub-percent-of-coupling amplitude step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .gradient import GradientResult, GradientStrategy, gradient, parse_strategy
from .operators import DEVICE_COUPLING_RAD_NS
from .propagation import ControlProblem, ControlSchedule

DEFAULT_PARAMETER_SCALE = abs(DEVICE_COUPLING_RAD_NS)


@dataclass
class AdamState:
    """First/second gradient moments and hyperparameters."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, shape: tuple[int, ...], **hyper) -> "AdamState":
        return cls(m=np.zeros(shape), v=np.zeros(shape), **hyper)


def adam_step(state: AdamState, grad: np.ndarray) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected ADAM update; returns (new state, parameter delta)."""
    if not np.all(np.isfinite(grad)):
        raise ValueError("gradient has non-finite entries")
    if grad.shape != state.m.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match state {state.m.shape}")
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad**2
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    delta = -state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(
        m=m, v=v, step=step, lr=state.lr, beta1=state.beta1, beta2=state.beta2, eps=state.eps
    )
    return new_state, delta


@dataclass
class ConvergenceRecord:
    iteration: int
    loss: float
    grad_inf_norm: float
    wall_ms: float


@dataclass
class ConvergenceLog:
    """Per-iteration loss/gradient trace of one optimisation run."""

    records: list[ConvergenceRecord] = field(default_factory=list)

    def append(self, rec: ConvergenceRecord):
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])


def optimize(
    problem: ControlProblem,
    initial_schedule: ControlSchedule,
    strategy: GradientStrategy | str,
    iterations: int,
    lr: float = 1e-3,
    parameter_scale: float = DEFAULT_PARAMETER_SCALE,
    callback=None,
) -> tuple[ControlSchedule, ConvergenceLog]:
    """Minimise the infidelity; returns the best-seen schedule and the log.

    Each iteration evaluates ``gradient`` with the given memory strategy
    and applies one ADAM update.  ``callback(iteration, result)`` runs
    after each evaluation when given.
    """
    if iterations < 1:
        raise ValueError(f"need at least one iteration, got {iterations}")
    if isinstance(strategy, str):
        strategy = parse_strategy(strategy)
    if not parameter_scale > 0:
        raise ValueError("parameter scale must be positive")

    theta = initial_schedule.amplitudes / parameter_scale
    grid = initial_schedule.grid
    state = AdamState.zeros(theta.shape, lr=lr)
    log = ConvergenceLog()
    best_loss = np.inf
    best_amplitudes = initial_schedule.amplitudes.copy()

    for it in range(iterations):
        t0 = time.perf_counter()
        schedule = ControlSchedule(theta * parameter_scale, grid)
        result: GradientResult = gradient(problem, schedule, strategy)
        if result.loss < best_loss:
            best_loss = result.loss
            best_amplitudes = schedule.amplitudes.copy()
        grad_theta = result.grad * parameter_scale
        state, delta = adam_step(state, grad_theta)
        theta = theta + delta
        wall_ms = (time.perf_counter() - t0) * 1e3
        log.append(
            ConvergenceRecord(
                iteration=it,
                loss=result.loss,
                grad_inf_norm=float(np.abs(result.grad).max()) if result.grad.size else 0.0,
                wall_ms=wall_ms,
            )
        )
        if callback is not None:
            callback(it, result)

    return ControlSchedule(best_amplitudes, grid), log
