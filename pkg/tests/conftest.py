import numpy as np
import pytest

from latticeqoc.propagation import ControlProblem, ControlSchedule, TimeGrid


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2.0


def random_unitary(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_problem(rng, dim=4, n_controls=2, n_steps=5, dt=0.2, amp=0.3):
    """Small synthetic control problem with a random schedule."""
    problem = ControlProblem(
        drift=random_hermitian(rng, dim),
        controls=[random_hermitian(rng, dim) for _ in range(n_controls)],
        target=random_unitary(rng, dim),
    )
    schedule = ControlSchedule(
        amp * rng.standard_normal((n_controls, n_steps)),
        TimeGrid(n_steps=n_steps, dt=dt),
    )
    return problem, schedule


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
