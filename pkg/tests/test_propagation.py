import numpy as np
import pytest

from latticeqoc.operators import S_X
from latticeqoc.propagation import (
    ControlProblem,
    ControlSchedule,
    TimeGrid,
    evolve_state,
    forward_propagate,
    reverse_state,
    reverse_step,
    step_hamiltonian,
    step_unitary,
)

from conftest import random_problem


class TestTimeGrid:
    def test_total_time(self):
        assert TimeGrid(500, 0.2).total_time == pytest.approx(100.0)

    @pytest.mark.parametrize("n,dt", [(0, 0.1), (5, 0.0), (5, -1.0)])
    def test_rejects_bad_grids(self, n, dt):
        with pytest.raises(ValueError):
            TimeGrid(n, dt)


class TestControlTypes:
    def test_schedule_shape_checks(self):
        grid = TimeGrid(4, 0.1)
        with pytest.raises(ValueError):
            ControlSchedule(np.zeros((2, 5)), grid)
        with pytest.raises(ValueError):
            ControlSchedule(np.full((2, 4), np.nan), grid)

    def test_problem_rejects_non_unitary_target(self):
        with pytest.raises(ValueError):
            ControlProblem(
                drift=np.zeros((2, 2)),
                controls=[S_X],
                target=np.diag([1.0, 2.0]).astype(complex),
            )

    def test_problem_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ControlProblem(
                drift=np.zeros((2, 2)),
                controls=[np.eye(4)],
                target=np.eye(2, dtype=complex),
            )


class TestStepOperators:
    def test_zero_schedule_gives_drift(self, rng):
        problem, schedule = random_problem(rng)
        schedule.amplitudes[:] = 0.0
        assert np.allclose(step_hamiltonian(problem, schedule, 0), problem.drift)

    def test_linearity(self):
        problem = ControlProblem(
            drift=np.zeros((2, 2)),
            controls=[S_X],
            target=np.eye(2, dtype=complex),
        )
        schedule = ControlSchedule(np.array([[2.0]]), TimeGrid(1, 0.1))
        assert np.allclose(step_hamiltonian(problem, schedule, 0), 2.0 * S_X)

    def test_random_case_matches_elementwise_sum(self, rng):
        problem, schedule = random_problem(rng, n_controls=3)
        t = 2
        expected = problem.drift + sum(
            schedule.amplitudes[i, t] * problem.controls[i] for i in range(3)
        )
        assert np.allclose(step_hamiltonian(problem, schedule, t), expected)

    def test_index_out_of_range(self, rng):
        problem, schedule = random_problem(rng, n_steps=3)
        with pytest.raises(IndexError):
            step_hamiltonian(problem, schedule, 3)

    def test_zero_hamiltonian_step_unitary(self):
        problem = ControlProblem(
            drift=np.zeros((2, 2)), controls=[S_X], target=np.eye(2, dtype=complex)
        )
        schedule = ControlSchedule(np.array([[0.0]]), TimeGrid(1, 0.7))
        assert np.allclose(step_unitary(problem, schedule, 0), np.eye(2))

    def test_pi_rotation(self):
        problem = ControlProblem(
            drift=np.zeros((2, 2)), controls=[S_X], target=np.eye(2, dtype=complex)
        )
        schedule = ControlSchedule(np.array([[1.0]]), TimeGrid(1, np.pi))
        # exp(-i Sx pi) = -i sigma_x
        assert np.allclose(step_unitary(problem, schedule, 0), -2j * S_X, atol=1e-14)


class TestForwardPropagate:
    def test_single_step(self, rng):
        problem, schedule = random_problem(rng, n_steps=1)
        k, _ = forward_propagate(problem, schedule)
        assert np.allclose(k, step_unitary(problem, schedule, 0))

    def test_zero_everything_gives_identity(self):
        problem = ControlProblem(
            drift=np.zeros((2, 2)), controls=[S_X], target=np.eye(2, dtype=complex)
        )
        schedule = ControlSchedule(np.zeros((1, 20)), TimeGrid(20, 0.3))
        k, _ = forward_propagate(problem, schedule)
        assert np.allclose(k, np.eye(2))

    def test_matches_explicit_product(self, rng):
        problem, schedule = random_problem(rng, n_steps=5)
        k, _ = forward_propagate(problem, schedule)
        explicit = np.eye(problem.dim, dtype=complex)
        for t in range(5):
            explicit = step_unitary(problem, schedule, t) @ explicit
        assert np.abs(k - explicit).max() <= 1e-13

    def test_storage_policies_do_not_change_result(self, rng):
        problem, schedule = random_problem(rng, n_steps=7)
        k_none, stored_none = forward_propagate(problem, schedule, store="none")
        k_all, stored_all = forward_propagate(problem, schedule, store="all")
        k_ckpt, stored_ckpt = forward_propagate(problem, schedule, store=3)
        assert np.array_equal(k_none, k_all)
        assert np.array_equal(k_none, k_ckpt)
        assert stored_none is None
        assert len(stored_all) == 7
        assert sorted(stored_ckpt) == [2, 5]
        assert np.array_equal(stored_all[2], stored_ckpt[2])

    def test_unitarity_along_trajectory(self, rng):
        problem, schedule = random_problem(rng, n_steps=100, dt=0.3)
        _, stored = forward_propagate(problem, schedule, store="all")
        for t in range(0, 100, 10):
            k = stored[t]
            assert np.linalg.norm(k.conj().T @ k - np.eye(problem.dim)) <= 1e-10

    def test_rejects_bad_policy(self, rng):
        problem, schedule = random_problem(rng, n_steps=4)
        with pytest.raises(ValueError):
            forward_propagate(problem, schedule, store="some")
        with pytest.raises(ValueError):
            forward_propagate(problem, schedule, store=0)


class TestStates:
    def test_zero_hamiltonian_preserves_state(self):
        problem = ControlProblem(
            drift=np.zeros((2, 2)), controls=[S_X], target=np.eye(2, dtype=complex)
        )
        schedule = ControlSchedule(np.zeros((1, 5)), TimeGrid(5, 0.2))
        psi0 = np.array([1.0, 0.0], dtype=complex)
        assert np.allclose(evolve_state(problem, schedule, psi0), psi0)

    def test_matches_matrix_path(self, rng):
        problem, schedule = random_problem(rng, n_steps=6)
        psi0 = rng.normal(size=problem.dim) + 1j * rng.normal(size=problem.dim)
        psi0 /= np.linalg.norm(psi0)
        k, _ = forward_propagate(problem, schedule)
        assert np.abs(evolve_state(problem, schedule, psi0) - k @ psi0).max() <= 1e-12

    def test_norm_preserved_on_long_schedule(self, rng):
        problem, schedule = random_problem(rng, n_steps=500, dt=0.2, amp=0.1)
        psi0 = np.zeros(problem.dim, dtype=complex)
        psi0[0] = 1.0
        psi = evolve_state(problem, schedule, psi0)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)

    def test_rejects_unnormalised(self, rng):
        problem, schedule = random_problem(rng)
        with pytest.raises(ValueError):
            evolve_state(problem, schedule, np.ones(problem.dim, dtype=complex))


class TestReversal:
    def test_single_step_roundtrip(self, rng):
        problem, schedule = random_problem(rng, n_steps=1)
        u = step_unitary(problem, schedule, 0)
        assert np.allclose(reverse_step(u, u), np.eye(problem.dim), atol=1e-14)
        k = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
        assert np.abs(reverse_step(u @ k, u) - k).max() <= 1e-14

    def test_state_roundtrip(self, rng):
        problem, schedule = random_problem(rng, n_steps=1)
        u = step_unitary(problem, schedule, 0)
        psi = rng.normal(size=problem.dim) + 1j * rng.normal(size=problem.dim)
        psi /= np.linalg.norm(psi)
        back = reverse_state(u @ psi, u)
        assert np.abs(back - psi).max() <= 1e-14
        assert np.linalg.norm(back) == pytest.approx(1.0, abs=1e-12)

    def test_full_reversal_of_stored_trajectory(self, rng):
        problem, schedule = random_problem(rng, dim=4, n_steps=100, dt=0.25)
        k, stored = forward_propagate(problem, schedule, store="all")
        worst = 0.0
        for t in range(99, 0, -1):
            u = step_unitary(problem, schedule, t)
            k = reverse_step(k, u)
            worst = max(worst, np.abs(k - stored[t - 1]).max())
        assert worst <= 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            reverse_step(np.eye(2, dtype=complex), np.eye(4, dtype=complex))
        with pytest.raises(ValueError):
            reverse_state(np.zeros(2, dtype=complex), np.eye(4, dtype=complex))
