"""Quantum optimal control of lattice spin models with exact gradients
under four interchangeable memory strategies."""

from .gradient import (
    GradientResult,
    GradientStrategy,
    MemoryStats,
    NumericalError,
    finite_difference_gradient,
    gradient,
    parse_strategy,
)
from .lattice import Lattice, corner_pairs, device_couplings, make_lattice
from .linalg import EigenDecomposition, eigh, expm_unitary, expm_vjp
from .objective import (
    infidelity,
    infidelity_adjoint_seed,
    target_corner_unitary,
    target_plaquette_unitary,
    trotter_error,
)
from .operators import (
    build_corner_hamiltonian,
    build_device_hamiltonians,
    build_model_hamiltonian,
    build_plaquette_hamiltonian,
    embed,
)
from .optimizer import AdamState, ConvergenceLog, adam_step, optimize
from .propagation import (
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

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ControlProblem",
    "ControlSchedule",
    "ConvergenceLog",
    "EigenDecomposition",
    "GradientResult",
    "GradientStrategy",
    "Lattice",
    "MemoryStats",
    "NumericalError",
    "TimeGrid",
    "adam_step",
    "build_corner_hamiltonian",
    "build_device_hamiltonians",
    "build_model_hamiltonian",
    "build_plaquette_hamiltonian",
    "corner_pairs",
    "device_couplings",
    "eigh",
    "embed",
    "evolve_state",
    "expm_unitary",
    "expm_vjp",
    "finite_difference_gradient",
    "forward_propagate",
    "gradient",
    "infidelity",
    "infidelity_adjoint_seed",
    "make_lattice",
    "optimize",
    "parse_strategy",
    "reverse_state",
    "reverse_step",
    "step_hamiltonian",
    "step_unitary",
    "target_corner_unitary",
    "target_plaquette_unitary",
    "trotter_error",
]
