"""Generalized driven harmonic oscillators in natural units.

The package integrates the Riccati/Ermakov-type transform system behind
variable quadratic Hamiltonians, builds the exact Hermite-function wave
functions and invariant eigenfunctions, evaluates the quadratic dynamical
invariant and ladder algebra on grids, accumulates Lewis and Berry phases
by independent formulas, and cross-checks everything against a
Crank-Nicolson propagation of the underlying PDE.
"""

from .berry import (
    PhaseRecord,
    accumulate,
    berry_rate_alternative,
    berry_rate_direct,
    berry_rate_reduced,
    lewis_phase,
)
from .ermakov import (
    CausticError,
    SolverConfig,
    SystemState,
    Trajectory,
    char_residual,
    default_initial_state,
    integrate,
    system_rhs,
)
from .expressions import CoefficientSet, differentiate, evaluate, parse
from .hermite import (
    ComplexField,
    Grid,
    ModeSpec,
    capital_psi_n,
    expansion_coefficients,
    hermite_function,
    inner_product,
    phi_n,
    psi_field,
    psi_n,
    suggest_grid,
    synthesize,
)
from .invariant import (
    apply_annihilation,
    apply_creation,
    apply_hamiltonian,
    apply_linear_invariant,
    expectation_invariant,
    hamiltonian_expectation_analytic,
    kernel_K,
    lambda_t,
    su11_generators,
)
from .pde import PropagatorConfig, propagate, residual_check, step
from .presets import preset_coefficients, preset_names

__version__ = "0.1.0"

__all__ = [
    "CausticError",
    "CoefficientSet",
    "ComplexField",
    "Grid",
    "ModeSpec",
    "PhaseRecord",
    "PropagatorConfig",
    "SolverConfig",
    "SystemState",
    "Trajectory",
    "accumulate",
    "apply_annihilation",
    "apply_creation",
    "apply_hamiltonian",
    "apply_linear_invariant",
    "berry_rate_alternative",
    "berry_rate_direct",
    "berry_rate_reduced",
    "capital_psi_n",
    "char_residual",
    "default_initial_state",
    "differentiate",
    "evaluate",
    "expansion_coefficients",
    "expectation_invariant",
    "hamiltonian_expectation_analytic",
    "hermite_function",
    "inner_product",
    "integrate",
    "kernel_K",
    "lambda_t",
    "lewis_phase",
    "parse",
    "phi_n",
    "preset_coefficients",
    "preset_names",
    "propagate",
    "psi_field",
    "psi_n",
    "residual_check",
    "step",
    "su11_generators",
    "suggest_grid",
    "synthesize",
    "system_rhs",
]
