"""Crank-Nicolson propagator for the full evolution equation.

This is the independent oracle: it never sees the trajectory machinery,
only the six coefficient functions and an initial complex field.  The
Hamiltonian is discretized with 2nd-order central differences, which makes
it tridiagonal (the x d/dx cross term and the g d/dx drive sit on the
off-diagonals), and each step solves

    (I + i dt/2 H(t + dt/2)) f_new = (I - i dt/2 H(t + dt/2)) f

with a banded direct solve.  Boundaries are fixed zero; a decay guard turns
boundary contamination into an error instead of silent reflection noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .ermakov import Trajectory
from .expressions import CoefficientSet
from .hermite import ComplexField, Grid, ModeSpec, inner_product, psi_field

__all__ = [
    "PropagatorConfig",
    "BoundaryDecayError",
    "SingularBandError",
    "step",
    "propagate",
    "residual_check",
]

_EDGE_TOL = 1e-10


class BoundaryDecayError(RuntimeError):
    """The field stopped decaying at the grid edges."""


class SingularBandError(RuntimeError):
    """The banded Crank-Nicolson system lost its pivots (never expected)."""


@dataclass(frozen=True)
class PropagatorConfig:
    """Grid and time step for Crank-Nicolson runs; boundaries are fixed zero.

    The scheme is unconditionally stable; accuracy wants
    dt <= 0.5 h^2 / max|a|, and `propagate` warns when that is exceeded.
    """

    grid: Grid
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


def _hamiltonian_bands(coeffs, t, grid):
    """Tridiagonal H as (lower, diag, upper); lower[i] couples f[i-1]."""
    a, b, c, d, force, g = coeffs.values(t)
    x = grid.x
    h = grid.h
    drift = (c * x - g) / (2.0 * h)
    lower = np.full(grid.n_points, -a / h**2, dtype=complex) + 1j * drift
    upper = np.full(grid.n_points, -a / h**2, dtype=complex) - 1j * drift
    diag = 2.0 * a / h**2 + b * x**2 - 1j * d - force * x
    return lower, diag, upper


def _check_edges(values):
    edge = max(abs(values[0]), abs(values[-1]))
    if edge > _EDGE_TOL:
        raise BoundaryDecayError(
            f"field reaches {edge:.2e} at the grid boundary "
            f"(limit {_EDGE_TOL:.0e}); enlarge the grid"
        )


def step(f: ComplexField, coeffs: CoefficientSet, t: float, dt: float) -> ComplexField:
    """One Crank-Nicolson step from t to t + dt with midpoint coefficients."""
    _check_edges(f.values)
    grid = f.grid
    n = grid.n_points
    lower, diag, upper = _hamiltonian_bands(coeffs, t + 0.5 * dt, grid)
    z = 0.5j * dt

    a_diag = 1.0 + z * diag
    a_lower = z * lower
    a_upper = z * upper
    # Dirichlet rows keep the edges pinned at zero
    a_diag[0] = a_diag[-1] = 1.0
    a_upper[0] = a_lower[-1] = 0.0
    if np.min(np.abs(a_diag)) < 1e-14:
        raise SingularBandError("vanishing pivot in the Crank-Nicolson band")

    v = f.values
    rhs = (1.0 - z * diag) * v
    rhs[1:-1] -= z * (lower[1:-1] * v[:-2] + upper[1:-1] * v[2:])
    rhs[0] = rhs[-1] = 0.0

    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = a_upper[:-1]
    ab[1, :] = a_diag
    ab[2, :-1] = a_lower[1:]
    out = solve_banded((1, 1), ab, rhs)
    if not np.all(np.isfinite(out)):
        raise SingularBandError("non-finite Crank-Nicolson solution")
    return ComplexField(grid, out)


def _accuracy_guard(coeffs, t0, t1, cfg):
    ts = np.linspace(t0, t1, 65)
    a_max = max(abs(coeffs.a.eval(float(t))) for t in ts)
    if a_max > 0:
        dt_limit = 0.5 * cfg.grid.h**2 / a_max
        if cfg.dt > dt_limit * 1.000001:
            warnings.warn(
                f"dt={cfg.dt:.3e} exceeds the accuracy heuristic "
                f"0.5*h^2/max|a| = {dt_limit:.3e}; results may lose accuracy",
                RuntimeWarning,
                stacklevel=3,
            )


def propagate(initial: ComplexField, coeffs: CoefficientSet, t0: float, t1: float,
              cfg: PropagatorConfig) -> ComplexField:
    """Propagate `initial` from t0 to t1 in uniform steps of at most cfg.dt."""
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if initial.grid != cfg.grid:
        raise ValueError("initial field does not live on the configured grid")
    _accuracy_guard(coeffs, t0, t1, cfg)
    n_steps = max(1, math.ceil((t1 - t0) / cfg.dt * (1.0 - 1e-12)))
    dt = (t1 - t0) / n_steps
    f = initial
    for k in range(n_steps):
        f = step(f, coeffs, t0 + k * dt, dt)
    return f


def residual_check(n: int, traj: Trajectory, cfg: PropagatorConfig,
                   t0: float | None = None, t1: float | None = None,
                   num_checkpoints: int = 4) -> float:
    """Max L2 distance between the propagated field and the analytic mode.

    The mode at traj.state(t0) is normalized once; the same constant scales
    the analytic reference at every checkpoint, so norm decay (lambda != 1)
    is part of what is being compared.
    """
    t0 = traj.t0 if t0 is None else t0
    t1 = traj.t1 if t1 is None else t1
    scale = 1.0 / psi_field(ModeSpec(n, traj.state(t0)), cfg.grid).norm()
    f = psi_field(ModeSpec(n, traj.state(t0)), cfg.grid) * scale
    worst = 0.0
    checkpoints = np.linspace(t0, t1, num_checkpoints + 1)
    for t_prev, t_next in zip(checkpoints[:-1], checkpoints[1:]):
        f = propagate(f, traj.coeffs, float(t_prev), float(t_next), cfg)
        analytic = psi_field(ModeSpec(n, traj.state(float(t_next))), cfg.grid) * scale
        diff = f - analytic
        worst = max(worst, math.sqrt(inner_product(diff, diff).real))
    return worst
