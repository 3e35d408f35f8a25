"""Hermite functions and the exact oscillator wave functions.

Everything is built on the normalized recurrence for h_n(xi), the Hermite
function with the Gaussian weight folded in: it is uniformly bounded in n
and xi, so there is no overflow anywhere (raw Hermite polynomials die near
n = 150).  The mode formulas attach trajectory data to h_n:

    phi_n(x) = sqrt(beta) * h_n(beta*x + eps)            real, unit L2 norm
    Psi_n(x) = exp(i(alpha*x^2 + delta*x + kappa)) / sqrt(mu) * h_n(...)
    psi_n(x) = exp(i(2n+1)*gamma) * Psi_n(x)

with <Psi_m, Psi_n> = delta_mn / lambda.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .ermakov import SystemState

__all__ = [
    "MAX_MODE",
    "Grid",
    "ComplexField",
    "ModeSpec",
    "GridError",
    "hermite_function",
    "phi_n",
    "psi_n",
    "capital_psi_n",
    "inner_product",
    "expansion_coefficients",
    "synthesize",
    "suggest_grid",
    "field_to_csv",
    "field_to_json",
]

MAX_MODE = 60


class GridError(ValueError):
    """Grid does not support the requested operation."""


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid with an odd number of points (Simpson-ready)."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.x_min >= self.x_max:
            raise ValueError("x_min must be below x_max")
        if self.n_points < 16:
            raise ValueError("grid needs at least 16 points")
        if self.n_points % 2 == 0:
            raise ValueError("n_points must be odd (composite Simpson)")

    @property
    def h(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def simpson_weights(self):
        w = np.full(self.n_points, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return w * (self.h / 3.0)


@dataclass(frozen=True)
class ComplexField:
    """Complex samples of a wave function on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise ValueError("field length does not match grid")
        object.__setattr__(self, "values", values)

    def norm(self):
        return math.sqrt(abs(inner_product(self, self)))

    def normalized(self):
        return ComplexField(self.grid, self.values / self.norm())

    def __add__(self, other):
        _require_same_grid(self, other)
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _require_same_grid(self, other)
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return ComplexField(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ModeSpec:
    """Quantum number n attached to one trajectory state."""

    n: int
    state: SystemState

    def __post_init__(self):
        if not 0 <= self.n <= MAX_MODE:
            raise ValueError(f"mode index must lie in [0, {MAX_MODE}]")


def _require_same_grid(f, g):
    if f.grid != g.grid:
        raise GridError("fields live on different grids")


def hermite_function(n: int, xi) -> np.ndarray | float:
    """Normalized Hermite function h_n(xi), scalar or elementwise on arrays.

    Three-term recurrence with the Gaussian and normalization folded in:
    h_0 = pi^(-1/4) exp(-xi^2/2), h_1 = sqrt(2) xi h_0,
    h_{n+1} = xi sqrt(2/(n+1)) h_n - sqrt(n/(n+1)) h_{n-1}.
    """
    if not 0 <= n <= MAX_MODE:
        raise ValueError(f"mode index must lie in [0, {MAX_MODE}]")
    xi_arr = np.asarray(xi, dtype=float)
    h_prev = math.pi ** (-0.25) * np.exp(-0.5 * xi_arr**2)
    if n == 0:
        return h_prev if xi_arr.ndim else float(h_prev)
    h_cur = math.sqrt(2.0) * xi_arr * h_prev
    for k in range(1, n):
        h_next = xi_arr * math.sqrt(2.0 / (k + 1)) * h_cur \
            - math.sqrt(k / (k + 1)) * h_prev
        h_prev, h_cur = h_cur, h_next
    return h_cur if xi_arr.ndim else float(h_cur)


def phi_n(mode: ModeSpec, x) -> np.ndarray | float:
    """Real stationary profile sqrt(beta) h_n(beta*x + eps); unit L2 norm."""
    s = mode.state
    return math.sqrt(s.beta) * hermite_function(mode.n, s.beta * np.asarray(x, float) + s.epsilon)


def capital_psi_n(mode: ModeSpec, x) -> np.ndarray | complex:
    """Eigenfunction of the quadratic invariant at the mode's state.

    <Psi_m, Psi_n> = delta_mn / lambda; differs from psi_n by the
    accumulated phase exp(i(2n+1)*gamma).
    """
    s = mode.state
    x_arr = np.asarray(x, dtype=float)
    xi = s.beta * x_arr + s.epsilon
    phase = np.exp(1j * (s.alpha * x_arr**2 + s.delta * x_arr + s.kappa))
    values = phase * hermite_function(mode.n, xi) / math.sqrt(s.mu)
    return values if x_arr.ndim else complex(values)


def psi_n(mode: ModeSpec, x) -> np.ndarray | complex:
    """Exact oscillator wave function, capital Psi_n times exp(i(2n+1)gamma)."""
    s = mode.state
    rotation = complex(math.cos((2 * mode.n + 1) * s.gamma),
                       math.sin((2 * mode.n + 1) * s.gamma))
    return rotation * capital_psi_n(mode, x)


def psi_field(mode: ModeSpec, grid: Grid, kind: str = "psi") -> ComplexField:
    """Sample one of the mode functions on a grid.

    kind: 'psi' (solution), 'capital-psi' (invariant eigenfunction),
    'phi' (real stationary profile).
    """
    if kind == "psi":
        values = psi_n(mode, grid.x)
    elif kind == "capital-psi":
        values = capital_psi_n(mode, grid.x)
    elif kind == "phi":
        values = phi_n(mode, grid.x).astype(complex)
    else:
        raise ValueError(f"unknown field kind {kind!r}")
    return ComplexField(grid, values)


def inner_product(f: ComplexField, g: ComplexField) -> complex:
    """<f, g> = integral of conj(f)*g by composite Simpson on the shared grid."""
    _require_same_grid(f, g)
    w = f.grid.simpson_weights()
    return complex(np.sum(w * np.conj(f.values) * g.values))


def expansion_coefficients(initial: ComplexField, n_max: int,
                           state0: SystemState) -> list[complex]:
    """Projection coefficients c_0..c_n_max of `initial` on the mode basis.

    c_n = <psi_n(., t0), initial> / ||psi_n(., t0)||^2 with psi_n evaluated
    at `state0`.  The grid must contain the essential support of the
    highest mode and of the field itself.
    """
    if not 0 <= n_max <= MAX_MODE:
        raise ValueError(f"n_max must lie in [0, {MAX_MODE}]")
    grid = initial.grid
    edge_mode = psi_field(ModeSpec(n_max, state0), grid)
    for fld, label in ((edge_mode, "mode envelope"), (initial, "field")):
        boundary = max(abs(fld.values[0]), abs(fld.values[-1]))
        if boundary > 1e-10:
            raise GridError(
                f"grid too small: {label} reaches {boundary:.2e} at the boundary"
            )
    coeffs = []
    for n in range(n_max + 1):
        basis = psi_field(ModeSpec(n, state0), grid)
        coeffs.append(inner_product(basis, initial) / inner_product(basis, basis).real)
    return coeffs


def synthesize(coeffs, state: SystemState, grid: Grid) -> ComplexField:
    """Superpose invariant eigenfunctions: sum_n coeffs[n] * Psi_n(., state).

    Coefficients multiply the gamma-free eigenfunctions, so propagating a
    t0 expansion to time t means scaling c_n by exp(i(2n+1)*gamma(t)) first.
    """
    values = np.zeros(grid.n_points, dtype=complex)
    for n, c in enumerate(coeffs):
        if c != 0:
            values += c * capital_psi_n(ModeSpec(n, state), grid.x)
    return ComplexField(grid, values)


def suggest_grid(n_max: int, states, max_spacing: float | None = None) -> Grid:
    """Grid covering |beta*x + eps| <= sqrt(2 n_max + 1) + 8 for every state,
    with spacing at most 0.25 / max(beta) and an odd point count.

    `max_spacing` tightens the spacing cap; quadratures at the 1e-8 level
    with strongly chirped phases want h around 0.01.
    """
    states = list(states)
    if not states:
        raise ValueError("need at least one state")
    reach = math.sqrt(2.0 * n_max + 1.0) + 8.0
    x_min = min((-reach - s.epsilon) / s.beta for s in states)
    x_max = max((reach - s.epsilon) / s.beta for s in states)
    spacing = 0.25 / max(s.beta for s in states)
    if max_spacing is not None:
        spacing = min(spacing, max_spacing)
    n_points = int(math.ceil((x_max - x_min) / spacing)) + 1
    if n_points % 2 == 0:
        n_points += 1
    n_points = max(n_points, 17)
    return Grid(x_min, x_max, n_points)


def grid_with_spacing(x_min: float, x_max: float, spacing: float) -> Grid:
    """Odd-count grid with exactly the given spacing, covering [x_min, x_max].

    The range is widened symmetrically so the spacing comes out exact; handy
    when an accuracy budget is stated at a specific h.
    """
    n_intervals = int(math.ceil((x_max - x_min) / spacing - 1e-12))
    if n_intervals % 2 == 1:
        n_intervals += 1
    n_intervals = max(n_intervals, 16)
    center = 0.5 * (x_min + x_max)
    half_width = 0.5 * n_intervals * spacing
    return Grid(center - half_width, center + half_width, n_intervals + 1)


def field_to_csv(field: ComplexField, path) -> None:
    """Write the field as `x,re,im` rows with 17 significant digits."""
    x = field.grid.x
    with open(path, "w", newline="") as fh:
        fh.write("x,re,im\n")
        for xv, v in zip(x, field.values):
            fh.write(f"{xv:.17g},{v.real:.17g},{v.imag:.17g}\n")


def field_to_json(field: ComplexField, path) -> None:
    """JSON variant of the field export, carrying the grid metadata."""
    payload = {
        "grid": {
            "x_min": field.grid.x_min,
            "x_max": field.grid.x_max,
            "n_points": field.grid.n_points,
        },
        "re": [float(v.real) for v in field.values],
        "im": [float(v.imag) for v in field.values],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")
