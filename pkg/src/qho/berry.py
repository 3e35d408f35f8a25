"""Lewis (dynamical) phase and Berry phase accumulation along trajectories.

Two independent rate formulas are provided: the direct one, built from the
exact time derivatives of (alpha, delta, kappa), and the alternative one,
built from the Hamiltonian expectation in trajectory variables.  They agree
identically on oscillator-type (c0 = 1) trajectories, so their numerical gap
measures trajectory error and transcription mistakes, nothing else.  A third,
reduced formula applies in the undriven self-adjoint gauge (c = 2d,
f = g = 0, delta = eps = kappa = 0) and is expressed through mu and its
first two derivatives.

Phase rates are always evaluated from exact right-hand sides at
interpolated states, never from finite differences of the trajectory, and
phases are reported unwrapped with theta(t0) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ermakov import StateDerivative, SystemState, Trajectory, system_rhs
from .expressions import CoefficientSet

__all__ = [
    "PhaseRecord",
    "PreconditionError",
    "QuadratureError",
    "METHODS",
    "lewis_phase",
    "berry_rate_direct",
    "berry_rate_alternative",
    "berry_rate_reduced",
    "accumulate",
    "phase_record_to_csv",
]

METHODS = ("direct", "alternative", "reduced")


class PreconditionError(ValueError):
    """A phase formula was invoked outside its domain of validity."""


class QuadratureError(RuntimeError):
    """Adaptive Simpson refinement failed to converge on an interval."""

    def __init__(self, t0, t1):
        super().__init__(f"phase quadrature did not converge on [{t0:.6g}, {t1:.6g}]")
        self.interval = (t0, t1)


@dataclass
class PhaseRecord:
    """Accumulated phases over the trajectory's accepted nodes.

    Arrays share the length of `times`; every phase starts at 0.  Columns
    for methods that were not requested stay None.
    """

    n: int
    times: np.ndarray
    lewis: np.ndarray
    berry_direct: np.ndarray | None = None
    berry_alt: np.ndarray | None = None
    berry_reduced: np.ndarray | None = None

    def column(self, method):
        return {
            "direct": self.berry_direct,
            "alternative": self.berry_alt,
            "reduced": self.berry_reduced,
        }[method]


def lewis_phase(n: int, traj: Trajectory, t: float) -> float:
    """Dynamical phase -(2n+1) * (gamma(t) - gamma(t0))."""
    gamma0 = traj.state(traj.t0).gamma
    return -(2 * n + 1) * (traj.state(t).gamma - gamma0)


def berry_rate_direct(n: int, s: SystemState, ds: StateDerivative) -> float:
    """d(theta_n)/dt from the exact derivatives of alpha, delta, kappa:
    -beta^-2 (eps^2 + n + 1/2) alpha' + eps beta^-1 delta' - kappa'."""
    return (
        -(s.epsilon**2 + n + 0.5) / s.beta**2 * ds.alpha
        + s.epsilon / s.beta * ds.delta
        - ds.kappa
    )


def berry_rate_alternative(n: int, s: SystemState, coeffs: CoefficientSet,
                           t: float) -> float:
    """d(theta_n)/dt in Hamiltonian-expectation form; valid on c0 = 1
    trajectories, where it coincides with the direct formula."""
    a, b, c, _d, f, g = coeffs.values(t)
    al, be, de, ep = s.alpha, s.beta, s.delta, s.epsilon
    shifted = de - 2.0 * al * ep / be
    return (
        (n + 0.5) * (a * (4.0 * al**2 / be**2 - be**2) + (b + 2.0 * c * al) / be**2)
        + a * shifted**2
        + (ep / be) * (f + b * ep / be)
        - shifted * (g + c * ep / be)
    )


def berry_rate_reduced(n: int, s: SystemState, coeffs: CoefficientSet,
                       t: float, c0: int = 1) -> float:
    """Reduced rate -(n+1/2)/(4a) [mu'' mu - mu'^2 - (a'/a) mu' mu
    + (2 d a'/a - 2 d') mu^2] for the undriven self-adjoint gauge.

    Preconditions, checked numerically at t to 1e-12: c - 2d = f = g = 0
    and delta = eps = kappa = 0 on the trajectory.
    """
    a, b, c, d, f, g = coeffs.values(t)
    for label, value in (("c - 2*d", c - 2.0 * d), ("f", f), ("g", g)):
        if abs(value) > 1e-12:
            raise PreconditionError(
                f"reduced phase formula requires {label} = 0, got {value:.3e} at t={t:.6g}"
            )
    for label, value in (("delta", s.delta), ("epsilon", s.epsilon), ("kappa", s.kappa)):
        if abs(value) > 1e-12:
            raise PreconditionError(
                f"reduced phase formula requires {label} = 0 on the trajectory, "
                f"got {value:.3e} at t={t:.6g}"
            )
    da = coeffs.da.eval(t)
    dd = coeffs.dd.eval(t)
    mu = s.mu
    m = 4.0 * a * s.alpha + 2.0 * d
    alpha_p = -b - 2.0 * c * s.alpha - 4.0 * a * s.alpha**2 + c0 * a * s.beta**4
    mu_p = mu * m
    mu_pp = mu * (m * m + 4.0 * da * s.alpha + 4.0 * a * alpha_p + 2.0 * dd)
    bracket = (
        mu_pp * mu - mu_p**2 - (da / a) * mu_p * mu
        + (2.0 * d * da / a - 2.0 * dd) * mu**2
    )
    return -(n + 0.5) / (4.0 * a) * bracket


def _rate_function(method, n, traj):
    if method == "direct":
        def rate(t):
            s = traj.state(t)
            return berry_rate_direct(n, s, system_rhs(s, traj.coeffs, traj.c0))
    elif method == "alternative":
        def rate(t):
            return berry_rate_alternative(n, traj.state(t), traj.coeffs, t)
    elif method == "reduced":
        def rate(t):
            return berry_rate_reduced(n, traj.state(t), traj.coeffs, t, traj.c0)
    else:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    return rate


def _adaptive_simpson(fun, a, b, tol, max_depth=40):
    fa, fm, fb = fun(a), fun(0.5 * (a + b)), fun(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_refine(fun, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_refine(fun, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = fun(lm), fun(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    if depth <= 0:
        raise QuadratureError(a, b)
    half = 0.5 * tol
    return (
        _simpson_refine(fun, a, m, fa, flm, fm, left, half, depth - 1)
        + _simpson_refine(fun, m, b, fm, frm, fb, right, half, depth - 1)
    )


def accumulate(n: int, traj: Trajectory, methods=("direct", "alternative"),
               quad_tol: float = 1e-10) -> PhaseRecord:
    """Integrate the requested Berry rates over the trajectory.

    Each interval between accepted nodes is integrated by adaptive Simpson
    with an error budget proportional to its share of the span; the Lewis
    phase comes directly from gamma.  Returns one column per method plus
    the Lewis column, all starting at 0.
    """
    if isinstance(methods, str):
        methods = (methods,)
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    times = traj.ts.copy()
    span = times[-1] - times[0]
    gamma = traj.ys[:, 2]
    lewis = -(2 * n + 1) * (gamma - gamma[0]) + 0.0  # +0.0 clears negative zeros

    columns = {}
    for method in methods:
        rate = _rate_function(method, n, traj)
        phases = np.zeros(len(times))
        total = 0.0
        for i in range(len(times) - 1):
            t0, t1 = times[i], times[i + 1]
            tol = quad_tol * max((t1 - t0) / span, 1e-3)
            total += _adaptive_simpson(rate, t0, t1, tol)
            phases[i + 1] = total
        columns[method] = phases

    return PhaseRecord(
        n=n,
        times=times,
        lewis=lewis,
        berry_direct=columns.get("direct"),
        berry_alt=columns.get("alternative"),
        berry_reduced=columns.get("reduced"),
    )


def phase_record_to_csv(record: PhaseRecord, path, extra=None) -> None:
    """Write `t,lewis[,berry_direct][,berry_alt][,berry_reduced]` rows.

    `extra` maps additional column names to arrays (the CLI appends the
    direct/alternative consistency gap this way).
    """
    headers = ["t", "lewis"]
    cols = [record.times, record.lewis]
    for name, col in (("berry_direct", record.berry_direct),
                      ("berry_alt", record.berry_alt),
                      ("berry_reduced", record.berry_reduced)):
        if col is not None:
            headers.append(name)
            cols.append(col)
    for name, col in (extra or {}).items():
        headers.append(name)
        cols.append(col)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(headers) + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
