"""Coupled Riccati/Ermakov trajectory integration.

The oscillator transforms are carried by six functions of time
(alpha, beta, gamma, delta, epsilon, kappa) obeying a first-order system,
plus two auxiliary accumulators integrated in log form: ln(mu) with
(ln mu)' = 4*a*alpha + 2*d, and ln(lambda) with (ln lambda)' = -(c - 2*d).
Keeping the logs makes the conserved product beta*mu = lambda well
conditioned even when mu grows exponentially.

Integration uses an embedded Dormand-Prince 5(4) pair with PI step-size
control and stores the derivative at every accepted node, so dense output
is a cubic Hermite interpolant that matches states and slopes exactly at
the nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expressions import CoefficientSet, DomainError

__all__ = [
    "SystemState",
    "StateDerivative",
    "SolverConfig",
    "Trajectory",
    "IntegrationError",
    "CausticError",
    "StepSizeError",
    "system_rhs",
    "integrate",
    "char_residual",
    "default_initial_state",
    "trajectory_to_csv",
]


class IntegrationError(RuntimeError):
    """Base class for trajectory integration failures."""


class CausticError(IntegrationError):
    """The Riccati solution blew up (beta below 1e-10 or |alpha| above 1e12)."""

    def __init__(self, t, alpha, beta):
        super().__init__(
            f"caustic at t={t:.6g}: alpha={alpha:.3e}, beta={beta:.3e}"
        )
        self.t = t


class StepSizeError(IntegrationError):
    """The controller drove the step size below the resolvable limit."""

    def __init__(self, t, h):
        super().__init__(f"step size underflow at t={t:.6g} (h={h:.3e})")
        self.t = t


@dataclass(frozen=True)
class SystemState:
    """State of the transform system at one instant.

    `ln_mu` and `ln_lambda` hold the logarithms of the envelope norm mu and
    of the weight lambda; `mu` and `lam` expose the exponentiated values.
    """

    t: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float
    kappa: float
    ln_mu: float
    ln_lambda: float

    @property
    def mu(self):
        return math.exp(self.ln_mu)

    @property
    def lam(self):
        return math.exp(self.ln_lambda)

    def as_array(self):
        return np.array(
            [self.alpha, self.beta, self.gamma, self.delta,
             self.epsilon, self.kappa, self.ln_mu, self.ln_lambda]
        )

    @classmethod
    def from_array(cls, t, y):
        return cls(t, *(float(v) for v in y))


@dataclass(frozen=True)
class StateDerivative:
    """Time derivative of every SystemState component."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float
    kappa: float
    ln_mu: float
    ln_lambda: float

    @classmethod
    def from_array(cls, dy):
        return cls(*(float(v) for v in dy))


def default_initial_state(t0=0.0) -> SystemState:
    """Canonical initial data (0, 1, 0, 0, 0, 0) with mu = lambda = 1.

    Satisfies beta(0)*mu(0) = 1, the normalization under which
    beta*mu = lambda holds along the flow.
    """
    return SystemState(t0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass
class SolverConfig:
    c0: int
    initial: SystemState = field(default_factory=default_initial_state)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.05

    def __post_init__(self):
        if self.c0 not in (0, 1):
            raise ValueError("c0 must be 0 or 1")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.initial.beta <= 0:
            raise ValueError("initial beta must be positive")
        gap = self.initial.ln_mu + math.log(self.initial.beta) - self.initial.ln_lambda
        if abs(gap) > 1e-9:
            raise ValueError(
                "initial state violates beta*mu = lambda "
                f"(log gap {gap:.3e}); set lambda = beta*mu"
            )


def _rhs(t, y, coeffs, c0):
    """Right-hand side on the raw component array."""
    a, b, c, d, f, g = coeffs.values(t)
    alpha, beta, _gamma, delta, epsilon, _kappa = y[0], y[1], y[2], y[3], y[4], y[5]
    shear = c + 4.0 * a * alpha
    dy = np.empty(8)
    dy[0] = -b - 2.0 * c * alpha - 4.0 * a * alpha * alpha + c0 * a * beta**4
    dy[1] = -shear * beta
    dy[2] = -a * beta * beta
    dy[3] = -shear * delta + f + 2.0 * g * alpha + 2.0 * c0 * a * beta**3 * epsilon
    dy[4] = (g - 2.0 * a * delta) * beta
    dy[5] = g * delta - a * delta * delta + c0 * a * beta * beta * epsilon * epsilon
    dy[6] = 4.0 * a * alpha + 2.0 * d
    dy[7] = -(c - 2.0 * d)
    return dy


def system_rhs(state: SystemState, coeffs: CoefficientSet, c0: int) -> StateDerivative:
    """Exact time derivatives of the transform system at `state`."""
    return StateDerivative.from_array(_rhs(state.t, state.as_array(), coeffs, c0))


# Dormand-Prince 5(4) tableau (FSAL: the 7th stage is the derivative at the
# accepted point and seeds the next step).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_BETA_MAX = 1e-10
_ALPHA_MAX = 1e12
_SAFETY = 0.9
_PI_BETA = 0.04
_PI_EXPONENT = 0.2 - 0.75 * _PI_BETA
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


class Trajectory:
    """Dense, immutable record of one integration run.

    Samples hold state and exact derivative at every accepted step;
    evaluation between nodes is cubic Hermite, which reproduces the stored
    values and slopes at the nodes exactly.
    """

    def __init__(self, ts, ys, fs, coeffs, c0):
        self.ts = np.asarray(ts)
        self.ys = np.asarray(ys)
        self.fs = np.asarray(fs)
        self.coeffs = coeffs
        self.c0 = c0
        if not np.all(np.diff(self.ts) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def t0(self):
        return float(self.ts[0])

    @property
    def t1(self):
        return float(self.ts[-1])

    def __len__(self):
        return len(self.ts)

    def _interp(self, t):
        ts = self.ts
        if t < ts[0] or t > ts[-1]:
            slack = 1e-12 * max(1.0, abs(ts[-1] - ts[0]))
            if t < ts[0] - slack or t > ts[-1] + slack:
                raise ValueError(
                    f"t={t!r} outside trajectory span [{ts[0]!r}, {ts[-1]!r}]"
                )
            t = min(max(t, ts[0]), ts[-1])
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        h = ts[i + 1] - ts[i]
        s = (t - ts[i]) / h
        y0, y1 = self.ys[i], self.ys[i + 1]
        f0, f1 = self.fs[i], self.fs[i + 1]
        s2, s3 = s * s, s * s * s
        return (
            (2 * s3 - 3 * s2 + 1) * y0
            + (s3 - 2 * s2 + s) * h * f0
            + (-2 * s3 + 3 * s2) * y1
            + (s3 - s2) * h * f1
        )

    def state(self, t) -> SystemState:
        return SystemState.from_array(float(t), self._interp(float(t)))

    def derivative(self, t) -> StateDerivative:
        """Exact system right-hand side evaluated at the interpolated state."""
        return system_rhs(self.state(t), self.coeffs, self.c0)

    @property
    def end_state(self) -> SystemState:
        return SystemState.from_array(float(self.ts[-1]), self.ys[-1])

    def states(self):
        return [SystemState.from_array(float(t), y) for t, y in zip(self.ts, self.ys)]

    def beta_mu_lambda_gap(self):
        """Max relative violation of beta*mu = lambda over the sample nodes."""
        log_gap = self.ys[:, 6] + np.log(self.ys[:, 1]) - self.ys[:, 7]
        return float(np.max(np.abs(np.expm1(log_gap))))


def _initial_step(t0, y0, f0, coeffs, c0, rel_tol, abs_tol, max_step, span):
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, 0.1 * span, max_step)
    f1 = _rhs(t0 + h0, y0 + h0 * f0, coeffs, c0)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step, span)


def integrate(coeffs: CoefficientSet, config: SolverConfig, t_end: float) -> Trajectory:
    """Integrate the transform system from `config.initial.t` to `t_end`.

    Adaptive embedded Runge-Kutta 5(4); the local error of each step is kept
    below abs_tol + rel_tol*|state| componentwise (RMS norm).  Raises
    CausticError when beta collapses or alpha blows up, StepSizeError when
    the controller underflows.
    """
    if t_end <= config.initial.t:
        raise ValueError("t_end must exceed the initial time")
    c0 = config.c0
    t = config.initial.t
    y = config.initial.as_array()
    f = _rhs(t, y, coeffs, c0)
    span = t_end - t

    ts, ys, fs = [t], [y.copy()], [f.copy()]

    h = _initial_step(t, y, f, coeffs, c0, config.rel_tol, config.abs_tol,
                      config.max_step, span)
    err_old = 1e-4
    k = np.empty((7, 8))
    n_steps = 0
    while t < t_end:
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeError(t, h)
        h = min(h, t_end - t, config.max_step)
        k[0] = f
        for i in range(1, 7):
            yi = y + h * (_A[i] @ k[:i])
            k[i] = _rhs(t + _C[i] * h, yi, coeffs, c0)
        y_new = y + h * (_A[6] @ k[:6])
        # FSAL: stage 7 was evaluated at (t+h, y_new) already
        f_new = k[6]
        err_vec = h * (_E @ k)
        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))

        if err <= 1.0:
            t += h
            y = y_new
            f = f_new
            ts.append(t)
            ys.append(y.copy())
            fs.append(f.copy())
            if y[1] < _BETA_MAX or abs(y[0]) > _ALPHA_MAX:
                raise CausticError(t, y[0], y[1])
            fac = (err ** _PI_EXPONENT) / (err_old ** _PI_BETA) if err > 0 else 0.0
            fac = max(1.0 / _MAX_FACTOR, min(1.0 / _MIN_FACTOR, fac / _SAFETY))
            h = h / fac
            err_old = max(err, 1e-4)
        else:
            h = h / min(1.0 / _MIN_FACTOR, (err ** _PI_EXPONENT) / _SAFETY)
        n_steps += 1
        if n_steps > 10_000_000:
            raise StepSizeError(t, h)

    return Trajectory(np.array(ts), np.array(ys), np.array(fs), coeffs, c0)


def char_residual(traj: Trajectory, coeffs: CoefficientSet, t: float) -> float:
    """Defect of the second-order characteristic equation for mu at time t.

    mu' is reconstructed from the state as mu*(4*a*alpha + 2*d) and mu'' by
    the product rule using the exact alpha' and the symbolic a', d'.  The
    returned value is |mu'' - tau*mu' + 4*sigma*mu - c0*(2a)^2*beta^4*mu|
    with tau = a'/a - 2c + 4d and sigma written in the division-free form
    a*b - c*d + d^2 + d*a'/(2a) - d'/2, valid at d = 0.
    """
    s = traj.state(t)
    a, b, c, d, _f, _g = coeffs.values(t)
    if a == 0.0:
        raise DomainError("characteristic coefficients divide by a", coeffs.a, t)
    da = coeffs.da.eval(t)
    dd = coeffs.dd.eval(t)
    ds = system_rhs(s, coeffs, traj.c0)

    mu = s.mu
    m = 4.0 * a * s.alpha + 2.0 * d
    mu_p = mu * m
    mu_pp = mu * (m * m + 4.0 * da * s.alpha + 4.0 * a * ds.alpha + 2.0 * dd)

    tau = da / a - 2.0 * c + 4.0 * d
    sigma = a * b - c * d + d * d + d * da / (2.0 * a) - dd / 2.0
    forcing = traj.c0 * (2.0 * a) ** 2 * s.beta**4 * mu
    return abs(mu_pp - tau * mu_p + 4.0 * sigma * mu - forcing)


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write accepted steps as CSV with 17 significant digits.

    Columns: t,alpha,beta,gamma,delta,epsilon,kappa,mu,lambda
    """
    with open(path, "w", newline="") as fh:
        fh.write("t,alpha,beta,gamma,delta,epsilon,kappa,mu,lambda\n")
        for t, y in zip(traj.ts, traj.ys):
            row = [t, y[0], y[1], y[2], y[3], y[4], y[5],
                   math.exp(y[6]), math.exp(y[7])]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
