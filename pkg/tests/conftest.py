"""Shared fixtures: preset trajectories and reference integrators.

The RK4 + Richardson reference integrator lives here so tests can measure
trajectory accuracy against a method that shares nothing with the adaptive
embedded pair used by the package.
"""

import numpy as np
import pytest

from qho import SolverConfig, integrate, preset_coefficients


def rk4_endpoint(coeffs, c0, y0, t0, t1, n_steps):
    """Classical fixed-step RK4 on the same right-hand-side formulas."""

    def rhs(t, y):
        a, b, c, d, f, g = coeffs.values(t)
        alpha, beta, _gamma, delta, eps, _kappa = y[0], y[1], y[2], y[3], y[4], y[5]
        shear = c + 4 * a * alpha
        return np.array([
            -b - 2 * c * alpha - 4 * a * alpha**2 + c0 * a * beta**4,
            -shear * beta,
            -a * beta**2,
            -shear * delta + f + 2 * g * alpha + 2 * c0 * a * beta**3 * eps,
            (g - 2 * a * delta) * beta,
            g * delta - a * delta**2 + c0 * a * beta**2 * eps**2,
            4 * a * alpha + 2 * d,
            -(c - 2 * d),
        ])

    h = (t1 - t0) / n_steps
    y = np.array(y0, dtype=float)
    t = t0
    for _ in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def rk4_richardson(coeffs, c0, y0, t0, t1, tol=1e-10):
    """Step-halving RK4 with Richardson extrapolation to agreement `tol`."""
    n = 256
    prev = rk4_endpoint(coeffs, c0, y0, t0, t1, n)
    prev_extrap = None
    while n < 1 << 20:
        n *= 2
        cur = rk4_endpoint(coeffs, c0, y0, t0, t1, n)
        extrap = cur + (cur - prev) / 15.0
        if prev_extrap is not None and np.max(np.abs(extrap - prev_extrap)) < tol:
            return extrap
        prev, prev_extrap = cur, extrap
    raise RuntimeError("reference integrator did not converge")


def _preset_trajectory(name, t_end=5.0):
    coeffs, c0 = preset_coefficients(name)
    traj = integrate(coeffs, SolverConfig(c0=c0), t_end)
    return coeffs, c0, traj


@pytest.fixture(scope="session")
def sho_run():
    return _preset_trajectory("sho")


@pytest.fixture(scope="session")
def free_run():
    return _preset_trajectory("free")


@pytest.fixture(scope="session")
def ck_run():
    return _preset_trajectory("caldirola-kanai")


@pytest.fixture(scope="session")
def driven_run():
    return _preset_trajectory("driven-sho")


@pytest.fixture(scope="session")
def all_runs(sho_run, free_run, ck_run, driven_run):
    return {
        "sho": sho_run,
        "free": free_run,
        "caldirola-kanai": ck_run,
        "driven-sho": driven_run,
    }


@pytest.fixture(scope="session")
def oscillator_runs(sho_run, ck_run, driven_run):
    """The c0 = 1 presets, the ones carrying Hermite mode functions."""
    return {
        "sho": sho_run,
        "caldirola-kanai": ck_run,
        "driven-sho": driven_run,
    }
