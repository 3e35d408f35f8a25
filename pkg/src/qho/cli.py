"""Batch front door: qho <solve|berry|verify|wavefunction|pde-verify|algebra-check>.

Runs are described by a JSON config (machine-writable for sweeps) or a named
preset; outputs are CSV/JSON files plus a JSON summary on stdout.  Exit codes:
0 success, 2 configuration error, 3 caustic, 4 numerical failure,
5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import berry, ermakov, invariant, pde
from .expressions import CoefficientSet, DomainError, ExprError
from .hermite import (
    ComplexField,
    Grid,
    ModeSpec,
    field_to_csv,
    field_to_json,
    grid_with_spacing,
    inner_product,
    psi_field,
    suggest_grid,
)
from .presets import PRESETS, preset_names

__all__ = ["main", "RunConfig", "ConfigError"]

_COEFF_NAMES = ("a", "b", "c", "d", "f", "g")
_DEFAULT_INITIAL = (0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0)

EXIT_CONFIG = 2
EXIT_CAUSTIC = 3
EXIT_NUMERICAL = 4
EXIT_VERIFY = 5


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    """Validated inputs of one CLI run."""

    coefficients: CoefficientSet
    c0: int
    initial: ermakov.SystemState
    t_span: tuple[float, float]
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.05
    grid: Grid | None = None
    dt: float = 1e-4
    modes: tuple[int, ...] = (0,)
    out: str | None = None
    format: str = "csv"
    raw: dict = field(default_factory=dict)

    def solver_config(self) -> ermakov.SolverConfig:
        return ermakov.SolverConfig(
            c0=self.c0,
            initial=self.initial,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_step=self.max_step,
        )


def _build_initial(values, t0):
    if len(values) != 8:
        raise ConfigError(
            "initial must list eight reals: alpha,beta,gamma,delta,epsilon,kappa,mu,lambda"
        )
    alpha, beta, gamma, delta, epsilon, kappa, mu, lam = map(float, values)
    if beta <= 0:
        raise ConfigError("initial beta must be positive")
    if mu <= 0 or lam <= 0:
        raise ConfigError("initial mu and lambda must be positive")
    if abs(beta * mu - 1.0) > 1e-9:
        raise ConfigError(
            f"initial data must satisfy beta*mu = 1, got {beta * mu!r}"
        )
    if abs(lam - beta * mu) > 1e-9:
        raise ConfigError("initial lambda must equal beta*mu")
    return ermakov.SystemState(
        t0, alpha, beta, gamma, delta, epsilon, kappa, math.log(mu), math.log(lam)
    )


def load_config(path: str | None, preset: str | None) -> RunConfig:
    """Assemble a RunConfig from a JSON file and/or a preset name.

    A preset supplies coefficients and c0; every other key keeps its
    default unless the config file overrides it.
    """
    data: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")

    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {', '.join(preset_names())}"
            )
        data = {**data, **PRESETS[preset]}

    if "coefficients" not in data:
        raise ConfigError("missing coefficients (or use --preset)")
    coeff_spec = data["coefficients"]
    if not isinstance(coeff_spec, dict) or set(coeff_spec) - set(_COEFF_NAMES):
        raise ConfigError("coefficients must map the names a,b,c,d,f,g to strings")
    try:
        coefficients = CoefficientSet.from_strings(
            **{name: str(coeff_spec.get(name, "0")) for name in _COEFF_NAMES}
        )
    except ExprError as exc:
        raise ConfigError(f"bad coefficient expression: {exc}") from None

    c0 = data.get("c0", 1)
    if c0 not in (0, 1):
        raise ConfigError("c0 must be 0 or 1")

    t_span = data.get("t_span", [0.0, 5.0])
    if len(t_span) != 2 or not t_span[1] > t_span[0]:
        raise ConfigError("t_span must be [t0, t1] with t1 > t0")
    t0, t1 = float(t_span[0]), float(t_span[1])

    initial = _build_initial(data.get("initial", _DEFAULT_INITIAL), t0)

    try:
        a0 = coefficients.a.eval(t0)
    except ExprError as exc:
        raise ConfigError(f"cannot evaluate a(t0): {exc}") from None
    if a0 == 0.0:
        raise ConfigError(
            "a(t0) = 0: the transform recovers alpha by dividing by a(t), "
            "so a must be nonzero on the integration span"
        )

    grid = None
    if "grid" in data:
        g = data["grid"]
        try:
            grid = Grid(float(g["x_min"]), float(g["x_max"]), int(g["n_points"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad grid override: {exc}") from None

    modes = tuple(int(n) for n in data.get("modes", [0]))
    for n in modes:
        if not 0 <= n <= 60:
            raise ConfigError("mode indices must lie in [0, 60]")

    cfg = RunConfig(
        coefficients=coefficients,
        c0=c0,
        initial=initial,
        t_span=(t0, t1),
        rel_tol=float(data.get("rel_tol", 1e-10)),
        abs_tol=float(data.get("abs_tol", 1e-12)),
        max_step=float(data.get("max_step", 0.05)),
        grid=grid,
        dt=float(data.get("dt", 1e-4)),
        modes=modes,
        out=data.get("out"),
        format=data.get("format", "csv"),
        raw=data,
    )
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")
    if cfg.rel_tol <= 0 or cfg.abs_tol <= 0 or cfg.max_step <= 0 or cfg.dt <= 0:
        raise ConfigError("tolerances, max_step and dt must be positive")
    return cfg


def _integrate(cfg: RunConfig) -> ermakov.Trajectory:
    return ermakov.integrate(cfg.coefficients, cfg.solver_config(), cfg.t_span[1])


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _state_dict(s: ermakov.SystemState) -> dict:
    return {
        "t": s.t, "alpha": s.alpha, "beta": s.beta, "gamma": s.gamma,
        "delta": s.delta, "epsilon": s.epsilon, "kappa": s.kappa,
        "mu": s.mu, "lambda": s.lam,
    }


def _default_grid(cfg: RunConfig, traj, n_max, spacing=0.01) -> Grid:
    if cfg.grid is not None:
        return cfg.grid
    states = [traj.state(float(t)) for t in np.linspace(traj.t0, traj.t1, 17)]
    base = suggest_grid(n_max, states)
    return grid_with_spacing(base.x_min, base.x_max, spacing)


def _trajectory_to_json(traj, path):
    columns = ["t", "alpha", "beta", "gamma", "delta", "epsilon", "kappa"]
    payload = {name: [float(v) for v in col]
               for name, col in zip(columns[1:], traj.ys[:, :6].T)}
    payload["t"] = [float(v) for v in traj.ts]
    payload["mu"] = [float(math.exp(v)) for v in traj.ys[:, 6]]
    payload["lambda"] = [float(math.exp(v)) for v in traj.ys[:, 7]]
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def cmd_solve(args, cfg: RunConfig) -> int:
    traj = _integrate(cfg)
    out = args.out or cfg.out or "trajectory." + cfg.format
    if cfg.format == "json":
        _trajectory_to_json(traj, out)
    else:
        ermakov.trajectory_to_csv(traj, out)
    sample_ts = np.linspace(traj.t0, traj.t1, 100)
    residual = max(
        ermakov.char_residual(traj, cfg.coefficients, float(t)) for t in sample_ts
    )
    _emit({
        "end_state": _state_dict(traj.end_state),
        "max_char_residual": float(residual),
        "max_beta_mu_lambda_gap": traj.beta_mu_lambda_gap(),
        "out": out,
    })
    return 0


def cmd_berry(args, cfg: RunConfig) -> int:
    methods = tuple(args.methods.split(","))
    traj = _integrate(cfg)
    summary = {}
    stem = args.out or cfg.out or "berry.csv"
    for n in cfg.modes:
        record = berry.accumulate(n, traj, methods)
        extra = {}
        if record.berry_direct is not None and record.berry_alt is not None:
            extra["consistency_gap"] = np.abs(record.berry_direct - record.berry_alt)
        path = stem if len(cfg.modes) == 1 else _suffixed(stem, f"_n{n}")
        berry.phase_record_to_csv(record, path, extra=extra)
        entry = {"lewis": float(record.lewis[-1]), "out": path}
        for method in methods:
            entry[f"theta_{method}"] = float(record.column(method)[-1])
        if "consistency_gap" in extra:
            entry["max_consistency_gap"] = float(np.max(extra["consistency_gap"]))
        summary[str(n)] = entry
    _emit(summary)
    return 0


def _suffixed(path: str, suffix: str) -> str:
    root, dot, ext = path.rpartition(".")
    return f"{root}{suffix}.{ext}" if dot else f"{path}{suffix}"


def cmd_wavefunction(args, cfg: RunConfig) -> int:
    traj = _integrate(cfg)
    t = traj.t1 if args.time is None else float(args.time)
    state = traj.state(t)
    grid = _default_grid(cfg, traj, max(cfg.modes))
    stem = args.out or cfg.out or ("wavefunction." + cfg.format)
    written = {}
    for n in cfg.modes:
        fld = psi_field(ModeSpec(n, state), grid, args.kind)
        path = stem if len(cfg.modes) == 1 else _suffixed(stem, f"_n{n}")
        if cfg.format == "json":
            field_to_json(fld, path)
        else:
            field_to_csv(fld, path)
        written[str(n)] = path
    _emit({"t": t, "kind": args.kind, "out": written})
    return 0


def cmd_pde_verify(args, cfg: RunConfig) -> int:
    traj = _integrate(cfg)
    grid = _default_grid(cfg, traj, max(cfg.modes))
    pcfg = pde.PropagatorConfig(grid, cfg.dt)
    report = {}
    worst = 0.0
    for n in cfg.modes:
        residual = pde.residual_check(n, traj, pcfg)
        worst = max(worst, residual)
        report[str(n)] = residual
    passed = worst <= args.tol
    _emit({"residuals": report, "tolerance": args.tol, "pass": passed})
    return 0 if passed else EXIT_VERIFY


def cmd_algebra_check(args, cfg_unused) -> int:
    fock = invariant.su11_generators(args.dim)
    c_plus = fock.jzero @ fock.jplus - fock.jplus @ fock.jzero - fock.jplus
    c_minus = fock.jzero @ fock.jminus - fock.jminus @ fock.jzero + fock.jminus
    c_pm = fock.jplus @ fock.jminus - fock.jminus @ fock.jplus + 2.0 * fock.jzero
    number = fock.adag @ fock.a
    report = {
        "dim": args.dim,
        "commutator_j0_jplus": float(np.max(np.abs(fock.interior(c_plus)))),
        "commutator_j0_jminus": float(np.max(np.abs(fock.interior(c_minus)))),
        "commutator_jplus_jminus": float(np.max(np.abs(fock.interior(c_pm)))),
        "adjoint_gap": float(np.max(np.abs(fock.adag - fock.a.conj().T))),
        "number_diagonal_gap": float(
            np.max(np.abs(np.diag(number) - np.arange(args.dim)))
        ),
        "tolerance": args.tol,
    }
    passed = all(
        report[k] <= args.tol
        for k in report
        if k.startswith(("commutator", "adjoint", "number"))
    )
    report["pass"] = passed
    _emit(report)
    return 0 if passed else EXIT_VERIFY


def _verify_suites(cfg: RunConfig, rng: np.random.RandomState):
    """Yield (suite, measured, tolerance, skipped) for the verification run."""
    traj = _integrate(cfg)
    t0, t1 = traj.t0, traj.t1
    times = np.sort(rng.uniform(t0, t1, 20))
    grid = _default_grid(cfg, traj, 22)

    # quadratic-invariant spectrum: lambda^-1 <Psi_n, E Psi_n> = n + 1/2
    worst = 0.0
    for t in times[::4]:
        s = traj.state(float(t))
        for n in range(0, 9, 2):
            fld = psi_field(ModeSpec(n, s), grid, "capital-psi")
            val = invariant.expectation_invariant(fld, s) / s.lam
            worst = max(worst, abs(val - (n + 0.5)))
    yield "invariant-spectrum", worst, 1e-5, False

    # ladder actions and commutator
    s = traj.state(float(times[len(times) // 2]))
    fields = [psi_field(ModeSpec(n, s), grid, "capital-psi") for n in range(7)]
    worst = 0.0
    for n in range(1, 6):
        low = invariant.apply_annihilation(fields[n], s)
        up = invariant.apply_creation(fields[n], s)
        d1 = low - fields[n - 1] * math.sqrt(n)
        d2 = up - fields[n + 1] * math.sqrt(n + 1)
        worst = max(worst,
                    math.sqrt(inner_product(d1, d1).real),
                    math.sqrt(inner_product(d2, d2).real))
    probe = ComplexField(grid, np.exp(-0.5 * (grid.x - 0.2) ** 2 + 0.3j * grid.x))
    comm = (invariant.apply_annihilation(invariant.apply_creation(probe, s), s)
            - invariant.apply_creation(invariant.apply_annihilation(probe, s), s))
    gap = comm - probe
    worst = max(worst, math.sqrt(inner_product(gap, gap).real))
    yield "ladder-actions", worst, 1e-4, False

    # moment identities of the real profiles
    worst = 0.0
    xi = np.linspace(-14.0, 14.0, 2801)
    w = np.full(xi.size, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= (xi[1] - xi[0]) / 3.0
    from .hermite import hermite_function

    for n in range(0, 21, 5):
        hn2 = hermite_function(n, xi) ** 2
        worst = max(worst, abs(float(np.sum(w * xi * hn2))))
        worst = max(worst, abs(float(np.sum(w * xi * xi * hn2)) - (n + 0.5)))
    yield "moment-identities", worst, 1e-8, False

    # orthonormality of invariant eigenfunctions
    s = traj.state(float(times[3]))
    fields = [psi_field(ModeSpec(n, s), grid, "capital-psi") for n in range(11)]
    gram = np.array([[inner_product(fm, fn) for fn in fields] for fm in fields])
    worst = float(np.max(np.abs(s.lam * gram - np.eye(11))))
    yield "orthonormality", worst, 1e-8, False

    if cfg.c0 == 1:
        # short propagation against the analytic mode
        pcfg = pde.PropagatorConfig(grid, min(cfg.dt, 0.5 * grid.h**2))
        residual = pde.residual_check(0, traj, pcfg, t0, t0 + 0.25,
                                      num_checkpoints=1)
        yield "pde-residual", residual, 5e-4, False

        # energy balance: theta' + lewis' = analytic Hamiltonian expectation
        worst = 0.0
        for t in times[::4]:
            s = traj.state(float(t))
            ds = ermakov.system_rhs(s, cfg.coefficients, cfg.c0)
            for n in (0, 1, 2):
                theta = berry.berry_rate_direct(n, s, ds)
                lewis = (2 * n + 1) * cfg.coefficients.a.eval(float(t)) * s.beta**2
                expect = invariant.hamiltonian_expectation_analytic(
                    n, s, cfg.coefficients, float(t))
                worst = max(worst, abs(theta + lewis - expect) / s.lam)
        yield "energy-balance", worst, 1e-6, False
    else:
        yield "pde-residual", 0.0, 5e-4, True
        yield "energy-balance", 0.0, 1e-6, True


def cmd_verify(args, cfg: RunConfig) -> int:
    rng = np.random.RandomState(args.seed)
    report = {}
    all_pass = True
    for suite, measured, tol, skipped in _verify_suites(cfg, rng):
        ok = skipped or measured <= tol
        all_pass = all_pass and ok
        report[suite] = {
            "pass": ok,
            "measured": float(measured),
            "tolerance": tol,
            "skipped": skipped,
        }
        status = "SKIP" if skipped else ("PASS" if ok else "FAIL")
        print(f"{status} {suite}: measured={measured:.3e} tolerance={tol:.0e}",
              file=sys.stderr)
    _emit({"seed": args.seed, "suites": report, "pass": all_pass})
    return 0 if all_pass else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qho",
        description="Generalized driven harmonic oscillators: trajectories, "
                    "wave functions, invariants and Berry phases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", help=f"named preset ({', '.join(preset_names())})")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--out", help="output path (overrides config)")
        p.add_argument("--format", choices=("csv", "json"),
                       help="output format (overrides config)")
        p.set_defaults(needs_config=needs_config)

    p = sub.add_parser("solve", help="integrate the trajectory, export CSV/JSON")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("berry", help="accumulate Lewis and Berry phases")
    add_common(p)
    p.add_argument("--methods", default="direct,alternative",
                   help="comma list of direct,alternative,reduced")
    p.set_defaults(func=cmd_berry)

    p = sub.add_parser("verify", help="run the built-in verification suites")
    add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("wavefunction", help="sample mode functions on a grid")
    add_common(p)
    p.add_argument("--time", type=float, help="evaluation time (default: end of span)")
    p.add_argument("--kind", choices=("psi", "capital-psi", "phi"), default="psi")
    p.set_defaults(func=cmd_wavefunction)

    p = sub.add_parser("pde-verify",
                       help="propagate modes with Crank-Nicolson and compare")
    add_common(p)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_pde_verify)

    p = sub.add_parser("algebra-check", help="SU(1,1)/ladder matrix identities")
    add_common(p, needs_config=False)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_algebra_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.needs_config:
            if args.config is None and args.preset is None:
                print("error: provide --config and/or --preset", file=sys.stderr)
                return EXIT_CONFIG
            cfg = load_config(args.config, args.preset)
            if args.format:
                cfg.format = args.format
            for method in getattr(args, "methods", "direct").split(","):
                if method not in berry.METHODS:
                    raise ConfigError(
                        f"unknown method {method!r}; choose from {berry.METHODS}"
                    )
        else:
            cfg = None
        return args.func(args, cfg)
    except (ConfigError, berry.PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ermakov.CausticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAUSTIC
    except (ermakov.IntegrationError, berry.QuadratureError, DomainError,
            pde.BoundaryDecayError, pde.SingularBandError,
            ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
