"""Fixed-step RK4 integration of the model dynamics with invariant monitors.

Regular models integrate the unique second-order dynamics; singular models
close the acceleration system with the time derivatives of the transported
constraint chain, which requires the initial point to sit on the final
constraint set.  Every step records the Herglotz-Dirac residual, the
constraint values, the dissipation-law residual and the energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .compilefn import compile_exprs
from .constraints import lagrangian_chain_via_k, run_constraint_algorithm
from .errors import ModelFileError, SingularWithoutReductionError, StepRejectedError
from .evolution import build_k_direct
from .lagrangian import acceleration_symbols, energy, herglotz_el_residuals
from .modelfile import ModelBundle, initial_state
from .symexpr import (
    Expr,
    Symbol,
    ZERO,
    const,
    diff,
    solve_linear,
    substitute,
    to_expr,
)

BLOWUP_GUARD = 1e3
ONSET_TOLERANCE = 1e-9


@dataclass
class Trajectory:
    times: List[float]
    state_names: List[str]
    states: List[Tuple[float, ...]]
    momentum_names: List[str]
    momenta: List[Tuple[float, ...]]
    monitor_names: List[str]
    monitors: List[Tuple[float, ...]]

    def monitor_series(self, name: str) -> List[float]:
        i = self.monitor_names.index(name)
        return [row[i] for row in self.monitors]

    def state_series(self, name: str) -> List[float]:
        i = self.state_names.index(name)
        return [row[i] for row in self.states]

    def csv_rows(self):
        header = (
            ["t"]
            + self.state_names
            + self.momentum_names
            + self.monitor_names
        )
        yield header
        for t, state, ps, mon in zip(
            self.times, self.states, self.momenta, self.monitors
        ):
            yield [f"{x:.17g}" for x in (t, *state, *ps, *mon)]

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            for row in self.csv_rows():
                handle.write(",".join(row) + "\n")


@dataclass
class DynamicsSetup:
    """Symbolic closure of the equations of motion for one model."""

    accelerations: List[Expr]  # per fiber, over the state chart
    onset_conditions: List[Expr]  # must vanish at the initial point
    constraint_exprs: List[Expr]  # transported chain, for monitoring
    hd_residuals: List[Expr]  # momentum-rate residuals with accelerations folded in


def close_dynamics(bundle: ModelBundle, seed=None, max_iter: int = 12) -> DynamicsSetup:
    model = bundle.model
    chart = model.chart
    accel_syms = acceleration_symbols(model)
    sdot = Symbol("_sdot", "parameter")
    hel = herglotz_el_residuals(model, accel_syms, sdot)[: chart.dof]
    rows = list(hel)
    constraint_exprs: List[Expr] = []
    if not bundle.regularity.regular:
        if bundle.needs_user_primaries:
            raise SingularWithoutReductionError(
                "singular model without usable primary constraints"
            )
        kw = {} if seed is None else {"seed": seed}
        chain = run_constraint_algorithm(
            bundle.hamiltonian,
            bundle.eta_for_dynamics(),
            bundle.primaries,
            max_iter=max_iter,
            **kw,
        )
        K = build_k_direct(model)
        lagrangian_entries = lagrangian_chain_via_k(K, chain, seed=seed)
        constraint_exprs = [e.normalized for e in lagrangian_entries]
        for chi in constraint_exprs:
            row = diff(chi, chart.action) * model.L
            for q, v in zip(chart.positions, chart.fibers):
                row = row + diff(chi, q) * v
            for v, f in zip(chart.fibers, accel_syms):
                row = row + diff(chi, v) * f
            rows.append(row)
    kw = {} if seed is None else {"seed": seed}
    solved = solve_linear(rows, accel_syms, free_prefix="_acc", **kw)
    if solved.free_parameters:
        raise SingularWithoutReductionError(
            "acceleration system keeps free directions after constraint closure"
        )
    accels = [solved.particular[f] for f in accel_syms]
    folded = dict(zip(accel_syms, accels))
    hd = [substitute(r, folded) for r in hel]
    return DynamicsSetup(accels, solved.consistency_residuals, constraint_exprs, hd)


def _with_parameters(exprs: Sequence[Expr], bundle: ModelBundle) -> List[Expr]:
    bindings = {p: const(v) for p, v in bundle.parameter_values.items()}
    return [substitute(e, bindings) for e in exprs]


def simulate(
    bundle: ModelBundle,
    seed=None,
    max_iter: int = 12,
    state0: Optional[Sequence[float]] = None,
    step: Optional[float] = None,
    horizon: Optional[float] = None,
) -> Trajectory:
    """Integrate the model from its simulate block (or explicit overrides)."""
    model = bundle.model
    chart = model.chart
    setup = close_dynamics(bundle, seed=seed, max_iter=max_iter)
    if state0 is None:
        state0 = initial_state(bundle)
    sim = bundle.source.simulate
    h = step if step is not None else (sim.step if sim else None)
    T = horizon if horizon is not None else (sim.horizon if sim else None)
    if h is None or T is None:
        raise ModelFileError("no step/horizon available for simulation")

    coords = list(chart.coordinates)
    n = chart.dof

    rhs_exprs = _with_parameters(
        [to_expr(v) for v in chart.fibers] + setup.accelerations + [model.L], bundle
    )
    rhs = compile_exprs(rhs_exprs, coords)

    E = energy(model)
    dHds_pulled = bundle.fl.pullback(
        diff(bundle.hamiltonian, bundle.fl.target.action)
    )
    folded = dict(zip(acceleration_symbols(model), setup.accelerations))
    e_dot = diff(E, chart.action) * model.L
    for q, v in zip(chart.positions, chart.fibers):
        e_dot = e_dot + diff(E, q) * v
    for v, f_expr in zip(chart.fibers, setup.accelerations):
        e_dot = e_dot + diff(E, v) * f_expr
    dissipation = e_dot + dHds_pulled * E

    momentum_exprs = [bundle.fl.bindings[p] for p in bundle.fl.target.fibers]
    monitor_exprs = [E, dissipation] + setup.hd_residuals + setup.constraint_exprs
    monitor_names = (
        ["H", "dissipation_residual"]
        + [f"hd_residual_{i}" for i in range(len(setup.hd_residuals))]
        + [f"constraint_{i}" for i in range(len(setup.constraint_exprs))]
    )
    monitors_fn = compile_exprs(_with_parameters(monitor_exprs, bundle), coords)
    momenta_fn = compile_exprs(_with_parameters(momentum_exprs, bundle), coords)
    onset_fn = (
        compile_exprs(_with_parameters(setup.onset_conditions, bundle), coords)
        if setup.onset_conditions
        else None
    )

    state = list(map(float, state0))
    if onset_fn is not None:
        bad = [v for v in onset_fn(state) if abs(v) > ONSET_TOLERANCE]
        if bad:
            raise ModelFileError(
                "initial point is off the final constraint set "
                f"(residuals up to {max(abs(v) for v in bad):.3e})"
            )

    steps = int(T / h + 1e-9)
    times: List[float] = []
    states: List[Tuple[float, ...]] = []
    momenta: List[Tuple[float, ...]] = []
    monitor_rows: List[Tuple[float, ...]] = []

    def record(k: int, current: List[float]) -> None:
        times.append(k * h)
        states.append(tuple(current))
        momenta.append(tuple(momenta_fn(current)))
        row = tuple(monitors_fn(current))
        monitor_rows.append(row)
        for name, value in zip(monitor_names, row):
            if abs(value) > BLOWUP_GUARD:
                raise StepRejectedError(
                    f"monitor {name} = {value:.3e} at t = {k * h:.6g}"
                )

    record(0, state)
    for k in range(1, steps + 1):
        k1 = rhs(state)
        s2 = [x + 0.5 * h * d for x, d in zip(state, k1)]
        k2 = rhs(s2)
        s3 = [x + 0.5 * h * d for x, d in zip(state, k2)]
        k3 = rhs(s3)
        s4 = [x + h * d for x, d in zip(state, k3)]
        k4 = rhs(s4)
        state = [
            x + (h / 6.0) * (a + 2 * b + 2 * c + d)
            for x, a, b, c, d in zip(state, k1, k2, k3, k4)
        ]
        record(k, state)

    return Trajectory(
        times=times,
        state_names=[c.name for c in coords],
        states=states,
        momentum_names=[p.name for p in bundle.fl.target.fibers],
        momenta=momenta,
        monitor_names=monitor_names,
        monitors=monitor_rows,
    )
