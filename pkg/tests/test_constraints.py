"""Constraint chains: golden values for both singular models."""

import random

import pytest

from contactmech.constraints import (
    constraint_set_substitution,
    herglotz_dirac_residuals,
    in_span,
    lagrangian_chain_via_k,
    primary_constraints,
    run_constraint_algorithm,
)
from contactmech.evolution import build_k_direct
from contactmech.geometry import CoordinateChart
from contactmech.lagrangian import LagrangianModel
from contactmech.modelfile import build_bundle, parse_model_text
from contactmech.symexpr import (
    Symbol,
    ZERO,
    cos,
    evaluate,
    is_zero,
    parse,
    primitive_part,
    sin,
    substitute,
    to_expr,
)

gamma = Symbol("gamma", "parameter")


# --- primaries -------------------------------------------------------------


def test_primaries_pendulum(pendulum):
    found = primary_constraints(pendulum.model, pendulum.fl)
    assert not found.needs_user_input
    p_mu = pendulum.fl.target.fibers[2]
    assert found.constraints == [to_expr(p_mu)]


def test_primaries_cawley(cawley):
    found = primary_constraints(cawley.model, cawley.fl)
    p_y = cawley.fl.target.fibers[1]
    s = cawley.fl.target.action
    assert len(found.constraints) == 1
    assert is_zero(found.constraints[0] - (p_y + gamma * s))


def test_primaries_regular_model(oscillator):
    found = primary_constraints(oscillator.model, oscillator.fl)
    assert found.constraints == [] and not found.needs_user_input


def test_primaries_homogeneous_model_needs_user_input():
    """Degree-one homogeneous Lagrangian: quadratic momentum relation."""
    chart = CoordinateChart(
        tuple(Symbol(n, "position", i) for i, n in enumerate(("x", "y"))),
        tuple(Symbol(f"v_{n}", "velocity", i) for i, n in enumerate(("x", "y"))),
        Symbol("s", "action"),
    )
    L = parse("v_x^2/(2*v_y)", chart.symbol_table())
    model = LagrangianModel(chart, L, "homogeneous")
    found = primary_constraints(model)
    assert found.needs_user_input
    assert found.constraints == []


def test_user_primaries_cover_the_homogeneous_model():
    text = """
name: homogeneous
coordinates: x y
lagrangian: v_x^2/(2*v_y)
hamiltonian: 0

[primaries]
p_y + 1/2*p_x^2
"""
    bundle = build_bundle(parse_model_text(text))
    assert not bundle.needs_user_primaries
    assert len(bundle.primaries) == 1
    assert bundle.surface is not None
    p_y = bundle.fl.target.fibers[1]
    assert p_y in bundle.surface.eliminated


# --- the chains ------------------------------------------------------------


def pendulum_golden_chain(bundle):
    chart = bundle.fl.target
    table = chart.symbol_table()
    m, g, l = table["m"], table["g"], table["l"]
    r, theta, mu = chart.positions
    p_r, p_theta, p_mu = chart.fibers
    phi3 = (p_theta**2 / (m * r**3) + m * g * cos(theta) + mu - p_r * gamma) / m
    return [to_expr(p_mu), r - l, p_r / m, phi3]


def test_pendulum_hamiltonian_chain(pendulum):
    chain = run_constraint_algorithm(
        pendulum.hamiltonian, pendulum.eta_for_dynamics(), pendulum.primaries
    )
    assert chain.status == "terminated"
    entries = chain.hamiltonian_entries()
    golden = pendulum_golden_chain(pendulum)
    assert len(entries) == len(golden)
    for entry, expected in zip(entries, golden):
        assert is_zero(entry.normalized - primitive_part(expected))
    assert [e.provenance.kind for e in entries] == [
        "primary",
        "solve",
        "tangency",
        "tangency",
    ]
    # Both free functions of the surface dynamics are determined.
    assert sorted(f.name for f in chain.determined_multipliers) == ["f_1", "f_2"]
    assert chain.free_parameters == []
    f2 = next(s for s in chain.determined_multipliers if s.name == "f_2")
    assert chain.determined_multipliers[f2] == ZERO


def test_pendulum_chain_stable_under_rerun(pendulum):
    first = run_constraint_algorithm(
        pendulum.hamiltonian, pendulum.eta_for_dynamics(), pendulum.primaries
    )
    second = run_constraint_algorithm(
        pendulum.hamiltonian, pendulum.eta_for_dynamics(), pendulum.primaries
    )
    assert [e.normalized for e in first.entries] == [
        e.normalized for e in second.entries
    ]
    assert second.status == "terminated"


def test_cawley_hamiltonian_chain(cawley):
    chain = run_constraint_algorithm(
        cawley.hamiltonian, cawley.eta_for_dynamics(), cawley.primaries
    )
    assert chain.status == "terminated"
    entries = chain.hamiltonian_entries()
    assert len(entries) == 2
    chart = cawley.fl.target
    x, y, z = chart.positions
    p_x, p_y, p_z = chart.fibers
    s = chart.action
    assert is_zero(entries[0].normalized - primitive_part(p_y + gamma * s))
    phi1 = z**2 / 2 + gamma * (p_x * p_z + y * z**2 / 2)
    assert is_zero(entries[1].normalized - primitive_part(phi1))
    assert len(chain.determined_multipliers) == 2
    assert chain.free_parameters == []


def test_regular_chain_is_empty(oscillator):
    chain = run_constraint_algorithm(
        oscillator.hamiltonian, oscillator.eta_for_dynamics(), []
    )
    assert chain.status == "terminated"
    assert chain.entries == []
    assert chain.determined_multipliers == {}


def test_tangency_closure_with_multipliers(pendulum):
    chain = run_constraint_algorithm(
        pendulum.hamiltonian, pendulum.eta_for_dynamics(), pendulum.primaries
    )
    X = chain.field_with_multipliers
    lag = lagrangian_chain_via_k(build_k_direct(pendulum.model), chain)
    bindings = constraint_set_substitution(
        [e.normalized for e in lag], pendulum.chart.coordinates
    )
    for entry in chain.hamiltonian_entries():
        rate = pendulum.fl.pullback(X.apply(entry.function))
        assert is_zero(substitute(rate, bindings))


# --- transported chains ----------------------------------------------------


def pendulum_golden_lagrangian_chain(bundle):
    chart = bundle.chart
    table = chart.symbol_table()
    m, g, l = table["m"], table["g"], table["l"]
    r, theta, mu = chart.positions
    v_r, v_theta, v_mu = chart.fibers
    chi3 = r * v_theta**2 + g * cos(theta) + mu / m - gamma * v_r
    chi4 = (
        -3 * v_r * v_theta**2
        - 3 * g * v_theta * sin(theta)
        - 2 * gamma * r * v_theta**2
        + v_mu / m
        - (gamma / m) * (m * r * v_theta**2 + m * g * cos(theta) + mu - gamma * m * v_r)
    )
    return [r - l, to_expr(v_r), chi3, chi4]


def test_pendulum_lagrangian_chain(pendulum):
    chain = run_constraint_algorithm(
        pendulum.hamiltonian, pendulum.eta_for_dynamics(), pendulum.primaries
    )
    K = build_k_direct(pendulum.model)
    lag = lagrangian_chain_via_k(K, chain)
    golden = pendulum_golden_lagrangian_chain(pendulum)
    assert len(lag) == len(golden)
    for entry, expected in zip(lag, golden):
        assert is_zero(entry.normalized - primitive_part(expected))
    assert [e.provenance.kind for e in lag] == ["image-of-k"] * 4


def test_pendulum_last_transport_against_numeric_derivation(pendulum):
    """Independent oracle: K.f evaluated with finite-difference partials."""
    chain = run_constraint_algorithm(
        pendulum.hamiltonian, pendulum.eta_for_dynamics(), pendulum.primaries
    )
    phi3 = chain.hamiltonian_entries()[3].function
    K = build_k_direct(pendulum.model)
    from contactmech.evolution import k_derive

    chi4 = k_derive(K, phi3)
    chart = pendulum.chart
    target = pendulum.fl.target
    rng = random.Random(99)
    for _ in range(5):
        env = {c: rng.uniform(0.5, 1.5) for c in chart.coordinates}
        env.update({p: float(v) for p, v in pendulum.parameter_values.items()})
        phase_env = {
            c: (
                float(evaluate(pendulum.fl.bindings[c], env))
                if c in pendulum.fl.bindings
                else env[c]
            )
            for c in target.coordinates
        }
        phase_env.update({p: float(v) for p, v in pendulum.parameter_values.items()})
        h = 1e-6
        numeric = 0.0
        k_components = K.components_by_phase_coordinate()
        for c in target.coordinates:
            hi = dict(phase_env)
            lo = dict(phase_env)
            hi[c] = phase_env[c] + h
            lo[c] = phase_env[c] - h
            partial = (float(evaluate(phi3, hi)) - float(evaluate(phi3, lo))) / (2 * h)
            numeric += partial * float(evaluate(k_components[c], env))
        symbolic = float(evaluate(chi4, env))
        assert abs(symbolic - numeric) / (1 + abs(symbolic)) < 1e-5


def test_cawley_lagrangian_chain(cawley):
    chain = run_constraint_algorithm(
        cawley.hamiltonian, cawley.eta_for_dynamics(), cawley.primaries
    )
    K = build_k_direct(cawley.model)
    lag = lagrangian_chain_via_k(K, chain)
    chart = cawley.chart
    x, y, z = chart.positions
    v_x, v_y, v_z = chart.fibers
    chi1 = z**2 / 2 + gamma * (v_x * v_z + y * z**2 / 2)
    chi2 = z * v_z * (1 + 2 * gamma * y) + gamma * v_y * (
        z**2 / 2 - 2 * gamma * v_x * v_z
    )
    assert len(lag) == 2
    assert is_zero(lag[0].normalized - primitive_part(chi1))
    assert is_zero(lag[1].normalized - primitive_part(chi2))


def test_empty_hamiltonian_chain_gives_empty_lagrangian_chain(oscillator):
    chain = run_constraint_algorithm(
        oscillator.hamiltonian, oscillator.eta_for_dynamics(), []
    )
    lag = lagrangian_chain_via_k(build_k_direct(oscillator.model), chain)
    assert lag == []


def test_transported_constraints_vanish_on_final_set(pendulum, cawley):
    """K.phi restricted to the final constraint set is identically zero."""
    for bundle in (pendulum, cawley):
        chain = run_constraint_algorithm(
            bundle.hamiltonian, bundle.eta_for_dynamics(), bundle.primaries
        )
        K = build_k_direct(bundle.model)
        lag = lagrangian_chain_via_k(K, chain)
        bindings = constraint_set_substitution(
            [e.normalized for e in lag], bundle.chart.coordinates
        )
        from contactmech.evolution import k_derive

        for entry in chain.hamiltonian_entries():
            assert is_zero(substitute(k_derive(K, entry.function), bindings))


def test_chain_soundness_pullback_membership(pendulum, cawley):
    for bundle in (pendulum, cawley):
        chain = run_constraint_algorithm(
            bundle.hamiltonian, bundle.eta_for_dynamics(), bundle.primaries
        )
        lag = lagrangian_chain_via_k(build_k_direct(bundle.model), chain)
        lag_set = [e.normalized for e in lag]
        for entry in chain.hamiltonian_entries():
            assert in_span(bundle.fl.pullback(entry.function), lag_set)


# --- span membership -------------------------------------------------------


def test_in_span_parameter_coefficients(pendulum):
    chart = pendulum.fl.target
    table = chart.symbol_table()
    p_r = chart.fibers[0]
    m = table["m"]
    assert in_span(p_r / m, [to_expr(p_r)])
    assert in_span((chart.positions[0] - table["l"]) / m**2,
                   [chart.positions[0] - table["l"]])
    assert not in_span(to_expr(p_r), [chart.positions[0] - table["l"]])
    assert in_span(ZERO, [])
    assert not in_span(to_expr(p_r), [])


def test_in_span_linear_combination(pendulum):
    chart = pendulum.fl.target
    table = chart.symbol_table()
    p_r, p_theta = chart.fibers[0], chart.fibers[1]
    combo = 3 * p_r - p_theta / table["m"]
    assert in_span(combo, [to_expr(p_r), to_expr(p_theta)])


# --- Herglotz-Dirac residuals ----------------------------------------------


def test_herglotz_dirac_free_particle(free_particle):
    system = herglotz_dirac_residuals(free_particle.model, free_particle.fl)
    v = free_particle.chart.fibers[0]
    p = system.momenta[0]
    assert system.residuals[0] == p - v
    assert system.residuals[1] == to_expr(system.momentum_rates[0])
    assert is_zero(system.residuals[2] - (system.action_rate - v * v / 2))


def test_herglotz_dirac_pendulum(pendulum):
    system = herglotz_dirac_residuals(pendulum.model, pendulum.fl)
    chart = pendulum.chart
    table = chart.symbol_table()
    m, g = table["m"], table["g"]
    r, theta, mu = chart.positions
    v_r, v_theta, v_mu = chart.fibers
    pdot_r = system.momentum_rates[0]
    expected = pdot_r - (
        m * r * v_theta**2 + m * g * cos(theta) + mu - gamma * m * v_r
    )
    assert any(is_zero(res - expected) for res in system.residuals)


def test_herglotz_dirac_cawley(cawley):
    system = herglotz_dirac_residuals(cawley.model, cawley.fl)
    chart = cawley.chart
    z = chart.positions[2]
    v_y = chart.fibers[1]
    s = chart.action
    pdot_y = system.momentum_rates[1]
    expected = pdot_y - (z**2 / 2 + gamma**2 * s * v_y)
    assert any(is_zero(res - expected) for res in system.residuals)
