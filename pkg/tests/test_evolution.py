"""Evolution operator: constructions, derivation, multipliers, projectability."""

import pytest

from contactmech.errors import HamiltonianMismatchError
from contactmech.evolution import (
    EvolutionOperator,
    build_k_direct,
    build_k_tulczyjew,
    build_k_via_bundle_iso,
    decompose_k,
    gamma_field,
    k_derive,
    projectability_check,
    solve_multipliers,
    structural_residuals,
)
from contactmech.lagrangian import hessian
from contactmech.symexpr import Symbol, cos, diff, is_zero, sin, to_expr

gamma = Symbol("gamma", "parameter")


def _as_tuple(K):
    return K.a + K.b + (K.c,)


def assert_same_operator(K1, K2):
    for x, y in zip(_as_tuple(K1), _as_tuple(K2)):
        assert is_zero(x - y)


def test_k_direct_pendulum_components(pendulum):
    K = build_k_direct(pendulum.model)
    chart = pendulum.chart
    table = chart.symbol_table()
    m, g, l = table["m"], table["g"], table["l"]
    r, theta, mu = chart.positions
    v_r, v_theta, v_mu = chart.fibers
    assert K.a == tuple(to_expr(v) for v in chart.fibers)
    assert is_zero(
        K.b[0] - (m * r * v_theta**2 + m * g * cos(theta) + mu - gamma * m * v_r)
    )
    assert is_zero(K.b[1] - (-m * g * r * sin(theta) - gamma * m * r**2 * v_theta))
    assert is_zero(K.b[2] - (r - l))
    assert is_zero(K.c - pendulum.model.L)


def test_k_direct_cawley_components(cawley):
    K = build_k_direct(cawley.model)
    chart = cawley.chart
    x, y, z = chart.positions
    v_x, v_y, v_z = chart.fibers
    s = chart.action
    assert is_zero(K.b[0] + gamma * v_y * v_z)
    assert is_zero(K.b[1] - (z**2 / 2 + gamma**2 * s * v_y))
    assert is_zero(K.b[2] - (y * z - gamma * v_x * v_y))
    assert is_zero(K.c - cawley.model.L)


def test_k_direct_free_particle(free_particle):
    K = build_k_direct(free_particle.model)
    chart = free_particle.chart
    v = chart.fibers[0]
    assert K.a == (to_expr(v),)
    assert K.b[0].is_zero_canonical()
    assert is_zero(K.c - v * v / 2)


def test_three_constructions_agree(pendulum, cawley, oscillator, free_particle):
    for bundle in (pendulum, cawley, oscillator, free_particle):
        direct = build_k_direct(bundle.model)
        assert_same_operator(direct, build_k_via_bundle_iso(bundle.model))
        assert_same_operator(direct, build_k_tulczyjew(bundle.model))


def test_k_derive_action_gives_lagrangian(pendulum, oscillator):
    for bundle in (pendulum, oscillator):
        K = build_k_direct(bundle.model)
        assert is_zero(k_derive(K, to_expr(bundle.fl.target.action)) - bundle.model.L)


def test_k_derive_pendulum_primary(pendulum):
    K = build_k_direct(pendulum.model)
    chart = pendulum.chart
    table = chart.symbol_table()
    p_mu = pendulum.fl.target.fibers[2]
    chi = k_derive(K, to_expr(p_mu))
    assert is_zero(chi - (chart.positions[0] - table["l"]))


def test_k_derive_cawley_primary(cawley):
    K = build_k_direct(cawley.model)
    chart = cawley.chart
    x, y, z = chart.positions
    v_x, v_y, v_z = chart.fibers
    p_y = cawley.fl.target.fibers[1]
    s = cawley.fl.target.action
    chi = k_derive(K, p_y + gamma * s)
    expected = z**2 / 2 + gamma * (v_x * v_z + y * z**2 / 2)
    assert is_zero(chi - expected)


def test_gamma_fields_pendulum(pendulum):
    chart = pendulum.chart
    v_r, v_theta, v_mu = chart.fibers
    gH = gamma_field(pendulum.hamiltonian, pendulum.fl)
    assert is_zero(gH.component(v_r) - v_r)
    assert is_zero(gH.component(v_theta) - v_theta)
    assert gH.component(v_mu).is_zero_canonical()
    g0 = gamma_field(pendulum.primaries[0], pendulum.fl)
    assert g0.component(v_mu) == to_expr(1)
    assert g0.component(v_r).is_zero_canonical()


def test_primary_gamma_fields_span_hessian_kernel(pendulum, cawley):
    for bundle in (pendulum, cawley):
        W = hessian(bundle.model)
        fibers = bundle.chart.fibers
        for phi in bundle.primaries:
            gm = gamma_field(phi, bundle.fl)
            for i in range(len(fibers)):
                total = to_expr(0)
                for j, v in enumerate(fibers):
                    total = total + W[i][j] * gm.component(v)
                assert is_zero(total)


def test_multipliers_pendulum(pendulum):
    result = solve_multipliers(pendulum.model, pendulum.hamiltonian, pendulum.primaries)
    v_mu = pendulum.chart.fibers[2]
    assert len(result.lambdas) == 1
    assert is_zero(result.lambdas[0] - v_mu)


def test_multipliers_cawley(cawley):
    result = solve_multipliers(cawley.model, cawley.hamiltonian, cawley.primaries)
    v_y = cawley.chart.fibers[1]
    assert is_zero(result.lambdas[0] - v_y)


def test_multiplier_duality(pendulum, cawley):
    for bundle in (pendulum, cawley):
        result = solve_multipliers(bundle.model, bundle.hamiltonian, bundle.primaries)
        for nu, phi_nu in enumerate(bundle.primaries):
            g_nu = gamma_field(phi_nu, bundle.fl)
            for mu, lam in enumerate(result.lambdas):
                delta = 1 if nu == mu else 0
                assert is_zero(g_nu.apply(lam) - delta)


def test_multipliers_regular_model_empty(oscillator):
    result = solve_multipliers(oscillator.model, oscillator.hamiltonian, [])
    assert result.lambdas == []


def test_multipliers_reject_wrong_hamiltonian(pendulum):
    wrong = pendulum.hamiltonian + 1
    with pytest.raises(HamiltonianMismatchError):
        solve_multipliers(pendulum.model, wrong, pendulum.primaries)


def test_decomposition_residuals_vanish(pendulum, cawley, oscillator):
    for bundle in (pendulum, cawley, oscillator):
        residuals = decompose_k(bundle.model, bundle.hamiltonian, bundle.primaries)
        assert all(is_zero(r) for r in residuals)


def test_projectability_pendulum(pendulum):
    p_theta = pendulum.fl.target.fibers[1]
    mu = pendulum.fl.target.positions[2]
    good = projectability_check(
        pendulum.model, pendulum.hamiltonian, pendulum.primaries, to_expr(p_theta)
    )
    assert good.projectable and good.cross_check_ok
    bad = projectability_check(
        pendulum.model, pendulum.hamiltonian, pendulum.primaries, to_expr(mu)
    )
    assert not bad.projectable
    assert bad.obstructions == [0]
    assert bad.cross_check_ok


def test_projectability_trivial_without_primaries(oscillator):
    q = oscillator.fl.target.positions[0]
    result = projectability_check(
        oscillator.model, oscillator.hamiltonian, [], to_expr(q)
    )
    assert result.projectable and result.cross_check_ok


def test_structural_conditions_hold(pendulum, cawley, oscillator, free_particle):
    for bundle in (pendulum, cawley, oscillator, free_particle):
        checks = structural_residuals(build_k_direct(bundle.model))
        assert all(checks.values()), checks


def test_structural_conditions_catch_corruption(pendulum):
    """Perturbing a momentum component must break the dynamical condition."""
    K = build_k_direct(pendulum.model)
    corrupted = EvolutionOperator(
        K.model, K.legendre, K.a, (K.b[0] + 1,) + K.b[1:], K.c
    )
    checks = structural_residuals(corrupted)
    assert not checks["dynamical_one_form"]
    assert checks["second_order"]
